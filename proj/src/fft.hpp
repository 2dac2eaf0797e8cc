#pragma once

// Real-to-complex lattice transforms on an n^d periodic grid (d = 1 or 2),
// backed by FFTW. Plans are built with FFTW_ESTIMATE so results do not depend
// on timing measurements.

#include <complex>
#include <cstddef>

namespace fracspde::detail {

class LatticeFft {
public:
    LatticeFft(int d, int n);
    ~LatticeFft();
    LatticeFft(const LatticeFft&) = delete;
    LatticeFft& operator=(const LatticeFft&) = delete;

    int d() const noexcept { return d_; }
    int n() const noexcept { return n_; }
    /// n^d real values, row-major.
    std::size_t real_size() const noexcept { return real_size_; }
    /// n^{d-1} (n/2 + 1) complex values, row-major, last axis halved.
    std::size_t spectral_size() const noexcept { return spectral_size_; }

    double* real() noexcept { return real_; }
    std::complex<double>* spectrum() noexcept { return spectrum_; }

    /// spectrum = sum_x real(x) e^{-i xi x}; real is preserved.
    void forward();
    /// real = sum_xi spectrum(xi) e^{+i xi x}, unnormalized; spectrum is overwritten.
    void backward();

private:
    int d_;
    int n_;
    std::size_t real_size_;
    std::size_t spectral_size_;
    double* real_ = nullptr;
    std::complex<double>* spectrum_ = nullptr;
    void* forward_plan_ = nullptr;
    void* backward_plan_ = nullptr;
};

}  // namespace fracspde::detail
