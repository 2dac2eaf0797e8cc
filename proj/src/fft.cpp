#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>

namespace fracspde::detail {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

LatticeFft::LatticeFft(int d, int n) : d_(d), n_(n) {
    real_size_ = d == 1 ? std::size_t(n) : std::size_t(n) * n;
    spectral_size_ = d == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
    spectrum_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * spectral_size_));
    if (real_ == nullptr || spectrum_ == nullptr) {
        fftw_free(real_);
        fftw_free(spectrum_);
        throw std::bad_alloc();
    }
    auto* spec = reinterpret_cast<fftw_complex*>(spectrum_);
    const unsigned flags = FFTW_ESTIMATE;
    if (d == 1) {
        forward_plan_ = fftw_plan_dft_r2c_1d(n, real_, spec, flags);
        backward_plan_ = fftw_plan_dft_c2r_1d(n, spec, real_, flags);
    } else {
        forward_plan_ = fftw_plan_dft_r2c_2d(n, n, real_, spec, flags);
        backward_plan_ = fftw_plan_dft_c2r_2d(n, n, spec, real_, flags);
    }
}

LatticeFft::~LatticeFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
    fftw_free(real_);
    fftw_free(spectrum_);
}

void LatticeFft::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }

void LatticeFft::backward() { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }

}  // namespace fracspde::detail
