#include "fracspde/grid.hpp"

#include <cmath>
#include <sstream>

#include "fracspde/errors.hpp"

namespace fracspde {

void GridSpec::validate() const {
    if (d != 1 && d != 2) throw DomainError("grid.d must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("grid.half_width must be positive");
    if (n < 2 || (n & (n - 1)) != 0) throw DomainError("grid.n must be a power of two >= 2");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("grid.T must be positive");
    if (nt < 1) throw DomainError("grid.nt must be >= 1");
}

Point GridSpec::point(std::size_t i) const noexcept {
    if (d == 1) return {coordinate(int(i)), 0.0};
    return {coordinate(int(i / std::size_t(n))), coordinate(int(i % std::size_t(n)))};
}

CellWeights GridSpec::cell_weights(const Point& y) const noexcept {
    std::array<int, 2> lo{};
    std::array<double, 2> frac{};
    for (int a = 0; a < d; ++a) {
        double g = (y[a] + half_width) / h();
        g -= n * std::floor(g / n);
        int i = int(std::floor(g));
        frac[a] = g - i;
        if (i >= n) i -= n;
        lo[a] = i;
    }
    CellWeights w;
    if (d == 1) {
        w.count = 2;
        w.index = {std::size_t(lo[0]), std::size_t((lo[0] + 1) % n), 0, 0};
        w.weight = {1.0 - frac[0], frac[0], 0.0, 0.0};
        return w;
    }
    w.count = 4;
    for (int c = 0; c < 4; ++c) {
        const int i0 = (lo[0] + (c >> 1)) % n;
        const int i1 = (lo[1] + (c & 1)) % n;
        w.index[c] = std::size_t(i0) * std::size_t(n) + std::size_t(i1);
        w.weight[c] = ((c >> 1) ? frac[0] : 1.0 - frac[0]) * ((c & 1) ? frac[1] : 1.0 - frac[1]);
    }
    return w;
}

double GridSpec::interpolate(std::span<const double> field, const Point& y) const noexcept {
    const CellWeights w = cell_weights(y);
    double v = 0.0;
    for (int c = 0; c < w.count; ++c) v += w.weight[c] * field[w.index[c]];
    return v;
}

std::string GridSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "d=" << d << " half_width=" << half_width << " n=" << n << " T=" << T << " nt=" << nt;
    return os.str();
}

}  // namespace fracspde
