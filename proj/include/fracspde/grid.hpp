#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace fracspde {

/// A point or jump mark in R^d; the second component is zero when d = 1.
using Point = std::array<double, 2>;

inline double norm(const Point& p) noexcept { return std::hypot(p[0], p[1]); }

/// Lattice nodes and weights of periodic multilinear interpolation at a point.
struct CellWeights {
    std::array<std::size_t, 4> index{};
    std::array<double, 4> weight{};
    int count = 0;
};

/// Periodic space-time grid: the box [-half_width, half_width)^d with n points
/// per dimension, and nt steps of size T / nt.
struct GridSpec {
    int d = 1;
    double half_width = 8.0;
    int n = 64;
    double T = 1.0;
    int nt = 32;

    double dt() const noexcept { return T / nt; }
    double h() const noexcept { return 2.0 * half_width / n; }
    double time(int k) const noexcept { return k * dt(); }
    double coordinate(int i) const noexcept { return -half_width + i * h(); }
    std::size_t points() const noexcept { return d == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n); }
    double cell_volume() const noexcept { return d == 1 ? h() : h() * h(); }
    double box_volume() const noexcept { return d == 1 ? 2.0 * half_width : 4.0 * half_width * half_width; }

    /// Coordinates of the lattice node with row-major flat index i.
    Point point(std::size_t i) const noexcept;
    /// Nodes surrounding y (wrapped into the box) with multilinear weights.
    CellWeights cell_weights(const Point& y) const noexcept;
    /// Periodic multilinear interpolation of a lattice field at y.
    double interpolate(std::span<const double> field, const Point& y) const noexcept;

    /// Throws DomainError naming the offending field.
    void validate() const;
    /// Compact text form used in error messages and manifests.
    std::string describe() const;

    bool operator==(const GridSpec&) const = default;
};

}  // namespace fracspde
