#pragma once

// Uniform grids, local high-order interpolation, finite-difference weights and
// quadrature rules shared by all modules.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kenergy {

struct UniformGrid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t size = 2;

    UniformGrid() = default;
    UniformGrid(double lo_, double hi_, std::size_t n);

    double step() const noexcept { return (hi - lo) / static_cast<double>(size - 1); }
    double operator[](std::size_t i) const noexcept {
        return i + 1 == size ? hi : lo + static_cast<double>(i) * step();
    }
    std::vector<double> points() const;

    bool operator==(const UniformGrid& other) const noexcept {
        return lo == other.lo && hi == other.hi && size == other.size;
    }
};

/// Finite-difference weights for derivatives 0..max_order at x0 from arbitrary
/// nodes (Fornberg's recursion). Row k holds the weights of the k-th derivative.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                  int max_order);

/// Piecewise polynomial built from local Lagrange interpolants of a fixed odd
/// width on a uniform grid. Each cell stores the Taylor coefficients of the
/// interpolant through the `width` nodes closest to the cell centre, so
/// derivatives up to width-1 are available everywhere at Horner cost.
class LocalInterpolant {
public:
    static constexpr int kWidth = 13;

    LocalInterpolant() = default;
    LocalInterpolant(const UniformGrid& grid, std::span<const double> values);

    /// Derivatives 0..max_order (max_order <= 4) at x into out.
    void jet(double x, int max_order, double* out) const;
    double value(double x) const;
    double derivative(double x, int order) const;

    const UniformGrid& grid() const noexcept { return grid_; }

private:
    UniformGrid grid_;
    std::vector<std::array<double, kWidth>> taylor_;  // per cell, about the cell centre
};

/// Piecewise septic Hermite interpolant matching values and the first three
/// derivatives at every node, the derivatives taken from 13-point finite
/// differences. The result is C^3, so quantities built from up to three
/// derivatives have no jumps between cells. The chord through the end values
/// is split off first and carried exactly, which keeps affine data free of
/// rounding noise in the higher derivatives.
class HermiteInterpolant {
public:
    HermiteInterpolant() = default;
    HermiteInterpolant(const UniformGrid& grid, std::span<const double> values);

    /// Derivatives 0..max_order (max_order <= 4) at x into out.
    void jet(double x, int max_order, double* out) const;
    double value(double x) const;
    double derivative(double x, int order) const;

private:
    UniformGrid grid_;
    double chord0_ = 0.0;
    double chord1_ = 0.0;
    std::vector<std::array<double, 8>> coeff_;  // per cell, in the local coordinate t in [0, 1]
};

/// High-order finite-difference derivative of uniformly sampled data, using
/// centred stencils of the given width in the interior and shifted ones near
/// the ends.
std::vector<double> differentiate(std::span<const double> values, double h, int order,
                                  int width = 9);

/// Centred weights for the given derivative order on integer offsets
/// -w/2..w/2, scaled by 1/h^order.
std::vector<double> central_weights(int order, int width, double h);

double trapezoid(std::span<const double> values, double h);

/// Composite Simpson; an odd number of intervals closes with a 3/8 panel.
double simpson(std::span<const double> values, double h);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` nodes.
QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order);

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

/// Numerically stable logistic helpers.
double sigmoid(double s) noexcept;
double softplus(double s) noexcept;  // log(1 + e^s)
double log_sigmoid(double s) noexcept;

}  // namespace kenergy
