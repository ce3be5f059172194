#pragma once

// Torus-invariant Kähler potentials on the sphere.
//
// The canonical object is the symplectic potential
//     u(x) = x log x + (1 - x) log(1 - x) + f(x),   x in [0, 1],
// with f sampled on a uniform grid. The complex-side potential psi(s) on the
// log-coordinate line is its Legendre dual; psi'' ds is the area form, pushed
// forward to Lebesgue measure on [0, 1] by the moment map x = psi'(s).
// Total area is normalised to one, so the average scalar curvature is 2.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "kenergy/numerics.hpp"

namespace kenergy {

inline constexpr std::size_t kDefaultNx = 512;
inline constexpr std::size_t kDefaultNs = 2048;
inline constexpr double kDefaultSMax = 18.0;
inline constexpr double kHessianFloor = 1e-10;
inline constexpr double kAverageScalarCurvature = 2.0;

UniformGrid default_x_grid(std::size_t nx = kDefaultNx);
UniformGrid default_s_grid(std::size_t ns = kDefaultNs, double s_max = kDefaultSMax);

/// x log x + (1-x) log(1-x), continuous at the endpoints.
double guillemin(double x) noexcept;
/// Reference radial potential log(1 + e^s) and its derivatives.
double reference_psi(double s) noexcept;
double reference_density(double s) noexcept;  // e^s / (1 + e^s)^2

/// Inverse metric g = 1/u'' and its first two x-derivatives.
struct MetricJet {
    double g = 0.0;
    double dg = 0.0;
    double d2g = 0.0;
};

/// Point of the Legendre correspondence: slope s = u'(x), psi(s) = x s - u(x),
/// psi''(s) = g(x).
struct DualPoint {
    double s = 0.0;
    double x = 0.0;
    double one_minus_x = 1.0;
    double psi = 0.0;
    double density = 0.0;
};

class SymplecticPotential {
public:
    SymplecticPotential(const UniformGrid& nodes, std::vector<double> f_values);

    static SymplecticPotential round(std::size_t nx = kDefaultNx);
    static SymplecticPotential from_correction(const std::function<double(double)>& f,
                                               std::size_t nx = kDefaultNx);

    const UniformGrid& nodes() const noexcept { return nodes_; }
    std::span<const double> f_values() const noexcept { return f_; }

    /// f and its derivatives up to `order` (<= 4) at x.
    void correction_jet(double x, int order, double* out) const { interp_.jet(x, order, out); }
    double correction(double x) const { return interp_.value(x); }

    double value(double x) const;      // u(x)
    double slope(double x) const;      // u'(x), infinite at the endpoints
    double hessian(double x) const;    // u''(x)
    MetricJet metric_jet(double x) const;
    double scalar_curvature_at(double x) const { return -metric_jet(x).d2g; }

    /// Solves u'(x) = s for x and returns the dual data at s.
    DualPoint dual_at(double s) const;

    /// max |f''| over the nodes (C^2 proxy).
    double max_abs_second_difference() const noexcept { return max_f2_; }

    /// u + c0 + c1 x (both sides of the Legendre dictionary stay valid).
    SymplecticPotential plus_affine(double c0, double c1) const;
    /// (1 - t) u0 + t u1 on a common grid.
    static SymplecticPotential interpolate(const SymplecticPotential& u0,
                                           const SymplecticPotential& u1, double t);

private:
    UniformGrid nodes_;
    std::vector<double> f_;
    HermiteInterpolant interp_;
    double slope_bound_ = 0.0;
    double max_f2_ = 0.0;
};

/// Grid-sampled density on the s-line together with the mass of the two tails
/// outside the window, so that integrals over the whole line stay exact to
/// quadrature accuracy.
struct MetricDensity {
    UniformGrid grid;
    std::vector<double> values;
    double tail_left = 0.0;
    double tail_right = 0.0;
};

class RadialPotential {
public:
    /// Derivatives by high-order finite differences; validates convexity and
    /// slope range.
    static RadialPotential from_values(const UniformGrid& grid, std::vector<double> psi);
    /// Values with exact first and second derivatives (as produced by the
    /// Legendre transform); still validated.
    static RadialPotential from_exact(const UniformGrid& grid, std::vector<double> psi,
                                      std::vector<double> dpsi, std::vector<double> d2psi);
    static RadialPotential reference(const UniformGrid& grid);

    const UniformGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return psi_; }
    std::span<const double> slopes() const noexcept { return dpsi_; }
    std::span<const double> second_derivative() const noexcept { return d2psi_; }

    MetricDensity density() const;
    /// psi - psi_0 on the grid (the Kähler potential relative to the round metric).
    std::vector<double> relative_potential() const;

    /// Local high-order interpolant of the samples, valid inside the window.
    double interpolated_value(double s) const;
    double interpolated_slope(double s) const;
    double interpolated_curvature(double s) const;

private:
    RadialPotential(const UniformGrid& grid, std::vector<double> psi, std::vector<double> dpsi,
                    std::vector<double> d2psi);
    void validate() const;

    UniformGrid grid_;
    std::vector<double> psi_;
    std::vector<double> dpsi_;
    std::vector<double> d2psi_;
    LocalInterpolant interp_;
};

RadialPotential legendre_to_s(const SymplecticPotential& u, const UniformGrid& s_grid = default_s_grid());
SymplecticPotential legendre_to_x(const RadialPotential& psi, std::size_t nx = kDefaultNx);

/// R(x) = -(1/u'')'' at the grid nodes.
std::vector<double> scalar_curvature(const SymplecticPotential& u);
/// Integral of R over [0, 1] by composite Gauss–Legendre on the interpolant.
double total_scalar_curvature(const SymplecticPotential& u);

struct RicciDensity {
    MetricDensity density;  // r(s) with tail integrals
    std::size_t excluded = 0;
};

/// r(s) = -(log psi'')'' by finite differences on the s-grid.
RicciDensity ricci_density(const RadialPotential& psi);

/// Integral of g against rho over the whole line (window quadrature plus tails,
/// with g held at its end values on the tails).
double integrate_X(std::span<const double> g, const MetricDensity& rho);
double total_mass(const MetricDensity& rho);

/// x(s) = psi'(s); checks strict monotonicity and range (0, 1).
std::vector<double> moment_map(const RadialPotential& psi);

/// Potential files: CSV with header `x,f`, x ascending on a uniform grid.
SymplecticPotential read_potential_csv(const std::filesystem::path& path);
void write_potential_csv(const std::filesystem::path& path, const SymplecticPotential& u);

}  // namespace kenergy
