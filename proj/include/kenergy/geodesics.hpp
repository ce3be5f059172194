#pragma once

// Weak geodesics between torus-invariant potentials. In symplectic
// coordinates the geodesic is the straight segment u_t = (1-t) u0 + t u1; the
// complex side Psi(t, s) = psi_t(s) is recovered slice by slice and checked
// against the homogeneous Monge-Ampère equation a posteriori.

#include <cstddef>
#include <vector>

#include "kenergy/radial_geometry.hpp"

namespace kenergy {

inline constexpr std::size_t kDefaultTimeSteps = 64;
inline constexpr double kDegenerateDensity = 1e-10;

class GeodesicPath {
public:
    /// `steps` uniform t-steps on [0, 1], i.e. steps + 1 samples.
    GeodesicPath(SymplecticPotential u0, SymplecticPotential u1, std::size_t steps = kDefaultTimeSteps);

    const SymplecticPotential& start() const noexcept { return u0_; }
    const SymplecticPotential& end() const noexcept { return u1_; }
    std::size_t steps() const noexcept { return steps_; }
    UniformGrid t_grid() const { return UniformGrid(0.0, 1.0, steps_ + 1); }

    SymplecticPotential slice(double t) const { return SymplecticPotential::interpolate(u0_, u1_, t); }
    /// du_t/dt = u1 - u0 at the x-nodes, the same for every t.
    std::vector<double> velocity() const;

private:
    SymplecticPotential u0_;
    SymplecticPotential u1_;
    std::size_t steps_;
};

GeodesicPath weak_geodesic(const SymplecticPotential& u0, const SymplecticPotential& u1,
                           std::size_t steps = kDefaultTimeSteps);

/// Psi(t, s) = psi_t(s) on the product of the path's t-grid and an s-grid.
struct ComplexifiedSolution {
    UniformGrid t_grid;
    UniformGrid s_grid;
    std::vector<RadialPotential> slices;

    double psi(std::size_t ti, std::size_t si) const { return slices[ti].values()[si]; }
};

ComplexifiedSolution complexify(const GeodesicPath& path, const UniformGrid& s_grid = default_s_grid());

/// Smallest eigenvalue of the discrete (t, s) Hessian over all nodes,
/// normalised by the largest Hessian entry on the grid; nonnegative up to
/// discretisation error when Psi is jointly convex.
double joint_convexity_min_eigenvalue(const ComplexifiedSolution& sol);

struct ResidualReport {
    double value = 0.0;
    std::size_t excluded = 0;         // nodes with psi'' <= kDegenerateDensity
    double excluded_measure = 0.0;    // their share of t x s area
    std::vector<double> by_time;      // per t-node contribution, NaN at the endpoints
};

/// sup |det Hess_{(t,s)} Psi| over interior t-nodes. Psi_tt and the mixed
/// derivative come from five-point stencils in t (the latter applied to the
/// exact moment map x_t(s) = d psi_t / ds); Psi_ss = psi_t'' is exact.
ResidualReport hrma_residual(const ComplexifiedSolution& sol);
ResidualReport hrma_residual(const GeodesicPath& path, const UniformGrid& s_grid = default_s_grid());

/// int int |phi_tt - (phi_ts)^2 / psi''| psi'' ds dt over interior t-nodes,
/// every derivative by second-order centred differences on the (t, s) grid.
ResidualReport geodesic_ode_residual(const ComplexifiedSolution& sol);
ResidualReport geodesic_ode_residual(const GeodesicPath& path, const UniformGrid& s_grid = default_s_grid());

/// M(u_t) at every node of the path's t-grid.
std::vector<double> mabuchi_along(const GeodesicPath& path);

struct FiberIntegral {
    double value = 0.0;           // int T ds
    double min_integrand = 0.0;   // over non-degenerate nodes
    double scale = 1.0;           // 1 + max |T|
    std::size_t excluded = 0;
    std::vector<double> integrand;
};

/// T = W_tt Phi_ss + W_ss Phi_tt - 2 W_ts Phi_ts with W = log psi_t'',
/// Phi = psi_t, integrated over s. Derivatives in t use nine-point stencils
/// of step dt; derivatives in s are exact through the moment map.
FiberIntegral second_variation_fiber_integral(const GeodesicPath& path, double t,
                                              const UniformGrid& s_grid = default_s_grid(),
                                              double dt = 1e-2);

}  // namespace kenergy
