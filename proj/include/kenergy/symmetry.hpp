#pragma once

// The rotation/dilation subgroup acting on torus-invariant potentials, its
// Hamiltonians, and the Lichnerowicz operator D*D restricted to angular modes.
//
// Dilation by e^{2at} pulls psi back to psi(. + 2at); in symplectic
// coordinates this is u - 2at x, a straight line and hence a geodesic.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kenergy/geodesics.hpp"
#include "kenergy/radial_geometry.hpp"

namespace kenergy {

class OrbitPath {
public:
    OrbitPath(SymplecticPotential base, double strength);

    const SymplecticPotential& base() const noexcept { return base_; }
    double strength() const noexcept { return a_; }

    /// u_0 - 2 a t x + c(t) with c(t) chosen so that E(u_t) = 0; any real t.
    SymplecticPotential slice(double t) const;
    /// The normalising constant c(t).
    double normalization(double t) const;

    /// The same curve on [t0, t1] as a geodesic path with `steps` steps.
    GeodesicPath as_geodesic(double t0, double t1, std::size_t steps = kDefaultTimeSteps) const;

private:
    SymplecticPotential base_;
    double a_;
};

OrbitPath orbit_geodesic(const SymplecticPotential& u0, double a);

/// h_t = a (x - 1/2) on the x-grid: the Hamiltonian of the rotation field for
/// omega_{u_t} with vanishing average (the pushforward of omega_{u_t} is
/// Lebesgue measure, so the average of x is 1/2 for every t).
std::vector<double> orbit_hamiltonian(const OrbitPath& path, double t);

/// sup over the s-grid of |(1/2) d/dt phi_t - h_t|, where d/dt phi_t comes
/// from a centred difference of the normalised complex potentials and h_t is
/// read through the moment map of u_t.
double hamiltonian_defect(const OrbitPath& path, double t, const UniformGrid& s_grid = default_s_grid(),
                          double dt = 1e-2);

/// A function v(x) e^{i m theta}, v in the basis q^{|m|/2} P_k(2x - 1),
/// q = x(1 - x), k = 0, 1, ...
struct ModeFunction {
    int m = 0;
    std::vector<double> coeffs;
};

inline constexpr std::size_t kMaxRadialDegree = 48;

/// ||D_u v|| with D_u = dbar grad^{1,0}; zero exactly when v is a complex
/// Hamiltonian of a holomorphic vector field.
double complex_hamiltonian_check(const ModeFunction& v, const SymplecticPotential& u);

struct ModeBlock {
    int m = 0;
    /// Matrix of D*D in an orthonormal basis of the mode's radial space.
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;  // ascending
};

struct LichnerowiczOperator {
    std::size_t degree = 0;  // total degree l = |m| + k <= degree
    std::vector<ModeBlock> blocks;

    double max_eigenvalue() const;
    double min_eigenvalue() const;
    /// ||L_m - L_{-m}|| over the modes: L commutes with conjugation iff zero.
    double realness_residual() const;
    /// Largest asymmetry |L - L^T| over the blocks.
    double symmetry_residual() const;
    const ModeBlock& block(int m) const;
};

/// Assembles D*D on modes |m| <= degree with radial degree up to degree - |m|.
LichnerowiczOperator lichnerowicz_assemble(const SymplecticPotential& u, std::size_t degree);

inline constexpr double kKernelTolerance = 1e-6;

/// Eigenvalues below tol * (largest eigenvalue), over all blocks or only the
/// block of mode m.
std::size_t kernel_dimension(const LichnerowiczOperator& op, double tol = kKernelTolerance);
std::size_t kernel_dimension(const LichnerowiczOperator& op, int m, double tol = kKernelTolerance);

/// Kernel dimension (all modes, or the given mode only) at degree and
/// degree + 2; throws ConvergenceError when the two disagree.
std::size_t stable_kernel_dimension(const SymplecticPotential& u, std::size_t degree,
                                    std::optional<int> mode = std::nullopt, double tol = kKernelTolerance);

struct OrbitScan {
    std::vector<double> t;
    std::vector<double> mabuchi;
    std::vector<double> F;
    std::vector<double> E;
    double flatness = 0.0;            // max |M(u_t) - M(u_0 slice)|
    double min_second_difference = 0.0;
    double minimizer = 0.0;           // golden-section minimiser of F
    double minimum = 0.0;
    bool grows_at_both_ends = false;  // F increasing away from the minimiser at the scan ends
};

/// Samples M, F and E along the orbit on [t_lo, t_hi] and locates the
/// minimiser of F by golden-section search.
OrbitScan orbit_flatness_and_F(const OrbitPath& path, const MetricDensity& mu, double t_lo, double t_hi,
                               std::size_t samples);

}  // namespace kenergy
