#pragma once

// Weighted Bergman kernels on the unit disc for radial weights, and families
// of weights over a parameter disc.
//
// For a radial weight phi the monomials are orthogonal for the weight
// e^{-k phi} against i dz ^ dz-bar = 2 dA, so
//     K_{k phi}(z) = sum_m |z|^{2m} / c_m,   c_m = 4 pi int_0^1 r^{2m+1} e^{-k phi(r)} dr.
// A weight radial part + h with h pluriharmonic in z has
// log K = log K_radial + k h, which covers the translated families used here.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kenergy/geodesics.hpp"
#include "kenergy/numerics.hpp"

namespace kenergy {

enum class Smoothness { Smooth, LipschitzSecond };

class RadialWeight {
public:
    using Profile = std::function<double(double)>;

    /// `value` is phi as a function of r = |z|; `ddc` optionally gives
    /// phi_{z z-bar}(r) in closed form (otherwise a five-point Laplacian is used).
    explicit RadialWeight(Profile value, Smoothness smoothness = Smoothness::Smooth, Profile ddc = {});

    /// phi = sum_j b_j r^{2j}.
    static RadialWeight polynomial(std::vector<double> coeffs);

    double operator()(double r) const { return value_(r); }
    /// phi_{z z-bar} = (phi'' + phi'/r) / 4.
    double ddc_density(double r) const;
    Smoothness smoothness() const noexcept { return smoothness_; }

    /// (r phi')' >= -tol at the grid points.
    bool subharmonic_on(const UniformGrid& r_grid, double tol = 1e-12) const;

private:
    Profile value_;
    Profile ddc_;
    Smoothness smoothness_;
};

class BergmanKernel {
public:
    double k() const noexcept { return k_; }
    std::size_t max_order() const noexcept { return log_c_.size() - 1; }
    double log_coefficient(std::size_t m) const { return log_c_.at(m); }
    double coefficient(std::size_t m) const;

private:
    friend BergmanKernel bergman_coefficients(const RadialWeight&, double, std::size_t);
    double k_ = 0.0;
    std::vector<double> log_c_;
};

/// c_0 .. c_{M_max} by adaptive Gauss-Kronrod quadrature (relative tolerance
/// 1e-12 per coefficient) after scaling out the peak of the integrand.
BergmanKernel bergman_coefficients(const RadialWeight& phi, double k, std::size_t max_order);

struct KernelValue {
    double log_K = 0.0;
    /// Bound on the omitted terms relative to the truncated sum.
    double tail_bound = 0.0;
};

/// log K at radius r with the geometric tail bound from log-convexity of c_m.
KernelValue log_bergman_kernel(const BergmanKernel& kernel, double r);

/// Smallest order, doubling from 32, whose tail bound at r_max is below tol.
BergmanKernel certified_kernel(const RadialWeight& phi, double k, double r_max, double tol = 1e-12);

/// B = K e^{-k phi} at radius r (log-domain).
double bergman_B(const BergmanKernel& kernel, const RadialWeight& phi, double r);

struct DensityLimit {
    std::vector<double> k;
    std::vector<double> scaled_B;  // B / k
    double limit = 0.0;            // phi_{z z-bar} / (2 pi)
    std::vector<double> gaps;
};

/// |B_{k phi}(r)/k - phi_{z z-bar}(r)/(2 pi)| for each k.
DensityLimit density_limit_check(const RadialWeight& phi, double r, const std::vector<double>& k_list);

/// Square of parameter samples centre + half_width * (i, j) / ((n-1)/2).
struct ParameterSquare {
    std::complex<double> centre;
    double half_width = 0.0;
    std::size_t n = 3;

    std::vector<std::complex<double>> points() const;
};

class WeightFamily {
public:
    using RadialPart = std::function<RadialWeight(std::complex<double>)>;
    /// Pluriharmonic in z for fixed tau.
    using Twist = std::function<double(std::complex<double>, std::complex<double>)>;

    WeightFamily(std::string name, RadialPart radial, Twist twist, ParameterSquare tau, ParameterSquare z);

    const std::string& name() const noexcept { return name_; }
    const ParameterSquare& tau_square() const noexcept { return tau_; }
    const ParameterSquare& z_square() const noexcept { return z_; }

    double phi(std::complex<double> tau, std::complex<double> z) const;
    double log_K(std::complex<double> tau, std::complex<double> z, double k) const;

    /// Phi(tau, z) = phi(|z|) for all tau.
    static WeightFamily tau_independent(RadialWeight phi, ParameterSquare tau, ParameterSquare z);
    /// Phi = |z - tau|^2.
    static WeightFamily translated_quadratic(ParameterSquare tau, ParameterSquare z);
    /// Phi = |z|^2 + Re(tau) |z|^4 (+ |tau|^2 when augmented).
    static WeightFamily quartic(bool augmented, ParameterSquare tau, ParameterSquare z);
    /// Phi(tau, z) = psi_{Re tau}(log |z|^2) for the geodesic path.
    static WeightFamily geodesic_localization(const GeodesicPath& path, ParameterSquare tau, ParameterSquare z);

private:
    struct Cache;

    std::string name_;
    RadialPart radial_;
    Twist twist_;
    ParameterSquare tau_;
    ParameterSquare z_;
    std::shared_ptr<Cache> cache_;
};

/// Complex Hessian of a function of (tau, z) by fourth-order differences in
/// the four real variables; entries (tau tau-bar, tau z-bar, z z-bar).
struct ComplexHessian {
    double tt = 0.0;
    std::complex<double> tz;
    double zz = 0.0;

    double min_eigenvalue() const;
    double max_abs_eigenvalue() const;
    double determinant() const { return tt * zz - std::norm(tz); }
};

ComplexHessian complex_hessian(const std::function<double(std::complex<double>, std::complex<double>)>& f,
                               std::complex<double> tau, std::complex<double> z, double step);

struct FamilyReport {
    double min_value = 0.0;
    std::size_t node_count = 0;
    double excluded_fraction = 0.0;
    double scale = 1.0;
    /// False when the family failed its precondition; min_value is then not
    /// a statement about the kernel.
    bool certified = false;
    std::string note;
};

inline constexpr double kHessianStep = 1e-2;

/// Minimum eigenvalue of the complex Hessian of log K_{k Phi_tau}(z) over the
/// product grid, after certifying that Phi itself is jointly plurisubharmonic.
FamilyReport log_psh_check(const WeightFamily& family, double k, double step = kHessianStep);

/// Minimum over the grid of T_k = A_{tt} P_{zz} + A_{zz} P_{tt} - 2 Re(A_{tz} conj(P_{tz})),
/// with A the complex Hessian of log B_{k Phi} and P that of Phi. Requires
/// Phi jointly plurisubharmonic with vanishing Monge-Ampère determinant.
FamilyReport tk_positivity(const WeightFamily& family, double k, double step = kHessianStep);

}  // namespace kenergy
