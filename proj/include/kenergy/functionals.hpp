#pragma once

// Energy functionals on the space of torus-invariant potentials of the sphere.
//
// Complex-side quantities take the Kähler potential relative to the round
// metric, phi = psi - psi_0, sampled on the s-grid. Under the Legendre
// dictionary an additive constant on u is the opposite constant on phi.

#include <functional>
#include <span>
#include <vector>

#include "kenergy/radial_geometry.hpp"

namespace kenergy {

struct FunctionalReport {
    double E = 0.0;
    double E_ric = 0.0;
    double entropy = 0.0;
    double mabuchi = 0.0;
    double calabi = 0.0;
    double F = 0.0;
};

/// E(phi) = int phi (psi'' + psi_0'') ds.
double energy_E(std::span<const double> u_rel, const RadialPotential& psi);

/// int phi alpha ds for a density alpha on the same grid (tails included).
double energy_E_alpha(std::span<const double> u_rel, const MetricDensity& alpha);

/// Ricci form of the round metric as a density: 2 psi_0''.
MetricDensity reference_ricci_density(const UniformGrid& grid);

struct EntropyValue {
    double value = 0.0;
    /// Bound on the part of the integral outside the window (already included
    /// in value through the asymptotic end values).
    double tail_bound = 0.0;
    /// Set when psi'' vanishes on a stretch of the window.
    bool infinite = false;
};

/// int log(psi''/psi_0'') psi'' ds.
EntropyValue entropy(const RadialPotential& psi);

/// M = E - E^{Ric} + H (the average scalar curvature is 2).
double mabuchi(const SymplecticPotential& u);
double mabuchi(const RadialPotential& psi);

/// int (R - 2)^2 dx.
double calabi_energy(const SymplecticPotential& u);

/// F(u) = int phi mu - E(phi)/2, invariant under constants. mu must have unit mass.
double f_functional(const SymplecticPotential& u, const MetricDensity& mu);
double f_functional(const RadialPotential& psi, const MetricDensity& mu);

/// sqrt(int v^2 dx) for v sampled on the x-grid (moment coordinate).
double mabuchi_norm(std::span<const double> v, const SymplecticPotential& u);

/// sqrt(int (u1 - u0)^2 dx); the speed of the linear geodesic.
double geodesic_distance(const SymplecticPotential& u0, const SymplecticPotential& u1);

/// u + c with c chosen so that E = 0.
SymplecticPotential energy_normalized(const SymplecticPotential& u);

/// int w(x) (R(x) - 2) dx for w given on the x-grid; equals dM/dt along a path
/// with symplectic velocity w.
double mabuchi_derivative(const SymplecticPotential& u, std::span<const double> velocity);

using PotentialPath = std::function<SymplecticPotential(double)>;

/// |dM/dt - int u_dot (R - 2) dx| at t, both sides from the path itself
/// (centred differences with step dt).
double gradient_identity_check(const PotentialPath& path, double t, double dt = 1e-4);

FunctionalReport functional_report(const SymplecticPotential& u, const MetricDensity& mu);

}  // namespace kenergy
