#include "kenergy/functionals.hpp"

#include <cmath>

#include "kenergy/error.hpp"

namespace kenergy {

namespace {

constexpr double kEntropyFloor = 1e-14;

// int_0^1 F(x, w(x)) dx with w the C^3 interpolant of node values; four-point
// Gauss-Legendre per cell.
template <class Integrand>
double integrate_cells(const UniformGrid& nodes, std::span<const double> w, Integrand&& integrand) {
    const HermiteInterpolant interp(nodes, w);
    const auto rule = composite_gauss_legendre(nodes.lo, nodes.hi, static_cast<int>(nodes.size - 1), 4);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i];
        acc += rule.weights[i] * integrand(x, interp.value(x));
    }
    return acc;
}

void check_shape(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) throw InputError(std::string(what) + ": grid function has the wrong size");
}

}  // namespace

double energy_E(std::span<const double> u_rel, const RadialPotential& psi) {
    check_shape(u_rel, psi.grid().size, "energy_E");
    const auto rho = psi.density();
    const auto rho0 = RadialPotential::reference(psi.grid()).density();
    for (double v : u_rel) {
        if (!std::isfinite(v)) throw InputError("energy_E: relative potential is not bounded");
    }
    return integrate_X(u_rel, rho) + integrate_X(u_rel, rho0);
}

double energy_E_alpha(std::span<const double> u_rel, const MetricDensity& alpha) {
    check_shape(u_rel, alpha.grid.size, "energy_E_alpha");
    return integrate_X(u_rel, alpha);
}

MetricDensity reference_ricci_density(const UniformGrid& grid) {
    MetricDensity r;
    r.grid = grid;
    r.values.resize(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) r.values[i] = 2.0 * reference_density(grid[i]);
    r.tail_left = 2.0 * sigmoid(grid.lo);
    r.tail_right = 2.0 * sigmoid(-grid.hi);
    return r;
}

EntropyValue entropy(const RadialPotential& psi) {
    const auto& grid = psi.grid();
    const auto d2 = psi.second_derivative();
    std::vector<double> integrand(grid.size, 0.0);
    std::vector<double> log_ratio(grid.size, 0.0);
    EntropyValue out;
    for (std::size_t i = 0; i < grid.size; ++i) {
        if (d2[i] < 0.0) throw InvalidPotential("entropy: negative density", i);
        if (d2[i] <= kEntropyFloor) {
            if (i > 0 && i + 1 < grid.size) out.infinite = true;
            continue;
        }
        const double s = grid[i];
        // log psi_0'' = -softplus(-s) - softplus(s), stable on the whole window.
        log_ratio[i] = std::log(d2[i]) + softplus(-s) + softplus(s);
        integrand[i] = log_ratio[i] * d2[i];
    }
    const auto rho = psi.density();
    // Beyond the window the ratio converges exponentially to its end value.
    const double tails = log_ratio.front() * rho.tail_left + log_ratio.back() * rho.tail_right;
    out.value = trapezoid(integrand, grid.step()) + tails;
    out.tail_bound = std::abs(log_ratio.front()) * rho.tail_left + std::abs(log_ratio.back()) * rho.tail_right;
    return out;
}

double mabuchi(const RadialPotential& psi) {
    const auto phi = psi.relative_potential();
    const double e = energy_E(phi, psi);
    const double e_ric = energy_E_alpha(phi, reference_ricci_density(psi.grid()));
    const auto h = entropy(psi);
    if (h.infinite) throw DegenerateMetric("mabuchi: entropy is infinite");
    return e - e_ric + h.value;
}

double mabuchi(const SymplecticPotential& u) { return mabuchi(legendre_to_s(u)); }

double calabi_energy(const SymplecticPotential& u) {
    const auto& nodes = u.nodes();
    const auto rule = composite_gauss_legendre(nodes.lo, nodes.hi, static_cast<int>(nodes.size - 1), 4);
    return integrate(rule, [&](double x) {
        const double r = u.scalar_curvature_at(x) - kAverageScalarCurvature;
        return r * r;
    });
}

double f_functional(const RadialPotential& psi, const MetricDensity& mu) {
    const double mass = total_mass(mu);
    if (std::abs(mass - 1.0) > 1e-8) throw InputError("f_functional: mu does not have unit mass");
    if (!(mu.grid == psi.grid())) throw InputError("f_functional: mu lives on a different grid");
    const auto phi = psi.relative_potential();
    return integrate_X(phi, mu) - 0.5 * energy_E(phi, psi);
}

double f_functional(const SymplecticPotential& u, const MetricDensity& mu) {
    return f_functional(legendre_to_s(u, mu.grid), mu);
}

double mabuchi_norm(std::span<const double> v, const SymplecticPotential& u) {
    check_shape(v, u.nodes().size, "mabuchi_norm");
    return std::sqrt(integrate_cells(u.nodes(), v, [](double, double w) { return w * w; }));
}

double geodesic_distance(const SymplecticPotential& u0, const SymplecticPotential& u1) {
    if (!(u0.nodes() == u1.nodes())) throw InvalidPotential("endpoints live on different grids");
    std::vector<double> diff(u0.nodes().size);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u1.f_values()[i] - u0.f_values()[i];
    return mabuchi_norm(diff, u0);
}

SymplecticPotential energy_normalized(const SymplecticPotential& u) {
    const auto psi = legendre_to_s(u);
    const double e = energy_E(psi.relative_potential(), psi);
    // u + c shifts phi by -c, hence E by -2c.
    return u.plus_affine(0.5 * e, 0.0);
}

double mabuchi_derivative(const SymplecticPotential& u, std::span<const double> velocity) {
    check_shape(velocity, u.nodes().size, "mabuchi_derivative");
    return integrate_cells(u.nodes(), velocity, [&](double x, double w) {
        return w * (u.scalar_curvature_at(x) - kAverageScalarCurvature);
    });
}

double gradient_identity_check(const PotentialPath& path, double t, double dt) {
    const auto minus = path(t - dt);
    const auto plus = path(t + dt);
    const auto mid = path(t);
    const double dm = (mabuchi(plus) - mabuchi(minus)) / (2.0 * dt);
    std::vector<double> velocity(mid.nodes().size);
    for (std::size_t i = 0; i < velocity.size(); ++i) {
        velocity[i] = (plus.f_values()[i] - minus.f_values()[i]) / (2.0 * dt);
    }
    return std::abs(dm - mabuchi_derivative(mid, velocity));
}

FunctionalReport functional_report(const SymplecticPotential& u, const MetricDensity& mu) {
    const auto psi = legendre_to_s(u, mu.grid);
    const auto phi = psi.relative_potential();
    FunctionalReport r;
    r.E = energy_E(phi, psi);
    r.E_ric = energy_E_alpha(phi, reference_ricci_density(psi.grid()));
    r.entropy = entropy(psi).value;
    r.mabuchi = r.E - r.E_ric + r.entropy;
    r.calabi = calabi_energy(u);
    r.F = f_functional(psi, mu);
    return r;
}

}  // namespace kenergy
