#include "kenergy/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kenergy/error.hpp"
#include "kenergy/functionals.hpp"

namespace kenergy {

GeodesicPath::GeodesicPath(SymplecticPotential u0, SymplecticPotential u1, std::size_t steps)
    : u0_(std::move(u0)), u1_(std::move(u1)), steps_(steps) {
    if (!(u0_.nodes() == u1_.nodes())) throw InvalidPotential("endpoints live on different grids");
    if (steps_ < 4) throw InputError("geodesic path needs at least four t-steps");
}

std::vector<double> GeodesicPath::velocity() const {
    std::vector<double> v(u0_.nodes().size);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u1_.f_values()[i] - u0_.f_values()[i];
    return v;
}

GeodesicPath weak_geodesic(const SymplecticPotential& u0, const SymplecticPotential& u1,
                           std::size_t steps) {
    return GeodesicPath(u0, u1, steps);
}

ComplexifiedSolution complexify(const GeodesicPath& path, const UniformGrid& s_grid) {
    ComplexifiedSolution sol;
    sol.t_grid = path.t_grid();
    sol.s_grid = s_grid;
    sol.slices.reserve(sol.t_grid.size);
    for (std::size_t j = 0; j < sol.t_grid.size; ++j) {
        sol.slices.push_back(legendre_to_s(path.slice(sol.t_grid[j]), s_grid));
    }
    return sol;
}

namespace {

struct TimeDerivatives {
    // Indexed [t][s].
    std::vector<std::vector<double>> psi_tt;
    std::vector<std::vector<double>> psi_ts;
};

TimeDerivatives time_derivatives(const ComplexifiedSolution& sol) {
    const std::size_t nt = sol.t_grid.size;
    const std::size_t ns = sol.s_grid.size;
    const double ht = sol.t_grid.step();
    TimeDerivatives d;
    d.psi_tt.assign(nt, std::vector<double>(ns));
    d.psi_ts.assign(nt, std::vector<double>(ns));
    std::vector<double> column(nt);
    std::vector<double> slope_column(nt);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            column[j] = sol.slices[j].values()[i];
            slope_column[j] = sol.slices[j].slopes()[i];
        }
        const auto tt = differentiate(column, ht, 2, 5);
        const auto ts = differentiate(slope_column, ht, 1, 5);
        for (std::size_t j = 0; j < nt; ++j) {
            d.psi_tt[j][i] = tt[j];
            d.psi_ts[j][i] = ts[j];
        }
    }
    return d;
}

double min_eigenvalue_2x2(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    return mean - radius;
}

}  // namespace

double joint_convexity_min_eigenvalue(const ComplexifiedSolution& sol) {
    const auto d = time_derivatives(sol);
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < sol.t_grid.size; ++j) {
        const auto d2 = sol.slices[j].second_derivative();
        for (std::size_t i = 0; i < sol.s_grid.size; ++i) {
            const double a = d.psi_tt[j][i];
            const double b = d.psi_ts[j][i];
            const double c = d2[i];
            scale = std::max({scale, std::abs(a), std::abs(b), std::abs(c)});
            worst = std::min(worst, min_eigenvalue_2x2(a, b, c));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

ResidualReport hrma_residual(const ComplexifiedSolution& sol) {
    const auto d = time_derivatives(sol);
    const std::size_t nt = sol.t_grid.size;
    const std::size_t ns = sol.s_grid.size;
    ResidualReport r;
    r.by_time.assign(nt, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 1; j + 1 < nt; ++j) {
        const auto d2 = sol.slices[j].second_derivative();
        double sup = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            if (d2[i] <= kDegenerateDensity) {
                ++r.excluded;
                continue;
            }
            const double det = d.psi_tt[j][i] * d2[i] - d.psi_ts[j][i] * d.psi_ts[j][i];
            sup = std::max(sup, std::abs(det));
        }
        r.by_time[j] = sup;
        r.value = std::max(r.value, sup);
    }
    r.excluded_measure = static_cast<double>(r.excluded) / static_cast<double>((nt - 2) * ns);
    return r;
}

ResidualReport hrma_residual(const GeodesicPath& path, const UniformGrid& s_grid) {
    return hrma_residual(complexify(path, s_grid));
}

ResidualReport geodesic_ode_residual(const ComplexifiedSolution& sol) {
    const std::size_t nt = sol.t_grid.size;
    const std::size_t ns = sol.s_grid.size;
    const double ht = sol.t_grid.step();
    const double hs = sol.s_grid.step();
    ResidualReport r;
    r.by_time.assign(nt, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> row(ns);
    double total = 0.0;
    for (std::size_t j = 1; j + 1 < nt; ++j) {
        const auto d2 = sol.slices[j].second_derivative();
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 1; i + 1 < ns; ++i) {
            if (d2[i] <= kDegenerateDensity) {
                ++r.excluded;
                continue;
            }
            const double phi_tt = (sol.psi(j + 1, i) - 2.0 * sol.psi(j, i) + sol.psi(j - 1, i)) / (ht * ht);
            const double phi_ts = (sol.psi(j + 1, i + 1) - sol.psi(j + 1, i - 1) - sol.psi(j - 1, i + 1) +
                                   sol.psi(j - 1, i - 1)) /
                                  (4.0 * ht * hs);
            row[i] = std::abs(phi_tt - phi_ts * phi_ts / d2[i]) * d2[i];
        }
        r.by_time[j] = trapezoid(row, hs);
        total += r.by_time[j] * ht;
    }
    r.value = total;
    r.excluded_measure = static_cast<double>(r.excluded) / static_cast<double>((nt - 2) * (ns - 2));
    return r;
}

ResidualReport geodesic_ode_residual(const GeodesicPath& path, const UniformGrid& s_grid) {
    return geodesic_ode_residual(complexify(path, s_grid));
}

std::vector<double> mabuchi_along(const GeodesicPath& path) {
    const auto grid = path.t_grid();
    std::vector<double> m(grid.size);
    for (std::size_t j = 0; j < grid.size; ++j) m[j] = mabuchi(path.slice(grid[j]));
    return m;
}

FiberIntegral second_variation_fiber_integral(const GeodesicPath& path, double t,
                                              const UniformGrid& s_grid, double dt) {
    constexpr int kHalf = 4;
    if (!(t > 0.0 && t < 1.0)) throw InputError("second variation needs an interior t");
    // Nine nodes t0 + k dt, shifted to stay inside [0, 1].
    double t0 = t - kHalf * dt;
    t0 = std::clamp(t0, 0.0, 1.0 - 2 * kHalf * dt);
    std::vector<double> offsets(2 * kHalf + 1);
    std::vector<SymplecticPotential> slices;
    for (int k = 0; k <= 2 * kHalf; ++k) {
        const double tk = t0 + k * dt;
        offsets[k] = (tk - t) / dt;
        slices.push_back(path.slice(tk));
    }
    const auto w = fornberg_weights(0.0, offsets, 2);
    const auto centre = path.slice(t);
    const auto v = path.velocity();
    const HermiteInterpolant velocity(centre.nodes(), v);

    FiberIntegral out;
    out.integrand.assign(s_grid.size, 0.0);
    double min_t = 0.0;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < s_grid.size; ++i) {
        const double s = s_grid[i];
        double w_tt = 0.0;
        double ws_t = 0.0;
        for (std::size_t k = 0; k < slices.size(); ++k) {
            const auto p = slices[k].dual_at(s);
            const double log_g = std::log(std::max(p.density, 1e-300));
            const double dg = slices[k].metric_jet(p.x).dg;
            w_tt += w[2][k] * log_g;
            ws_t += w[1][k] * dg;
        }
        w_tt /= dt * dt;
        ws_t /= dt;
        const auto p = centre.dual_at(s);
        const double g = p.density;
        if (g <= kDegenerateDensity) {
            ++out.excluded;
            continue;
        }
        const auto jet = centre.metric_jet(p.x);
        const double w_ss = jet.d2g * g;
        const double dv = velocity.derivative(p.x, 1);
        const double phi_ss = g;
        const double phi_ts = -g * dv;
        const double phi_tt = g * dv * dv;
        const double value = w_tt * phi_ss + w_ss * phi_tt - 2.0 * ws_t * phi_ts;
        out.integrand[i] = value;
        min_t = std::min(min_t, value);
        max_abs = std::max(max_abs, std::abs(value));
    }
    out.value = trapezoid(out.integrand, s_grid.step());
    out.min_integrand = min_t;
    out.scale = 1.0 + max_abs;
    return out;
}

}  // namespace kenergy
