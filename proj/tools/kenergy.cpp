// kenergy: command-line driver for the experiment suites.
//
//   kenergy geodesic|convexity|chen|bergman|lichnerowicz|orbit|uniqueness
//           --config <file> [--out <dir>] [--seed <n>]
//
// Exit status: 0 when every assertion holds, 1 when some assertion fails,
// 2 on usage, configuration or input errors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kenergy/bergman.hpp"
#include "kenergy/error.hpp"
#include "kenergy/experiments.hpp"
#include "kenergy/functionals.hpp"
#include "kenergy/geodesics.hpp"
#include "kenergy/radial_geometry.hpp"
#include "kenergy/symmetry.hpp"

using namespace kenergy;
namespace fs = std::filesystem;

namespace {

constexpr double kBergmanFamilyK = 50.0;
constexpr double kGaussBonnetTol = 1e-6;
constexpr double kMassTol = 1e-8;

class Summary {
public:
    Summary(std::string command, std::string claim) : command_(std::move(command)), claim_(std::move(claim)) {}

    void check(const std::string& name, bool ok, const std::string& detail) {
        lines_.push_back((ok ? "PASS " : "FAIL ") + name + ": " + detail);
        if (!ok) ++failures_;
    }
    void note(const std::string& text) { lines_.push_back("NOTE " + text); }

    /// Gauss-Bonnet and total mass for one potential.
    void audit(const SymplecticPotential& u, const UniformGrid& s_grid) {
        gb_ = std::max(gb_, std::abs(total_scalar_curvature(u) - 2.0));
        mass_ = std::max(mass_, std::abs(total_mass(legendre_to_s(u, s_grid).density()) - 1.0));
        ++audited_;
    }

    int write(const fs::path& dir) {
        if (audited_ > 0) {
            check("topology", gb_ <= kGaussBonnetTol && mass_ <= kMassTol,
                  std::to_string(audited_) + " potentials, max |int R - 2| = " + format_number(gb_) +
                      ", max |int rho - 1| = " + format_number(mass_));
        }
        std::ofstream out(dir / "summary.txt");
        if (!out) throw InputError("cannot write " + (dir / "summary.txt").string());
        out << "kenergy " << command_ << "\n";
        out << "claim: " << claim_ << "\n";
        for (const auto& l : lines_) out << l << "\n";
        out << (failures_ == 0 ? "RESULT PASS" : "RESULT FAIL (" + std::to_string(failures_) + " failed)") << "\n";
        for (const auto& l : lines_) std::cout << l << "\n";
        return failures_ == 0 ? 0 : 1;
    }

private:
    std::string command_;
    std::string claim_;
    std::vector<std::string> lines_;
    int failures_ = 0;
    double gb_ = 0.0;
    double mass_ = 0.0;
    std::size_t audited_ = 0;
};

std::string fmt(double v) { return format_number(v); }

double min_second_difference(const std::vector<double>& m, double& scale) {
    double worst = std::numeric_limits<double>::infinity();
    scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    for (std::size_t j = 1; j + 1 < m.size(); ++j) worst = std::min(worst, m[j - 1] - 2.0 * m[j] + m[j + 1]);
    return worst;
}

std::pair<SymplecticPotential, SymplecticPotential> endpoints(const ExperimentConfig& c) {
    if (!c.u0_file.empty()) return {read_potential_csv(c.u0_file), read_potential_csv(c.u1_file)};
    PotentialEnsemble ensemble(c.seed, c.nx);
    auto u0 = ensemble.next();
    auto u1 = ensemble.next();
    return {u0, u1};
}

// ---------------------------------------------------------------------------

int cmd_geodesic(const ExperimentConfig& c) {
    Summary sum("geodesic", "the straight symplectic segment is a weak geodesic and M is convex along it");
    const auto grid = c.s_grid();
    const auto [u0, u1] = endpoints(c);
    const auto path = weak_geodesic(u0, u1, c.steps);
    const auto sol = complexify(path, grid);
    const auto hrma = hrma_residual(sol);
    const auto ode = geodesic_ode_residual(sol);
    const auto mu = RadialPotential::reference(grid).density();
    const auto tg = path.t_grid();
    const auto v = path.velocity();

    std::vector<std::vector<double>> rows;
    std::vector<double> m(tg.size);
    for (std::size_t j = 0; j < tg.size; ++j) {
        const auto u = path.slice(tg[j]);
        const auto r = functional_report(u, mu);
        m[j] = r.mabuchi;
        rows.push_back({tg[j], r.mabuchi, r.E, r.entropy, mabuchi_norm(v, u), hrma.by_time[j], ode.by_time[j]});
        sum.audit(u, grid);
    }
    write_csv(c.out / "geodesic.csv", {"t", "mabuchi", "E", "entropy", "speed", "hrma_sup", "ode_l1"}, rows);

    std::vector<std::vector<double>> report_rows;
    for (const auto* u : {&u0, &u1}) {
        const auto r = functional_report(*u, mu);
        report_rows.push_back({r.E, r.E_ric, r.entropy, r.mabuchi, r.calabi, r.F});
    }
    write_csv(c.out / "report.csv", {"E", "E_ric", "entropy", "mabuchi", "calabi", "F"}, report_rows);

    double scale = 0.0;
    const double second = min_second_difference(m, scale);
    sum.check("convexity", second >= -c.convexity_tol * (1.0 + scale),
              "min second difference of M = " + fmt(second));
    sum.check("hrma", hrma.value <= c.hrma_tol,
              "sup |det Hess Psi| = " + fmt(hrma.value) + ", excluded nodes " + std::to_string(hrma.excluded));
    sum.check("geodesic_ode", ode.value <= c.ode_tol, "L1 residual = " + fmt(ode.value));
    const double joint = joint_convexity_min_eigenvalue(sol);
    sum.check("joint_convexity", joint >= -c.joint_tol, "min normalised eigenvalue = " + fmt(joint));
    if (c.svg) {
        write_svg(c.out / "geodesic.svg", "K-energy along the geodesic", "t", "M", {{"M(u_t)", tg.points(), m}});
    }
    return sum.write(c.out);
}

int cmd_convexity(const ExperimentConfig& c) {
    Summary sum("convexity", "M is convex along weak geodesics");
    const auto grid = c.s_grid();
    PotentialEnsemble ensemble(c.seed, c.nx);
    std::vector<std::vector<double>> table;
    std::size_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<SvgSeries> series;
    for (std::size_t p = 0; p < c.pairs; ++p) {
        const auto u0 = ensemble.next();
        const auto u1 = ensemble.next();
        const auto path = weak_geodesic(u0, u1, c.steps);
        const auto m = mabuchi_along(path);
        const auto tg = path.t_grid();
        std::vector<std::vector<double>> rows;
        for (std::size_t j = 0; j < tg.size; ++j) rows.push_back({tg[j], m[j]});
        char name[64];
        std::snprintf(name, sizeof name, "convexity_path_%02zu.csv", p);
        write_csv(c.out / name, {"t", "mabuchi"}, rows);
        double scale = 0.0;
        const double second = min_second_difference(m, scale);
        const double threshold = -c.convexity_tol * (1.0 + scale);
        if (second < threshold) ++violations;
        worst = std::min(worst, second);
        table.push_back({static_cast<double>(p), second, threshold, m.front(), m.back()});
        sum.audit(u0, grid);
        sum.audit(u1, grid);
        if (p < 6) series.push_back({"pair " + std::to_string(p), tg.points(), m});
    }
    write_csv(c.out / "convexity.csv", {"pair", "min_second_difference", "threshold", "mabuchi_0", "mabuchi_1"}, table);
    sum.check("convexity", violations == 0,
              std::to_string(violations) + " of " + std::to_string(c.pairs) +
                  " paths violate; min second difference = " + fmt(worst));
    if (c.svg) write_svg(c.out / "convexity.svg", "K-energy along random geodesics", "t", "M", series);
    return sum.write(c.out);
}

int cmd_chen(const ExperimentConfig& c) {
    Summary sum("chen", "M(u1) - M(u0) >= -d(u0, u1) sqrt(Calabi(u0)); the round metric minimises M");
    const auto grid = c.s_grid();
    PotentialEnsemble ensemble(c.seed, c.nx);
    const auto round = SymplecticPotential::round(c.nx);
    std::vector<std::vector<double>> rows;
    double worst_slack = std::numeric_limits<double>::infinity();
    double worst_round = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < c.pairs; ++p) {
        const auto u0 = ensemble.next();
        const auto u1 = ensemble.next();
        const double m0 = mabuchi(u0);
        const double m1 = mabuchi(u1);
        const double d = geodesic_distance(u0, u1);
        const double cal = calabi_energy(u0);
        const double slack = m1 - m0 + d * std::sqrt(cal);
        worst_slack = std::min(worst_slack, slack);
        worst_round = std::min(worst_round, m1);
        rows.push_back({static_cast<double>(p), m0, m1, d, cal, slack});
        sum.audit(u0, grid);
        sum.audit(u1, grid);
    }
    write_csv(c.out / "chen.csv", {"pair", "mabuchi_0", "mabuchi_1", "distance", "calabi_0", "slack"}, rows);
    const double m_round = mabuchi(round);
    sum.audit(round, grid);
    sum.check("chen_inequality", worst_slack >= -c.chen_tol, "min slack = " + fmt(worst_slack));
    sum.check("round_minimises", worst_round >= -c.chen_tol, "min M(u1) = " + fmt(worst_round));
    sum.check("round_value", std::abs(m_round) <= 1e-8, "M(round) = " + fmt(m_round));
    return sum.write(c.out);
}

int cmd_bergman(const ExperimentConfig& c) {
    Summary sum("bergman", "k^-1 B_k converges to the curvature density; log K is plurisubharmonic in families");
    struct Named {
        std::string name;
        RadialWeight phi;
    };
    const std::vector<Named> weights{
        {"quadratic", RadialWeight::polynomial({0.0, 1.0})},
        {"quartic", RadialWeight::polynomial({0.0, 1.0, 1.0})},
        {"lipschitz", RadialWeight([](double r) { return r * r + std::pow(std::max(r - 0.2, 0.0), 3); },
                                   Smoothness::LipschitzSecond)},
    };
    std::vector<SvgSeries> series;
    for (const auto& w : weights) {
        std::vector<std::vector<double>> rows;
        for (double z : c.z_list) {
            const auto lim = density_limit_check(w.phi, z, c.k_list);
            bool decreasing = true;
            for (std::size_t i = 0; i < lim.k.size(); ++i) {
                rows.push_back({lim.k[i], z, lim.scaled_B[i] * lim.k[i], lim.limit, lim.gaps[i]});
                if (i > 0 && !(lim.gaps[i] < lim.gaps[i - 1] || lim.gaps[i] == 0.0)) decreasing = false;
            }
            if (w.name != "quadratic" || z != 0.0) {
                sum.check("gap_decay_" + w.name + "_z" + fmt(z), decreasing,
                          "gap at k = " + fmt(lim.k.back()) + " is " + fmt(lim.gaps.back()));
            }
            series.push_back({w.name + " z=" + fmt(z), lim.k, lim.scaled_B});
        }
        write_csv(c.out / ("bergman_" + w.name + ".csv"), {"k", "z", "B", "limit_density", "gap"}, rows);
    }

    // Closed form for phi = |z|^2 at the origin: B = k / (2 pi (1 - e^-k)).
    const double k_max = *std::max_element(c.k_list.begin(), c.k_list.end());
    const auto kernel = certified_kernel(weights[0].phi, k_max, 0.0);
    const double b0 = bergman_B(kernel, weights[0].phi, 0.0);
    const double exact = k_max / (2.0 * std::numbers::pi * (1.0 - std::exp(-k_max)));
    sum.check("closed_form", std::abs(b0 - exact) <= 1e-10 * exact, "B = " + fmt(b0) + ", exact " + fmt(exact));
    const double gap = std::abs(b0 / k_max - 1.0 / (2.0 * std::numbers::pi));
    sum.check("density_limit", gap <= 0.02 / (2.0 * std::numbers::pi),
              "|B/k - 1/(2 pi)| = " + fmt(gap) + " at k = " + fmt(k_max));

    const ParameterSquare tau{{0.0, 0.0}, 0.1, 3};
    const ParameterSquare z{{0.3, 0.0}, 0.15, 3};
    const ParameterSquare tau_geo{{0.5, 0.0}, 0.1, 3};
    PotentialEnsemble ensemble(c.seed, c.nx);
    const auto u0 = ensemble.next();
    const auto u1 = ensemble.next();
    const auto path = weak_geodesic(u0, u1, c.steps);
    const std::vector<WeightFamily> families{
        WeightFamily::translated_quadratic(tau, z),
        WeightFamily::tau_independent(weights[1].phi, tau, z),
        WeightFamily::geodesic_localization(path, tau_geo, z),
    };
    auto family_csv = [&](const std::string& name, const FamilyReport& r) {
        write_csv(c.out / ("family_" + name + ".csv"), {"min_eig", "node_count", "excluded_fraction"},
                  {{r.min_value, static_cast<double>(r.node_count), r.excluded_fraction}});
    };
    for (const auto& f : families) {
        const auto psh = log_psh_check(f, kBergmanFamilyK);
        const auto tk = tk_positivity(f, kBergmanFamilyK);
        family_csv(f.name() + "_logK", psh);
        family_csv(f.name() + "_Tk", tk);
        sum.check("log_psh_" + f.name(), psh.certified && psh.min_value >= -1e-6 * psh.scale,
                  "min eigenvalue " + fmt(psh.min_value) + ", scale " + fmt(psh.scale));
        sum.check("tk_" + f.name(), tk.certified && tk.min_value >= -1e-4 * tk.scale,
                  "min T_k " + fmt(tk.min_value) + ", scale " + fmt(tk.scale));
    }
    // The quartic weight |z|^2 + Re(tau)|z|^4 is not jointly plurisubharmonic;
    // adding |tau|^2 repairs that, but the result does not solve Monge-Ampere,
    // so only log K positivity applies to it.
    const auto augmented = log_psh_check(WeightFamily::quartic(true, tau, z), kBergmanFamilyK);
    family_csv("quartic_augmented_logK", augmented);
    sum.check("log_psh_quartic_augmented", augmented.certified && augmented.min_value >= -1e-6 * augmented.scale,
              "min eigenvalue " + fmt(augmented.min_value) + ", scale " + fmt(augmented.scale));
    const auto plain = log_psh_check(WeightFamily::quartic(false, tau, z), kBergmanFamilyK);
    sum.note("quartic family without |tau|^2: " + (plain.certified ? "min eigenvalue " + fmt(plain.min_value) : plain.note));
    if (c.svg) write_svg(c.out / "bergman.svg", "Scaled Bergman density", "k", "B/k", series);
    return sum.write(c.out);
}

int cmd_lichnerowicz(const ExperimentConfig& c) {
    Summary sum("lichnerowicz", "at the round metric the kernel of D*D is the complex Hamiltonians of sl(2)");
    const auto round = SymplecticPotential::round(c.nx);
    const auto op = lichnerowicz_assemble(round, c.degree);
    std::vector<std::vector<double>> rows;
    SvgSeries stem{"eigenvalues", {}, {}};
    for (const auto& b : op.blocks) {
        for (Eigen::Index r = 0; r < b.eigenvalues.size(); ++r) {
            rows.push_back({static_cast<double>(b.m), static_cast<double>(r), b.eigenvalues(r)});
            stem.x.push_back(b.m + 0.04 * static_cast<double>(r));
            stem.y.push_back(b.eigenvalues(r));
        }
    }
    write_csv(c.out / "lichnerowicz.csv", {"mode_m", "eigenvalue_rank", "eigenvalue"}, rows);
    const auto dim = kernel_dimension(op);
    sum.check("kernel_dimension", dim == 4, "dim ker = " + std::to_string(dim));
    std::string stable = "stable";
    bool stable_ok = true;
    try {
        stable_kernel_dimension(round, c.degree);
    } catch (const ConvergenceError& e) {
        stable = e.what();
        stable_ok = false;
    }
    sum.check("kernel_stable", stable_ok, "degree " + std::to_string(c.degree) + " vs +2: " + stable);
    const double psd = op.min_eigenvalue() / op.max_eigenvalue();
    sum.check("psd", psd >= -1e-8, "min / max eigenvalue = " + fmt(psd));
    sum.check("real", op.realness_residual() <= 1e-8, "||L_m - L_-m|| = " + fmt(op.realness_residual()));
    sum.check("self_adjoint", op.symmetry_residual() <= 1e-8, "||L - L^T|| = " + fmt(op.symmetry_residual()));
    sum.audit(round, c.s_grid());
    if (c.svg) write_svg(c.out / "lichnerowicz.svg", "Spectrum by angular mode", "m", "eigenvalue", {stem}, true);
    return sum.write(c.out);
}

int cmd_orbit(const ExperimentConfig& c) {
    Summary sum("orbit", "rotation orbits are geodesics with Hamiltonian velocity; M is constant and F strictly convex");
    const auto grid = c.s_grid();
    const auto orbit = orbit_geodesic(SymplecticPotential::round(c.nx), c.orbit_strength);
    const auto mu = RadialPotential::reference(grid).density();
    const auto scan = orbit_flatness_and_F(orbit, mu, c.t_min, c.t_max, c.t_samples);
    // Residuals on a refinement of the scan grid with at most 1/steps per unit
    // time, converted from the path parameter in [0, 1] back to t.
    const double length = c.t_max - c.t_min;
    const auto per_sample = static_cast<std::size_t>(
        std::ceil(static_cast<double>(c.steps) * length / static_cast<double>(c.t_samples - 1)));
    const auto path = orbit.as_geodesic(c.t_min, c.t_max, (c.t_samples - 1) * per_sample);
    const auto sol = complexify(path, grid);
    auto hrma = hrma_residual(sol);
    auto ode = geodesic_ode_residual(sol);
    hrma.value /= length * length;
    ode.value /= length;
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < scan.t.size(); ++j) {
        rows.push_back({scan.t[j], scan.mabuchi[j], scan.F[j], scan.E[j],
                        hrma.by_time[j * per_sample] / (length * length)});
        sum.audit(orbit.slice(scan.t[j]), grid);
    }
    write_csv(c.out / "orbit.csv", {"t", "mabuchi", "F", "E", "hrma_sup"}, rows);
    double defect = 0.0;
    for (double t : {c.t_min + 0.25 * (c.t_max - c.t_min), 0.5 * (c.t_min + c.t_max), c.t_max - 0.25 * (c.t_max - c.t_min)}) {
        defect = std::max(defect, hamiltonian_defect(orbit, t, grid));
    }
    sum.check("hrma", hrma.value <= c.hrma_tol, "sup |det Hess Psi| = " + fmt(hrma.value));
    sum.check("geodesic_ode", ode.value <= c.ode_tol, "L1 residual = " + fmt(ode.value));
    sum.check("hamiltonian", defect <= 1e-8, "sup |u_dot/2 - h_t| = " + fmt(defect));
    sum.check("mabuchi_constant", scan.flatness <= 1e-6, "max |M(u_t) - M(u_0)| = " + fmt(scan.flatness));
    sum.check("F_strictly_convex", scan.min_second_difference > 0.0,
              "min second difference of F = " + fmt(scan.min_second_difference));
    const bool interior = scan.minimizer > c.t_min && scan.minimizer < c.t_max && scan.grows_at_both_ends;
    sum.check("F_interior_minimiser", interior, "t* = " + fmt(scan.minimizer) + ", F(t*) = " + fmt(scan.minimum));
    if (c.svg) {
        write_svg(c.out / "orbit.svg", "Functionals along the rotation orbit", "t", "value",
                  {{"M", scan.t, scan.mabuchi}, {"F", scan.t, scan.F}});
    }
    return sum.write(c.out);
}

int cmd_uniqueness(const ExperimentConfig& c) {
    Summary sum("uniqueness", "M + sF has one minimiser for s > 0, which approaches the orbit minimiser of F as s -> 0");
    const auto grid = c.s_grid();
    const auto mu = reference_measure(c.mu, c.seed, grid, c.nx);
    const auto rep = run_uniqueness(c.s_list, c.starts, c.seed, mu, c.pairwise_tol, c.nx);
    std::vector<std::vector<double>> rows;
    std::vector<double> s_values;
    std::vector<double> dist;
    for (const auto& r : rep.rows) {
        rows.push_back({r.s, static_cast<double>(r.starts), static_cast<double>(r.converged), r.max_pairwise,
                        r.distance_to_orbit, r.objective, static_cast<double>(r.iterations)});
        s_values.push_back(r.s);
        dist.push_back(r.distance_to_orbit);
        sum.check("unique_s" + fmt(r.s), r.converged == r.starts && r.max_pairwise < c.pairwise_tol,
                  std::to_string(r.converged) + "/" + std::to_string(r.starts) +
                      " starts converged, max pairwise distance " + fmt(r.max_pairwise));
    }
    write_csv(c.out / "uniqueness.csv",
              {"s", "starts", "converged", "max_pairwise", "distance_to_orbit", "objective", "iterations"}, rows);
    sum.note("orbit minimiser of F at t = " + fmt(rep.orbit_minimizer) + ", mu = " + c.mu);
    sum.check("monotone_trend", rep.monotone, "distance to the orbit minimiser decreases with s");
    if (c.svg) {
        write_svg(c.out / "uniqueness.svg", "Distance to the orbit minimiser", "s", "distance",
                  {{"d(u_s, u*)", s_values, dist}});
    }
    return sum.write(c.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kenergy: K-energy experiments on torus-invariant metrics of the sphere"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;

    const std::map<std::string, std::pair<std::string, std::function<int(const ExperimentConfig&)>>> commands{
        {"geodesic", {"one weak geodesic with residuals and functionals", cmd_geodesic}},
        {"convexity", {"convexity of M along random geodesics", cmd_convexity}},
        {"chen", {"the distance/Calabi lower bound for M", cmd_chen}},
        {"bergman", {"Bergman density limits and positivity in families", cmd_bergman}},
        {"lichnerowicz", {"spectrum of the Lichnerowicz operator at the round metric", cmd_lichnerowicz}},
        {"orbit", {"functionals along the rotation orbit", cmd_orbit}},
        {"uniqueness", {"minimisers of M + sF as s decreases", cmd_uniqueness}},
    };
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "configuration file (key = value lines)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto config = ExperimentConfig::load(config_path);
        if (!out_dir.empty()) config.out = out_dir;
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
        fs::create_directories(config.out);
        for (const auto& [name, entry] : commands) {
            if (app.got_subcommand(name)) return entry.second(config);
        }
    } catch (const InputError& e) {
        std::cerr << "kenergy: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "kenergy: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "kenergy: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
