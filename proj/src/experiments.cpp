#include "kenergy/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "kenergy/error.hpp"
#include "kenergy/functionals.hpp"
#include "kenergy/symmetry.hpp"

namespace kenergy {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": expected a number, got '" + text + "'");
    }
}

std::size_t parse_count(const std::string& text, const std::string& where) {
    const double v = parse_double(text, where);
    if (v < 0 || v != std::floor(v)) throw InputError(where + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> parse_list(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw InputError(where + ": empty list entry");
        out.push_back(parse_double(item, where));
    }
    if (out.empty()) throw InputError(where + ": list is empty");
    return out;
}

bool parse_bool(const std::string& text, const std::string& where) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InputError(where + ": expected true or false");
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::stringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(number);
        if (eq == std::string::npos) throw InputError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string at = where + " (" + key + ")";
        if (key == "seed") c.seed = parse_count(value, at);
        else if (key == "nx") c.nx = parse_count(value, at);
        else if (key == "ns") c.ns = parse_count(value, at);
        else if (key == "s_max") c.s_max = parse_double(value, at);
        else if (key == "steps") c.steps = parse_count(value, at);
        else if (key == "pairs") c.pairs = parse_count(value, at);
        else if (key == "t_min") c.t_min = parse_double(value, at);
        else if (key == "t_max") c.t_max = parse_double(value, at);
        else if (key == "t_samples") c.t_samples = parse_count(value, at);
        else if (key == "orbit_strength") c.orbit_strength = parse_double(value, at);
        else if (key == "k_list") c.k_list = parse_list(value, at);
        else if (key == "z_list") c.z_list = parse_list(value, at);
        else if (key == "s_list") c.s_list = parse_list(value, at);
        else if (key == "starts") c.starts = parse_count(value, at);
        else if (key == "degree") c.degree = parse_count(value, at);
        else if (key == "mu") c.mu = value;
        else if (key == "convexity_tol") c.convexity_tol = parse_double(value, at);
        else if (key == "joint_tol") c.joint_tol = parse_double(value, at);
        else if (key == "chen_tol") c.chen_tol = parse_double(value, at);
        else if (key == "hrma_tol") c.hrma_tol = parse_double(value, at);
        else if (key == "ode_tol") c.ode_tol = parse_double(value, at);
        else if (key == "pairwise_tol") c.pairwise_tol = parse_double(value, at);
        else if (key == "u0_file") c.u0_file = value;
        else if (key == "u1_file") c.u1_file = value;
        else if (key == "out") c.out = value;
        else if (key == "svg") c.svg = parse_bool(value, at);
        else throw InputError(where + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void ExperimentConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw InputError(std::string("config: ") + name + " must be positive");
    };
    if (nx < 13) throw InputError("config: nx must be at least 13");
    if (ns < 13) throw InputError("config: ns must be at least 13");
    if (steps < 4) throw InputError("config: steps must be at least 4");
    positive(s_max, "s_max");
    positive(static_cast<double>(pairs), "pairs");
    positive(static_cast<double>(starts), "starts");
    positive(static_cast<double>(degree), "degree");
    if (t_samples < 5) throw InputError("config: t_samples must be at least 5");
    if (!(t_max > t_min)) throw InputError("config: t_max must exceed t_min");
    positive(convexity_tol, "convexity_tol");
    positive(joint_tol, "joint_tol");
    positive(chen_tol, "chen_tol");
    positive(hrma_tol, "hrma_tol");
    positive(ode_tol, "ode_tol");
    positive(pairwise_tol, "pairwise_tol");
    if (s_list.empty()) throw InputError("config: s_list is empty");
    for (std::size_t i = 0; i < s_list.size(); ++i) {
        if (!(s_list[i] > 0.0)) throw InputError("config: s_list entries must be positive");
        if (i > 0 && !(s_list[i] < s_list[i - 1])) throw InputError("config: s_list must be strictly descending");
    }
    if (k_list.empty()) throw InputError("config: k_list is empty");
    for (double k : k_list) positive(k, "k_list entries");
    for (double z : z_list) {
        if (!(z >= 0.0 && z < 0.9)) throw InputError("config: z_list entries must lie in [0, 0.9)");
    }
    if (mu != "round" && mu != "random") throw InputError("config: mu must be round or random");
    if (u0_file.empty() != u1_file.empty()) throw InputError("config: give both u0_file and u1_file or neither");
}

// ---------------------------------------------------------------------------
// Ensemble

PotentialEnsemble::PotentialEnsemble(std::uint64_t seed, std::size_t nx, double margin)
    : rng_(seed), nx_(nx), margin_(margin) {}

double PotentialEnsemble::correction(const std::vector<double>& a, double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * std::sin(static_cast<double>(j + 1) * std::numbers::pi * x);
    return acc;
}

double PotentialEnsemble::min_hessian_factor(const std::vector<double>& a) {
    constexpr int kSamples = 2001;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kSamples; ++i) {
        const double x = static_cast<double>(i) / (kSamples - 1);
        double f2 = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double w = static_cast<double>(j + 1) * std::numbers::pi;
            f2 -= a[j] * w * w * std::sin(w * x);
        }
        worst = std::min(worst, 1.0 + x * (1.0 - x) * f2);
    }
    return worst;
}

std::vector<double> PotentialEnsemble::next_coefficients() {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (;;) {
        std::vector<double> a(kModes);
        for (int j = 0; j < kModes; ++j) {
            const double bound = 0.2 / static_cast<double>((j + 1) * (j + 1));
            a[j] = bound * unit(rng_);
        }
        if (min_hessian_factor(a) >= margin_) return a;
        ++rejected_;
    }
}

SymplecticPotential PotentialEnsemble::next() {
    const auto a = next_coefficients();
    return SymplecticPotential::from_correction([&](double x) { return correction(a, x); }, nx_);
}

// ---------------------------------------------------------------------------
// Perturbed functional

PerturbedFunctional::PerturbedFunctional(double s, MetricDensity mu, std::size_t nx)
    : s_(s), mu_(std::move(mu)), nx_(nx) {
    if (!(s_ >= 0.0)) throw InputError("perturbed functional: s must be non-negative");
}

double PerturbedFunctional::basis(int i, double x) {
    if (i == 0) return x;
    const double w = static_cast<double>(i) * std::numbers::pi;
    return std::sin(w * x) / (w * w);
}

double PerturbedFunctional::basis_second(int i, double x) {
    if (i == 0) return 0.0;
    return -std::sin(static_cast<double>(i) * std::numbers::pi * x);
}

SymplecticPotential PerturbedFunctional::potential(const Eigen::VectorXd& b) const {
    const auto u = SymplecticPotential::from_correction(
        [&](double x) {
            double acc = 0.0;
            for (int i = 0; i < kDimension; ++i) acc += b(i) * basis(i, x);
            return acc;
        },
        nx_);
    return energy_normalized(u);
}

double PerturbedFunctional::value(const Eigen::VectorXd& b) const {
    const auto u = potential(b);
    // M from the symplectic side, matching the discretisation of the gradient:
    // M = -int log(1 + q f'') dx + f(0) + f(1) - 2 int f dx.
    const auto& nodes = u.nodes();
    const auto rule = composite_gauss_legendre(0.0, 1.0, static_cast<int>(nodes.size - 1), 4);
    double m = 0.0;
    double jet[3];
    for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        const double x = rule.nodes[p];
        u.correction_jet(x, 2, jet);
        const double factor = 1.0 + x * (1.0 - x) * jet[2];
        if (!(factor > 0.0)) throw InvalidPotential("perturbed functional: Hessian not positive", p);
        m -= rule.weights[p] * (std::log(factor) + 2.0 * jet[0]);
    }
    const auto f = u.f_values();
    m += f.front() + f.back();
    return s_ > 0.0 ? m + s_ * f_functional(legendre_to_s(u, mu_.grid), mu_) : m;
}

Eigen::VectorXd PerturbedFunctional::f_gradient(const SymplecticPotential& u) const {
    // phi_dot = -w(x(s)) and dE = -2 int w dx for a symplectic variation w.
    const auto psi = legendre_to_s(u, mu_.grid);
    const auto x = psi.slopes();
    Eigen::VectorXd g(kDimension);
    std::vector<double> w(x.size());
    for (int i = 0; i < kDimension; ++i) {
        for (std::size_t k = 0; k < x.size(); ++k) w[k] = basis(i, x[k]);
        // Basis functions are continuous up to the poles, where x -> 0 and 1.
        const double mean = i == 0 ? 0.5
                                   : (1.0 - std::cos(i * std::numbers::pi)) /
                                         std::pow(static_cast<double>(i) * std::numbers::pi, 3);
        g(i) = mean - integrate_X(w, mu_);
    }
    return g;
}

Eigen::VectorXd PerturbedFunctional::gradient(const Eigen::VectorXd& b) const {
    const auto u = potential(b);
    const auto& nodes = u.nodes();
    const auto rule = composite_gauss_legendre(0.0, 1.0, static_cast<int>(nodes.size - 1), 4);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(kDimension);
    for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        const double x = rule.nodes[p];
        const double r = u.scalar_curvature_at(x) - kAverageScalarCurvature;
        for (int i = 0; i < kDimension; ++i) g(i) += rule.weights[p] * basis(i, x) * r;
    }
    if (s_ > 0.0) g += s_ * f_gradient(u);
    return g;
}

Eigen::MatrixXd PerturbedFunctional::hessian(const Eigen::VectorXd& b) const {
    const auto u = potential(b);
    const auto& nodes = u.nodes();
    const auto rule = composite_gauss_legendre(0.0, 1.0, static_cast<int>(nodes.size - 1), 4);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(kDimension, kDimension);
    Eigen::VectorXd e(kDimension);
    for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        const double x = rule.nodes[p];
        const double inv = 1.0 / u.hessian(x);
        for (int i = 0; i < kDimension; ++i) e(i) = basis_second(i, x) * inv;
        h.noalias() += rule.weights[p] * e * e.transpose();
    }
    if (s_ > 0.0) {
        constexpr double kStep = 1e-4;
        Eigen::MatrixXd hf(kDimension, kDimension);
        for (int j = 0; j < kDimension; ++j) {
            Eigen::VectorXd plus = b;
            Eigen::VectorXd minus = b;
            plus(j) += kStep;
            minus(j) -= kStep;
            hf.col(j) = (f_gradient(potential(plus)) - f_gradient(potential(minus))) / (2.0 * kStep);
        }
        h += s_ * 0.5 * (hf + hf.transpose());
    }
    return h;
}

MinimizerState minimize_perturbed(const PerturbedFunctional& functional, Eigen::VectorXd start,
                                  const MinimizerOptions& options) {
    MinimizerState state;
    state.coeffs = std::move(start);
    auto safe_value = [&](const Eigen::VectorXd& b) {
        try {
            return functional.value(b);
        } catch (const InvalidPotential&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    state.objective = safe_value(state.coeffs);
    if (!std::isfinite(state.objective)) throw InputError("minimizer: start is not an admissible potential");
    Eigen::VectorXd g = functional.gradient(state.coeffs);
    state.gradient_norm = g.norm();
    Eigen::LDLT<Eigen::MatrixXd> precond(functional.hessian(state.coeffs));
    bool fresh = true;
    while (state.iterations < options.max_iterations) {
        if (state.gradient_norm < options.gradient_tol) {
            state.converged = true;
            state.stop_reason = "gradient norm below tolerance";
            break;
        }
        Eigen::VectorXd d = -precond.solve(g);
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            d = -g;
            slope = -g.squaredNorm();
        }
        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial;
        double trial_value = 0.0;
        for (int back = 0; back < 40; ++back, alpha *= 0.5) {
            trial = state.coeffs + alpha * d;
            trial_value = safe_value(trial);
            if (trial_value < state.objective && trial_value <= state.objective + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No resolvable decrease along the preconditioned direction: refresh
            // the preconditioner once, otherwise the objective is at its noise floor.
            if (!fresh) {
                precond.compute(functional.hessian(state.coeffs));
                fresh = true;
                continue;
            }
            state.stop_reason = "objective at its resolution limit";
            state.converged = state.gradient_norm < 1e3 * options.gradient_tol;
            break;
        }
        state.coeffs = trial;
        state.objective = trial_value;
        state.history.push_back(trial_value);
        g = functional.gradient(state.coeffs);
        state.gradient_norm = g.norm();
        ++state.iterations;
        fresh = false;
    }
    if (state.iterations >= options.max_iterations && !state.converged) state.stop_reason = "iteration limit";
    return state;
}

Eigen::VectorXd random_start(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd b(PerturbedFunctional::kDimension);
    b(0) = unit(rng);
    // sum |b_j| <= 2 keeps 1 - x(1-x) sum b_j sin(j pi x) >= 1/2.
    for (int i = 1; i < PerturbedFunctional::kDimension; ++i) b(i) = 0.25 * unit(rng);
    return b;
}

MetricDensity reference_measure(const std::string& kind, std::uint64_t seed, const UniformGrid& s_grid,
                                std::size_t nx) {
    if (kind == "round") return RadialPotential::reference(s_grid).density();
    if (kind == "random") {
        PotentialEnsemble ensemble(seed ^ 0x9e3779b97f4a7c15ULL, nx);
        return legendre_to_s(ensemble.next(), s_grid).density();
    }
    throw InputError("unknown reference measure '" + kind + "'");
}

UniquenessReport run_uniqueness(const std::vector<double>& s_list, std::size_t starts, std::uint64_t seed,
                                const MetricDensity& mu, double pairwise_tol, std::size_t nx) {
    UniquenessReport report;
    const auto orbit = orbit_geodesic(SymplecticPotential::round(nx), 1.0);
    const auto scan = orbit_flatness_and_F(orbit, mu, -2.0, 2.0, 21);
    report.orbit_minimizer = scan.minimizer;
    const auto target = orbit.slice(scan.minimizer);

    std::mt19937_64 rng(seed);
    report.unique = true;
    report.monotone = true;
    for (double s : s_list) {
        const PerturbedFunctional functional(s, mu, nx);
        UniquenessRow row;
        row.s = s;
        row.starts = starts;
        std::vector<SymplecticPotential> minimizers;
        for (std::size_t k = 0; k < starts; ++k) {
            const auto state = minimize_perturbed(functional, random_start(rng));
            if (state.converged) ++row.converged;
            row.iterations = std::max(row.iterations, state.iterations);
            row.objective = state.objective;
            minimizers.push_back(functional.potential(state.coeffs));
        }
        for (std::size_t i = 0; i < minimizers.size(); ++i) {
            for (std::size_t j = i + 1; j < minimizers.size(); ++j) {
                row.max_pairwise = std::max(row.max_pairwise, geodesic_distance(minimizers[i], minimizers[j]));
            }
        }
        row.distance_to_orbit = geodesic_distance(minimizers.front(), target);
        if (row.max_pairwise >= pairwise_tol || row.converged != starts) report.unique = false;
        if (!report.rows.empty() && !(row.distance_to_orbit < report.rows.back().distance_to_orbit)) {
            report.monotone = false;
        }
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
    if (!out) throw InputError("write failed for " + path.string());
}

void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<SvgSeries>& series, bool stems) {
    constexpr double kWidth = 640.0;
    constexpr double kHeight = 400.0;
    constexpr double kMargin = 60.0;
    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (stems) y_lo = std::min(y_lo, 0.0);
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
    auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
    auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };
    const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
        << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
        << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << x_label << "</text>\n";
    out << "<text x=\"15\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 15 " << kHeight / 2
        << ")\" text-anchor=\"middle\" font-size=\"12\">" << y_label << "</text>\n";
    out << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 15 << "\" font-size=\"10\">"
        << format_number(x_lo) << "</text>\n";
    out << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 15
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_number(x_hi) << "</text>\n";
    out << "<text x=\"" << kMargin - 5 << "\" y=\"" << kHeight - kMargin << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_number(y_lo) << "</text>\n";
    out << "<text x=\"" << kMargin - 5 << "\" y=\"" << kMargin << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_number(y_hi) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = colours[k % 6];
        if (stems) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(s.x[i])
                    << "\" y2=\"" << py(s.y[i]) << "\" stroke=\"" << colour << "\"/>\n";
                out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << colour
                    << "\"/>\n";
            }
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            out << "\"/>\n";
        }
        out << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kMargin + 14.0 * static_cast<double>(k)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colour << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace kenergy
