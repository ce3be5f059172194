#include "kenergy/radial_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "kenergy/error.hpp"

namespace kenergy {

UniformGrid default_x_grid(std::size_t nx) { return UniformGrid(0.0, 1.0, nx); }

UniformGrid default_s_grid(std::size_t ns, double s_max) { return UniformGrid(-s_max, s_max, ns); }

double guillemin(double x) noexcept {
    const double a = x > 0.0 ? x * std::log(x) : 0.0;
    const double b = x < 1.0 ? (1.0 - x) * std::log1p(-x) : 0.0;
    return a + b;
}

double reference_psi(double s) noexcept { return softplus(s); }

double reference_density(double s) noexcept { return sigmoid(s) * sigmoid(-s); }

// ---------------------------------------------------------------------------
// SymplecticPotential

SymplecticPotential::SymplecticPotential(const UniformGrid& nodes, std::vector<double> f_values)
    : nodes_(nodes), f_(std::move(f_values)) {
    if (nodes_.lo != 0.0 || nodes_.hi != 1.0) {
        throw InvalidPotential("symplectic potential grid must span [0, 1]");
    }
    if (f_.size() != nodes_.size) throw InvalidPotential("f has the wrong number of samples");
    for (std::size_t i = 0; i < f_.size(); ++i) {
        if (!std::isfinite(f_[i])) throw InvalidPotential("non-finite correction value", i);
    }
    interp_ = HermiteInterpolant(nodes_, f_);

    // Positivity of u'' = (1 + q f'') / q, q = x(1 - x), checked at nodes and
    // cell midpoints; the Legendre solver relies on it between nodes as well.
    const double h = nodes_.step();
    double jet[3];
    for (std::size_t i = 0; i < nodes_.size; ++i) {
        for (int half = 0; half < 2; ++half) {
            if (half == 1 && i + 1 == nodes_.size) break;
            const double x = nodes_[i] + 0.5 * h * half;
            interp_.jet(x, 2, jet);
            slope_bound_ = std::max(slope_bound_, std::abs(jet[1]));
            if (half == 0) max_f2_ = std::max(max_f2_, std::abs(jet[2]));
            const double q = x * (1.0 - x);
            const double d = 1.0 + q * jet[2];
            if (!(d > 0.0) || (q > 0.0 && d / q < kHessianFloor)) {
                std::ostringstream msg;
                msg << "u'' is not positive at x = " << x;
                throw InvalidPotential(msg.str(), i);
            }
        }
    }
}

SymplecticPotential SymplecticPotential::round(std::size_t nx) {
    return SymplecticPotential(default_x_grid(nx), std::vector<double>(nx, 0.0));
}

SymplecticPotential SymplecticPotential::from_correction(const std::function<double(double)>& f,
                                                         std::size_t nx) {
    const auto grid = default_x_grid(nx);
    std::vector<double> values(nx);
    for (std::size_t i = 0; i < nx; ++i) values[i] = f(grid[i]);
    return SymplecticPotential(grid, std::move(values));
}

double SymplecticPotential::value(double x) const { return guillemin(x) + interp_.value(x); }

double SymplecticPotential::slope(double x) const {
    return std::log(x) - std::log1p(-x) + interp_.derivative(x, 1);
}

double SymplecticPotential::hessian(double x) const {
    return 1.0 / (x * (1.0 - x)) + interp_.derivative(x, 2);
}

MetricJet SymplecticPotential::metric_jet(double x) const {
    double f[5];
    interp_.jet(x, 4, f);
    const double q = x * (1.0 - x);
    const double dq = 1.0 - 2.0 * x;
    const double d2q = -2.0;
    const double d = 1.0 + q * f[2];
    const double dd = dq * f[2] + q * f[3];
    const double d2d = d2q * f[2] + 2.0 * dq * f[3] + q * f[4];
    MetricJet m;
    m.g = q / d;
    m.dg = (dq - m.g * dd) / d;
    m.d2g = (d2q - 2.0 * m.dg * dd - m.g * d2d) / d;
    return m;
}

DualPoint SymplecticPotential::dual_at(double s) const {
    DualPoint p;
    p.s = s;
    if (std::isinf(s)) {
        // Poles: x = 0 or 1, psi = -u(endpoint) (+ s at the upper pole).
        if (s < 0) {
            p.x = 0.0;
            p.one_minus_x = 1.0;
            p.psi = -f_.front();
        } else {
            p.x = 1.0;
            p.one_minus_x = 0.0;
            p.psi = std::numeric_limits<double>::infinity();
        }
        p.density = 0.0;
        return p;
    }
    // Solve xi + f'(sigmoid(xi)) = s in the logit variable xi; the derivative
    // is 1 + q f'' > 0, so the root is unique and bracketed by |f'| <= bound.
    double lo = s - slope_bound_ - 1.0;
    double hi = s + slope_bound_ + 1.0;
    double xi = s - interp_.derivative(sigmoid(s), 1);
    xi = std::clamp(xi, lo, hi);
    double f[3];
    for (int iter = 0; iter < 200; ++iter) {
        const double x = sigmoid(xi);
        interp_.jet(x, 2, f);
        const double residual = xi + f[1] - s;
        if (residual > 0.0) hi = xi; else lo = xi;
        const double q = x * sigmoid(-xi);
        const double deriv = 1.0 + q * f[2];
        double next = xi - residual / deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - xi);
        xi = next;
        if (step <= 1e-15 * (1.0 + std::abs(xi)) || hi - lo <= 1e-15 * (1.0 + std::abs(xi))) break;
    }
    const double x = sigmoid(xi);
    const double omx = sigmoid(-xi);
    interp_.jet(x, 2, f);
    const double log_x = log_sigmoid(xi);
    const double log_omx = log_sigmoid(-xi);
    const double u = x * log_x + omx * log_omx + f[0];
    p.x = x;
    p.one_minus_x = omx;
    p.psi = x * s - u;
    const double q = x * omx;
    p.density = q / (1.0 + q * f[2]);
    return p;
}

SymplecticPotential SymplecticPotential::plus_affine(double c0, double c1) const {
    std::vector<double> f(f_);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += c0 + c1 * nodes_[i];
    return SymplecticPotential(nodes_, std::move(f));
}

SymplecticPotential SymplecticPotential::interpolate(const SymplecticPotential& u0,
                                                     const SymplecticPotential& u1, double t) {
    if (!(u0.nodes_ == u1.nodes_)) throw InvalidPotential("endpoints live on different grids");
    std::vector<double> f(u0.f_.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 - t) * u0.f_[i] + t * u1.f_[i];
    return SymplecticPotential(u0.nodes_, std::move(f));
}

// ---------------------------------------------------------------------------
// RadialPotential

RadialPotential::RadialPotential(const UniformGrid& grid, std::vector<double> psi,
                                 std::vector<double> dpsi, std::vector<double> d2psi)
    : grid_(grid), psi_(std::move(psi)), dpsi_(std::move(dpsi)), d2psi_(std::move(d2psi)) {
    validate();
    interp_ = LocalInterpolant(grid_, psi_);
}

RadialPotential RadialPotential::from_values(const UniformGrid& grid, std::vector<double> psi) {
    if (psi.size() != grid.size) throw InvalidPotential("psi has the wrong number of samples");
    const double h = grid.step();
    for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
        const double second = psi[i - 1] - 2.0 * psi[i] + psi[i + 1];
        const double scale = 1e-13 * (std::abs(psi[i - 1]) + 2.0 * std::abs(psi[i]) + std::abs(psi[i + 1]));
        if (second < -scale) throw InvalidPotential("psi is not convex", i);
    }
    auto dpsi = differentiate(psi, h, 1);
    auto d2psi = differentiate(psi, h, 2);
    return RadialPotential(grid, std::move(psi), std::move(dpsi), std::move(d2psi));
}

RadialPotential RadialPotential::from_exact(const UniformGrid& grid, std::vector<double> psi,
                                            std::vector<double> dpsi, std::vector<double> d2psi) {
    return RadialPotential(grid, std::move(psi), std::move(dpsi), std::move(d2psi));
}

RadialPotential RadialPotential::reference(const UniformGrid& grid) {
    std::vector<double> psi(grid.size);
    std::vector<double> dpsi(grid.size);
    std::vector<double> d2psi(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double s = grid[i];
        psi[i] = reference_psi(s);
        dpsi[i] = sigmoid(s);
        d2psi[i] = reference_density(s);
    }
    return RadialPotential(grid, std::move(psi), std::move(dpsi), std::move(d2psi));
}

void RadialPotential::validate() const {
    const std::size_t n = grid_.size;
    if (psi_.size() != n || dpsi_.size() != n || d2psi_.size() != n) {
        throw InvalidPotential("radial potential arrays do not match the grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(psi_[i]) || !std::isfinite(dpsi_[i]) || !std::isfinite(d2psi_[i])) {
            throw InvalidPotential("non-finite radial potential sample", i);
        }
        if (d2psi_[i] < -1e-12) throw InvalidPotential("psi is not convex", i);
        const bool interior = i > 0 && i + 1 < n;
        if (interior && !(dpsi_[i] > 0.0 && dpsi_[i] < 1.0)) {
            throw InvalidPotential("psi' leaves (0, 1)", i);
        }
    }
}

MetricDensity RadialPotential::density() const {
    MetricDensity rho;
    rho.grid = grid_;
    rho.values = d2psi_;
    rho.tail_left = std::max(dpsi_.front(), 0.0);
    rho.tail_right = std::max(1.0 - dpsi_.back(), 0.0);
    return rho;
}

std::vector<double> RadialPotential::relative_potential() const {
    std::vector<double> out(psi_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = psi_[i] - reference_psi(grid_[i]);
    return out;
}

double RadialPotential::interpolated_value(double s) const { return interp_.value(s); }

double RadialPotential::interpolated_slope(double s) const { return interp_.derivative(s, 1); }

double RadialPotential::interpolated_curvature(double s) const { return interp_.derivative(s, 2); }

// ---------------------------------------------------------------------------
// Legendre transforms

RadialPotential legendre_to_s(const SymplecticPotential& u, const UniformGrid& s_grid) {
    std::vector<double> psi(s_grid.size);
    std::vector<double> dpsi(s_grid.size);
    std::vector<double> d2psi(s_grid.size);
    for (std::size_t i = 0; i < s_grid.size; ++i) {
        const auto p = u.dual_at(s_grid[i]);
        psi[i] = p.psi;
        dpsi[i] = p.x;
        d2psi[i] = p.density;
    }
    return RadialPotential::from_exact(s_grid, std::move(psi), std::move(dpsi), std::move(d2psi));
}

SymplecticPotential legendre_to_x(const RadialPotential& psi, std::size_t nx) {
    const auto x_grid = default_x_grid(nx);
    const auto& sg = psi.grid();
    const auto slopes = psi.slopes();
    const auto values = psi.values();
    for (std::size_t i = 1; i < slopes.size(); ++i) {
        if (!(slopes[i] > slopes[i - 1])) throw InvalidPotential("psi' is not increasing", i);
    }
    std::vector<double> f(nx);
    // Endpoints from the exponential tails psi ~ psi(-inf) + c e^s and
    // psi ~ s - u(1) + c e^{-s} beyond the window.
    f.front() = slopes.front() - values.front();
    f.back() = sg.hi - values.back() + (1.0 - slopes.back());
    for (std::size_t i = 1; i + 1 < nx; ++i) {
        const double x = x_grid[i];
        if (x <= slopes.front() || x >= slopes.back()) {
            throw InvalidPotential("s-window too narrow to resolve moment coordinate", i);
        }
        const auto it = std::upper_bound(slopes.begin(), slopes.end(), x);
        const auto j = static_cast<std::size_t>(it - slopes.begin());
        double lo = sg[j - 1];
        double hi = sg[j];
        // Monotone slope matching: refine the bracketing cell with Newton on the
        // interpolated slope.
        double s = lo + (hi - lo) * (x - slopes[j - 1]) / (slopes[j] - slopes[j - 1]);
        for (int iter = 0; iter < 100; ++iter) {
            const double r = psi.interpolated_slope(s) - x;
            if (r > 0.0) hi = s; else lo = s;
            double next = s;
            const double curvature = psi.interpolated_curvature(s);
            if (curvature > 0.0) next = s - r / curvature;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double step = std::abs(next - s);
            s = next;
            if (step < 1e-15 * (1.0 + std::abs(s)) || hi - lo < 1e-15 * (1.0 + std::abs(s))) break;
        }
        const double u = x * s - psi.interpolated_value(s);
        f[i] = u - guillemin(x);
    }
    return SymplecticPotential(x_grid, std::move(f));
}

// ---------------------------------------------------------------------------
// Curvature and integration

std::vector<double> scalar_curvature(const SymplecticPotential& u) {
    const auto& grid = u.nodes();
    std::vector<double> r(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) r[i] = u.scalar_curvature_at(grid[i]);
    return r;
}

double total_scalar_curvature(const SymplecticPotential& u) {
    const auto rule = composite_gauss_legendre(0.0, 1.0, static_cast<int>(u.nodes().size - 1), 4);
    return integrate(rule, [&](double x) { return u.scalar_curvature_at(x); });
}

RicciDensity ricci_density(const RadialPotential& psi) {
    const auto& grid = psi.grid();
    const auto d2 = psi.second_derivative();
    std::vector<double> log_density(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
        if (!(d2[i] > 1e-300)) throw DegenerateMetric("psi'' underflows at s = " + std::to_string(grid[i]));
        log_density[i] = std::log(d2[i]);
    }
    const double h = grid.step();
    auto r = differentiate(log_density, h, 2);
    for (auto& v : r) v = -v;
    const auto slope = differentiate(log_density, h, 1);
    RicciDensity out;
    out.density.grid = grid;
    out.density.values = std::move(r);
    // (log psi'')' tends to +1 at -inf and -1 at +inf.
    out.density.tail_left = 1.0 - slope.front();
    out.density.tail_right = 1.0 + slope.back();
    return out;
}

double integrate_X(std::span<const double> g, const MetricDensity& rho) {
    if (g.size() != rho.values.size() || g.size() != rho.grid.size) {
        throw InputError("integrate_X: grid function and density have different shapes");
    }
    std::vector<double> product(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::isnan(g[i]) || std::isnan(rho.values[i])) throw InputError("integrate_X: NaN input");
        product[i] = g[i] * rho.values[i];
    }
    return trapezoid(product, rho.grid.step()) + g.front() * rho.tail_left + g.back() * rho.tail_right;
}

double total_mass(const MetricDensity& rho) {
    return trapezoid(rho.values, rho.grid.step()) + rho.tail_left + rho.tail_right;
}

std::vector<double> moment_map(const RadialPotential& psi) {
    const auto slopes = psi.slopes();
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        if (!(slopes[i] >= 0.0 && slopes[i] <= 1.0)) throw InvalidPotential("moment map leaves [0, 1]", i);
        if (i > 0 && !(slopes[i] > slopes[i - 1])) throw InvalidPotential("moment map is not increasing", i);
    }
    return {slopes.begin(), slopes.end()};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

SymplecticPotential read_potential_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open potential file " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "x,f") {
        throw InputError(path.string() + ": expected header `x,f`");
    }
    std::vector<double> xs;
    std::vector<double> fs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos) {
            throw InputError(path.string() + ": row " + std::to_string(row) + " is not `x,f`");
        }
        try {
            std::size_t used = 0;
            const auto xs_str = trim(t.substr(0, comma));
            const auto fs_str = trim(t.substr(comma + 1));
            const double x = std::stod(xs_str, &used);
            if (used != xs_str.size()) throw std::invalid_argument("x");
            const double f = std::stod(fs_str, &used);
            if (used != fs_str.size()) throw std::invalid_argument("f");
            xs.push_back(x);
            fs.push_back(f);
        } catch (const std::exception&) {
            throw InputError(path.string() + ": row " + std::to_string(row) + " has malformed numbers");
        }
    }
    if (xs.size() < static_cast<std::size_t>(LocalInterpolant::kWidth)) {
        throw InputError(path.string() + ": too few rows");
    }
    const UniformGrid grid(0.0, 1.0, xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i] - grid[i]) > 1e-9) {
            throw InputError(path.string() + ": row " + std::to_string(i + 1) +
                             " breaks the uniform grid on [0, 1]");
        }
    }
    return SymplecticPotential(grid, std::move(fs));
}

void write_potential_csv(const std::filesystem::path& path, const SymplecticPotential& u) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "x,f\n" << std::setprecision(17);
    const auto f = u.f_values();
    for (std::size_t i = 0; i < f.size(); ++i) out << u.nodes()[i] << ',' << f[i] << '\n';
}

}  // namespace kenergy
