#include "kenergy/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kenergy/error.hpp"
#include "kenergy/functionals.hpp"

namespace kenergy {

// ---------------------------------------------------------------------------
// Orbit

OrbitPath::OrbitPath(SymplecticPotential base, double strength) : base_(std::move(base)), a_(strength) {}

SymplecticPotential OrbitPath::slice(double t) const {
    return energy_normalized(base_.plus_affine(0.0, -2.0 * a_ * t));
}

double OrbitPath::normalization(double t) const {
    const auto moved = base_.plus_affine(0.0, -2.0 * a_ * t);
    const auto psi = legendre_to_s(moved);
    return 0.5 * energy_E(psi.relative_potential(), psi);
}

GeodesicPath OrbitPath::as_geodesic(double t0, double t1, std::size_t steps) const {
    return GeodesicPath(slice(t0), slice(t1), steps);
}

OrbitPath orbit_geodesic(const SymplecticPotential& u0, double a) { return OrbitPath(u0, a); }

std::vector<double> orbit_hamiltonian(const OrbitPath& path, double /*t*/) {
    const auto& nodes = path.base().nodes();
    std::vector<double> h(nodes.size);
    for (std::size_t i = 0; i < nodes.size; ++i) h[i] = path.strength() * (nodes[i] - 0.5);
    return h;
}

double hamiltonian_defect(const OrbitPath& path, double t, const UniformGrid& s_grid, double dt) {
    constexpr int kHalf = 4;
    std::vector<double> offsets(2 * kHalf + 1);
    for (int k = 0; k <= 2 * kHalf; ++k) offsets[k] = k - kHalf;
    const auto w = fornberg_weights(0.0, offsets, 1)[1];
    std::vector<double> phi_dot(s_grid.size, 0.0);
    for (int k = 0; k <= 2 * kHalf; ++k) {
        if (k == kHalf) continue;
        const auto psi = legendre_to_s(path.slice(t + offsets[k] * dt), s_grid);
        for (std::size_t i = 0; i < s_grid.size; ++i) phi_dot[i] += w[k] * psi.values()[i] / dt;
    }
    const auto centre = legendre_to_s(path.slice(t), s_grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < s_grid.size; ++i) {
        const double h = path.strength() * (centre.slopes()[i] - 0.5);
        worst = std::max(worst, std::abs(0.5 * phi_dot[i] - h));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Lichnerowicz operator

namespace {

struct BasisJet {
    std::vector<double> v;
    std::vector<double> dv;
    std::vector<double> d2v;
};

// q^{a} P_k(2x - 1) and two derivatives for k = 0..n-1, a = |m|/2.
BasisJet basis_at(double x, int m, std::size_t n) {
    const double a = 0.5 * std::abs(m);
    const double y = 2.0 * x - 1.0;
    std::vector<double> p(n), dp(n), d2p(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) {
            p[k] = 1.0;
            dp[k] = 0.0;
            d2p[k] = 0.0;
        } else if (k == 1) {
            p[k] = y;
            dp[k] = 1.0;
            d2p[k] = 0.0;
        } else {
            const double kk = static_cast<double>(k);
            p[k] = ((2.0 * kk - 1.0) * y * p[k - 1] - (kk - 1.0) * p[k - 2]) / kk;
            dp[k] = dp[k - 2] + (2.0 * kk - 1.0) * p[k - 1];
            d2p[k] = d2p[k - 2] + (2.0 * kk - 1.0) * dp[k - 1];
        }
    }
    const double q = x * (1.0 - x);
    const double dq = 1.0 - 2.0 * x;
    const double qa = std::pow(q, a);
    // Derivatives of q^a: a q^{a-1} q', a(a-1) q^{a-2} q'^2 + a q^{a-1} q''.
    const double dqa = a == 0.0 ? 0.0 : a * qa / q * dq;
    const double d2qa = a == 0.0 ? 0.0 : a * (a - 1.0) * qa / (q * q) * dq * dq - 2.0 * a * qa / q;
    BasisJet b;
    b.v.resize(n);
    b.dv.resize(n);
    b.d2v.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // d/dx = 2 d/dy on the Legendre factor.
        b.v[k] = qa * p[k];
        b.dv[k] = dqa * p[k] + 2.0 * qa * dp[k];
        b.d2v[k] = d2qa * p[k] + 4.0 * dqa * dp[k] + 4.0 * qa * d2p[k];
    }
    return b;
}

// D_m v = g v'' - m v' + (m g'/(2g) + m^2/(4g)) v, so that ||D v||^2 = int |D_m v|^2 dx.
double apply_d(int m, const MetricJet& jet, double v, double dv, double d2v) {
    const double md = static_cast<double>(m);
    return jet.g * d2v - md * dv + (md * jet.dg / (2.0 * jet.g) + md * md / (4.0 * jet.g)) * v;
}

QuadratureRule lichnerowicz_rule(const SymplecticPotential& u) {
    return composite_gauss_legendre(0.0, 1.0, static_cast<int>(u.nodes().size - 1), 8);
}

struct GramPair {
    Eigen::MatrixXd stiffness;  // <D e_i, D e_j>
    Eigen::MatrixXd mass;       // <e_i, e_j>
};

GramPair assemble_mode(const QuadratureRule& rule, const std::vector<MetricJet>& jets, int m, std::size_t n) {
    GramPair g{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
               Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    Eigen::VectorXd de(static_cast<Eigen::Index>(n));
    Eigen::VectorXd e(static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        const auto b = basis_at(rule.nodes[p], m, n);
        for (std::size_t k = 0; k < n; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            e(kk) = b.v[k];
            de(kk) = apply_d(m, jets[p], b.v[k], b.dv[k], b.d2v[k]);
        }
        g.stiffness.noalias() += rule.weights[p] * de * de.transpose();
        g.mass.noalias() += rule.weights[p] * e * e.transpose();
    }
    return g;
}

std::vector<MetricJet> jets_at(const SymplecticPotential& u, const QuadratureRule& rule) {
    std::vector<MetricJet> jets(rule.nodes.size());
    for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        jets[p] = u.metric_jet(rule.nodes[p]);
        if (!(jets[p].g > 0.0)) throw DegenerateMetric("lichnerowicz: metric degenerates inside (0, 1)");
    }
    return jets;
}

}  // namespace

double complex_hamiltonian_check(const ModeFunction& v, const SymplecticPotential& u) {
    if (v.coeffs.empty()) return 0.0;
    if (v.coeffs.size() > kMaxRadialDegree + 1) throw InputError("complex_hamiltonian_check: basis overflow");
    const auto rule = lichnerowicz_rule(u);
    const auto jets = jets_at(u, rule);
    double acc = 0.0;
    for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        const auto b = basis_at(rule.nodes[p], v.m, v.coeffs.size());
        double value = 0.0;
        for (std::size_t k = 0; k < v.coeffs.size(); ++k) {
            value += v.coeffs[k] * apply_d(v.m, jets[p], b.v[k], b.dv[k], b.d2v[k]);
        }
        acc += rule.weights[p] * value * value;
    }
    return std::sqrt(acc);
}

LichnerowiczOperator lichnerowicz_assemble(const SymplecticPotential& u, std::size_t degree) {
    if (degree > kMaxRadialDegree) throw InputError("lichnerowicz: truncation degree too large");
    const auto rule = lichnerowicz_rule(u);
    const auto jets = jets_at(u, rule);
    LichnerowiczOperator op;
    op.degree = degree;
    const int top = static_cast<int>(degree);
    for (int m = -top; m <= top; ++m) {
        const std::size_t n = degree - static_cast<std::size_t>(std::abs(m)) + 1;
        const auto gram = assemble_mode(rule, jets, m, n);
        const Eigen::LLT<Eigen::MatrixXd> chol(gram.mass);
        if (chol.info() != Eigen::Success) throw DegenerateMetric("lichnerowicz: ill-conditioned Gram matrix");
        // L^{-1} G L^{-T} is the operator in the orthonormalised basis.
        const Eigen::MatrixXd lower = chol.matrixL();
        Eigen::MatrixXd half = lower.triangularView<Eigen::Lower>().solve(gram.stiffness);
        Eigen::MatrixXd full = lower.triangularView<Eigen::Lower>().solve(half.transpose()).transpose();
        ModeBlock block;
        block.m = m;
        block.matrix = full;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (full + full.transpose()),
                                                                 Eigen::EigenvaluesOnly);
        block.eigenvalues = eig.eigenvalues();
        op.blocks.push_back(std::move(block));
    }
    return op;
}

double LichnerowiczOperator::max_eigenvalue() const {
    double out = -std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) out = std::max(out, b.eigenvalues.maxCoeff());
    return out;
}

double LichnerowiczOperator::min_eigenvalue() const {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) out = std::min(out, b.eigenvalues.minCoeff());
    return out;
}

const ModeBlock& LichnerowiczOperator::block(int m) const {
    for (const auto& b : blocks) {
        if (b.m == m) return b;
    }
    throw InputError("lichnerowicz: mode outside the truncation");
}

double LichnerowiczOperator::realness_residual() const {
    double worst = 0.0;
    for (const auto& b : blocks) {
        if (b.m <= 0) continue;
        worst = std::max(worst, (b.matrix - block(-b.m).matrix).norm());
    }
    return worst;
}

double LichnerowiczOperator::symmetry_residual() const {
    double worst = 0.0;
    for (const auto& b : blocks) worst = std::max(worst, (b.matrix - b.matrix.transpose()).norm());
    return worst;
}

std::size_t kernel_dimension(const LichnerowiczOperator& op, double tol) {
    const double threshold = tol * op.max_eigenvalue();
    std::size_t count = 0;
    for (const auto& b : op.blocks) count += static_cast<std::size_t>((b.eigenvalues.array() < threshold).count());
    return count;
}

std::size_t kernel_dimension(const LichnerowiczOperator& op, int m, double tol) {
    const double threshold = tol * op.max_eigenvalue();
    return static_cast<std::size_t>((op.block(m).eigenvalues.array() < threshold).count());
}

std::size_t stable_kernel_dimension(const SymplecticPotential& u, std::size_t degree, std::optional<int> mode,
                                    double tol) {
    auto count = [&](std::size_t d) {
        const auto op = lichnerowicz_assemble(u, d);
        return mode ? kernel_dimension(op, *mode, tol) : kernel_dimension(op, tol);
    };
    const std::size_t coarse = count(degree);
    const std::size_t fine = count(degree + 2);
    if (coarse != fine) {
        throw ConvergenceError("lichnerowicz: kernel dimension changes under refinement (" + std::to_string(coarse) +
                               " vs " + std::to_string(fine) + ")");
    }
    return coarse;
}

// ---------------------------------------------------------------------------
// Orbit scan

OrbitScan orbit_flatness_and_F(const OrbitPath& path, const MetricDensity& mu, double t_lo, double t_hi,
                               std::size_t samples) {
    if (samples < 5 || !(t_hi > t_lo)) throw InputError("orbit scan: need at least five samples on a proper range");
    OrbitScan scan;
    const UniformGrid grid(t_lo, t_hi, samples);
    double reference = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        const double t = grid[j];
        const auto u = path.slice(t);
        const auto report = functional_report(u, mu);
        scan.t.push_back(t);
        scan.mabuchi.push_back(report.mabuchi);
        scan.F.push_back(report.F);
        scan.E.push_back(report.E);
        if (j == 0) reference = mabuchi(path.slice(0.0));
        scan.flatness = std::max(scan.flatness, std::abs(report.mabuchi - reference));
    }
    scan.min_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < samples; ++j) {
        scan.min_second_difference =
            std::min(scan.min_second_difference, scan.F[j - 1] - 2.0 * scan.F[j] + scan.F[j + 1]);
    }

    auto f = [&](double t) { return f_functional(path.slice(t), mu); };
    // Golden-section search bracketed by the best sample and its neighbours.
    const auto best = static_cast<std::size_t>(std::min_element(scan.F.begin(), scan.F.end()) - scan.F.begin());
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, samples - 1)];
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > 1e-7) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    scan.minimizer = 0.5 * (lo + hi);
    scan.minimum = f(scan.minimizer);

    bool grows = best > 0 && best + 1 < samples;
    for (std::size_t j = best; grows && j + 1 < samples; ++j) grows = scan.F[j + 1] > scan.F[j];
    for (std::size_t j = best; grows && j > 0; --j) grows = scan.F[j - 1] > scan.F[j];
    scan.grows_at_both_ends = grows;
    return scan;
}

}  // namespace kenergy
