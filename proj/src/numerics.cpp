#include "kenergy/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kenergy/error.hpp"

namespace kenergy {

UniformGrid::UniformGrid(double lo_, double hi_, std::size_t n) : lo(lo_), hi(hi_), size(n) {
    if (n < 2 || !(hi_ > lo_)) {
        throw InputError("uniform grid needs at least two points and hi > lo");
    }
}

std::vector<double> UniformGrid::points() const {
    std::vector<double> out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = (*this)[i];
    return out;
}

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                  int max_order) {
    const std::size_t n = x.size();
    const auto m = static_cast<std::size_t>(max_order);
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

LocalInterpolant::LocalInterpolant(const UniformGrid& grid, std::span<const double> values)
    : grid_(grid) {
    if (values.size() != grid.size) throw InputError("interpolant: value count does not match grid");
    if (grid.size < static_cast<std::size_t>(kWidth)) {
        throw InputError("interpolant: grid needs at least 13 points");
    }
    const std::size_t cells = grid.size - 1;
    taylor_.resize(cells);

    // Weights depend only on where the cell sits relative to its stencil; the
    // interior offset is shared by all cells away from the ends.
    std::vector<double> offsets(kWidth);
    auto weights_for = [&](std::ptrdiff_t shift) {
        for (int j = 0; j < kWidth; ++j) offsets[j] = static_cast<double>(j) - static_cast<double>(shift) - 0.5;
        return fornberg_weights(0.0, offsets, kWidth - 1);
    };
    constexpr std::ptrdiff_t half = kWidth / 2;
    const auto interior = weights_for(half);
    std::vector<double> factorial(kWidth, 1.0);
    for (int k = 1; k < kWidth; ++k) factorial[k] = factorial[k - 1] * k;

    const auto last_start = static_cast<std::ptrdiff_t>(grid.size) - kWidth;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const auto c = static_cast<std::ptrdiff_t>(cell);
        const std::ptrdiff_t start = std::clamp<std::ptrdiff_t>(c - half, 0, last_start);
        const std::ptrdiff_t shift = c - start;
        const auto local = shift == half ? std::vector<std::vector<double>>() : weights_for(shift);
        const auto& w = shift == half ? interior : local;
        auto& coeff = taylor_[cell];
        for (int k = 0; k < kWidth; ++k) {
            double acc = 0.0;
            for (int j = 0; j < kWidth; ++j) acc += w[k][j] * values[static_cast<std::size_t>(start + j)];
            coeff[k] = acc / factorial[k];
        }
    }
}

void LocalInterpolant::jet(double x, int max_order, double* out) const {
    const double h = grid_.step();
    double pos = (x - grid_.lo) / h;
    const auto cells = static_cast<double>(taylor_.size());
    pos = std::clamp(pos, 0.0, cells);
    auto cell = static_cast<std::size_t>(pos);
    if (cell >= taylor_.size()) cell = taylor_.size() - 1;
    const double y = pos - (static_cast<double>(cell) + 0.5);
    const auto& a = taylor_[cell];
    double scale = 1.0;
    for (int m = 0; m <= max_order; ++m) {
        // d^m/dy^m of sum a_k y^k, Horner from the top.
        double acc = 0.0;
        for (int k = kWidth - 1; k >= m; --k) {
            double falling = 1.0;
            for (int j = 0; j < m; ++j) falling *= static_cast<double>(k - j);
            acc = acc * y + falling * a[k];
        }
        out[m] = acc / scale;
        scale *= h;
    }
}

double LocalInterpolant::value(double x) const {
    double out[1];
    jet(x, 0, out);
    return out[0];
}

double LocalInterpolant::derivative(double x, int order) const {
    double out[5];
    jet(x, order, out);
    return out[order];
}

HermiteInterpolant::HermiteInterpolant(const UniformGrid& grid, std::span<const double> values)
    : grid_(grid) {
    if (values.size() != grid.size) throw InputError("interpolant: value count does not match grid");
    if (grid.size < 13) throw InputError("interpolant: grid needs at least 13 points");
    const double h = grid.step();
    chord0_ = values.front();
    chord1_ = (values.back() - values.front()) / (grid.hi - grid.lo);
    std::array<std::vector<double>, 4> d;
    d[0].resize(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) d[0][i] = values[i] - (chord0_ + chord1_ * (grid[i] - grid.lo));
    for (int m = 1; m <= 3; ++m) d[m] = differentiate(d[0], h, m, 13);

    // Scaled Taylor data r_m = f^(m) h^m / m! at each node.
    const double scale[4] = {1.0, h, h * h / 2.0, h * h * h / 6.0};
    // Conditions at t = 1 on the top four coefficients: sum_k C(k, m) a_k.
    double binom[8][8] = {};
    for (int k = 0; k < 8; ++k) {
        binom[k][0] = 1.0;
        for (int m = 1; m <= k; ++m) binom[k][m] = binom[k - 1][m - 1] + (m <= k - 1 ? binom[k - 1][m] : 0.0);
    }
    // Invert the 4x4 block once (Gauss-Jordan).
    double a[4][8] = {};
    for (int m = 0; m < 4; ++m) {
        for (int k = 0; k < 4; ++k) a[m][k] = binom[k + 4][m];
        a[m][4 + m] = 1.0;
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r) if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        const double inv = 1.0 / a[col][col];
        for (double& v : a[col]) v *= inv;
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double fac = a[r][col];
            for (int k = 0; k < 8; ++k) a[r][k] -= fac * a[col][k];
        }
    }

    coeff_.resize(grid.size - 1);
    for (std::size_t cell = 0; cell + 1 < grid.size; ++cell) {
        auto& c = coeff_[cell];
        for (int m = 0; m < 4; ++m) c[m] = d[m][cell] * scale[m];
        double rhs[4];
        for (int m = 0; m < 4; ++m) {
            double known = 0.0;
            for (int k = m; k < 4; ++k) known += binom[k][m] * c[k];
            rhs[m] = d[m][cell + 1] * scale[m] - known;
        }
        for (int k = 0; k < 4; ++k) {
            double acc = 0.0;
            for (int m = 0; m < 4; ++m) acc += a[k][4 + m] * rhs[m];
            c[4 + k] = acc;
        }
    }
}

void HermiteInterpolant::jet(double x, int max_order, double* out) const {
    const double h = grid_.step();
    double pos = std::clamp((x - grid_.lo) / h, 0.0, static_cast<double>(coeff_.size()));
    auto cell = static_cast<std::size_t>(pos);
    if (cell >= coeff_.size()) cell = coeff_.size() - 1;
    const double t = pos - static_cast<double>(cell);
    const auto& a = coeff_[cell];
    double scale = 1.0;
    for (int m = 0; m <= max_order; ++m) {
        double acc = 0.0;
        for (int k = 7; k >= m; --k) {
            double falling = 1.0;
            for (int j = 0; j < m; ++j) falling *= static_cast<double>(k - j);
            acc = acc * t + falling * a[k];
        }
        out[m] = acc / scale;
        scale *= h;
    }
    out[0] += chord0_ + chord1_ * (x - grid_.lo);
    if (max_order >= 1) out[1] += chord1_;
}

double HermiteInterpolant::value(double x) const {
    double out[1];
    jet(x, 0, out);
    return out[0];
}

double HermiteInterpolant::derivative(double x, int order) const {
    double out[5];
    jet(x, order, out);
    return out[order];
}

std::vector<double> central_weights(int order, int width, double h) {
    std::vector<double> offsets(width);
    for (int j = 0; j < width; ++j) offsets[j] = static_cast<double>(j - width / 2);
    auto w = fornberg_weights(0.0, offsets, order)[order];
    const double scale = std::pow(h, order);
    for (auto& v : w) v /= scale;
    return w;
}

std::vector<double> differentiate(std::span<const double> values, double h, int order, int width) {
    const std::size_t n = values.size();
    if (n < static_cast<std::size_t>(width)) throw InputError("differentiate: too few samples");
    std::vector<double> out(n);
    std::vector<double> offsets(width);
    const std::ptrdiff_t half = width / 2;
    const auto last_start = static_cast<std::ptrdiff_t>(n) - width;
    const auto interior = central_weights(order, width, h);
    const double scale = std::pow(h, order);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<std::ptrdiff_t>(i);
        const std::ptrdiff_t start = std::clamp<std::ptrdiff_t>(ii - half, 0, last_start);
        double acc = 0.0;
        if (start == ii - half) {
            for (int j = 0; j < width; ++j) acc += interior[j] * values[static_cast<std::size_t>(start + j)];
        } else {
            for (int j = 0; j < width; ++j) offsets[j] = static_cast<double>(start + j - ii);
            const auto w = fornberg_weights(0.0, offsets, order)[order];
            for (int j = 0; j < width; ++j) acc += w[j] * values[static_cast<std::size_t>(start + j)];
            acc /= scale;
        }
        out[i] = acc;
    }
    return out;
}

double trapezoid(std::span<const double> v, double h) {
    if (v.size() < 2) return 0.0;
    double acc = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) acc += v[i];
    return acc * h;
}

double simpson(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    if (n < 4) return trapezoid(v, h);
    const std::size_t intervals = n - 1;
    std::size_t simpson_end = intervals % 2 == 0 ? n - 1 : n - 4;
    double acc = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
        acc += v[i] + 4.0 * v[i + 1] + v[i + 2];
    }
    acc *= h / 3.0;
    if (simpson_end != n - 1) {
        acc += 3.0 * h / 8.0 * (v[n - 4] + 3.0 * v[n - 3] + 3.0 * v[n - 2] + v[n - 1]);
    }
    return acc;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
    const auto base = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels * order));
    rule.weights.reserve(static_cast<std::size_t>(panels * order));
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        for (int i = 0; i < order; ++i) {
            rule.nodes.push_back(lo + 0.5 * width * (base.nodes[i] + 1.0));
            rule.weights.push_back(0.5 * width * base.weights[i]);
        }
    }
    return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
    return acc;
}

double sigmoid(double s) noexcept {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double softplus(double s) noexcept {
    return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double log_sigmoid(double s) noexcept { return -softplus(-s); }

}  // namespace kenergy
