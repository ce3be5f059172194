#pragma once

// Test-side generators and closed-form oracles. Nothing here calls into the
// library's own ensemble or quadrature, so the checks stay independent.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "kenergy/radial_geometry.hpp"

namespace testing {

/// f(x) = sum_j a_j sin(j pi x) + b x(1 - x) with analytic derivatives.
struct SmoothCorrection {
    std::vector<double> a;
    double b = 0.0;

    double value(double x) const {
        double v = b * x * (1.0 - x);
        for (std::size_t j = 0; j < a.size(); ++j) v += a[j] * std::sin((j + 1) * std::numbers::pi * x);
        return v;
    }
    double second(double x) const {
        double v = -2.0 * b;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double w = (j + 1) * std::numbers::pi;
            v -= a[j] * w * w * std::sin(w * x);
        }
        return v;
    }
    /// 1 + x(1 - x) f'', the factor by which f changes u''.
    double hessian_factor(double x) const { return 1.0 + x * (1.0 - x) * second(x); }
    double min_hessian_factor() const {
        double worst = 1e300;
        for (int i = 0; i <= 4000; ++i) worst = std::min(worst, hessian_factor(i / 4000.0));
        return worst;
    }
    kenergy::SymplecticPotential potential(std::size_t nx = kenergy::kDefaultNx) const {
        return kenergy::SymplecticPotential::from_correction([this](double x) { return value(x); }, nx);
    }
};

/// Seeded draws of smooth corrections whose Hessian factor stays above 1/2.
class CorrectionGenerator {
public:
    explicit CorrectionGenerator(std::uint64_t seed, int modes = 5, double amplitude = 0.08)
        : rng_(seed), modes_(modes), amplitude_(amplitude) {}

    SmoothCorrection next() {
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (;;) {
            SmoothCorrection c;
            for (int j = 1; j <= modes_; ++j) c.a.push_back(amplitude_ * unit(rng_) / (j * j));
            c.b = 0.3 * unit(rng_);
            if (c.min_hessian_factor() >= 0.5) return c;
        }
    }

private:
    std::mt19937_64 rng_;
    int modes_;
    double amplitude_;
};

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

inline double exact_softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }
inline double exact_logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }
inline double exact_logistic_density(double s) { return exact_logistic(s) * exact_logistic(-s); }

}  // namespace testing
