#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "kenergy/bergman.hpp"
#include "kenergy/error.hpp"
#include "kenergy/symmetry.hpp"
#include "support.hpp"

using namespace kenergy;

namespace {

constexpr double kPi = std::numbers::pi;

// B at radius r for phi = b r^2 from Simpson coefficients, independent of the library.
double quadratic_B_oracle(double b, double k, double r) {
    double K = 0.0;
    double term = 1.0;
    for (int m = 0; m < 200; ++m) {
        const double c = 4.0 * kPi * testing::simpson([&](double t) { return std::pow(t, 2 * m + 1) * std::exp(-k * b * t * t); }, 0.0, 1.0, 4000);
        K += term / c;
        term *= r * r;
        if (term < 1e-30) break;
    }
    return K * std::exp(-k * b * r * r);
}

const ParameterSquare kTau{{0.0, 0.0}, 0.1, 3};
const ParameterSquare kZ{{0.3, 0.0}, 0.15, 3};

}  // namespace

TEST_CASE("coefficients of the flat and Gaussian weights") {
    const auto flat = bergman_coefficients(RadialWeight::polynomial({0.0}), 7.0, 20);
    for (std::size_t m = 0; m <= 20; ++m) CHECK(flat.coefficient(m) == doctest::Approx(2.0 * kPi / (m + 1.0)).epsilon(1e-12));
    for (double k : {0.5, 5.0, 50.0}) {
        const auto g = bergman_coefficients(RadialWeight::polynomial({0.0, 1.0}), k, 4);
        CHECK(g.coefficient(0) == doctest::Approx(2.0 * kPi * (1.0 - std::exp(-k)) / k).epsilon(1e-12));
        for (std::size_t m = 0; m <= 4; ++m) CHECK(g.coefficient(m) > 0.0);
    }
}

TEST_CASE("B at the origin of the Gaussian weight") {
    const auto phi = RadialWeight::polynomial({0.0, 1.0});
    for (double k : {5.0, 20.0, 100.0}) {
        const auto kernel = certified_kernel(phi, k, 0.0);
        CHECK(bergman_B(kernel, phi, 0.0) == doctest::Approx(k / (2.0 * kPi * (1.0 - std::exp(-k)))).epsilon(1e-10));
    }
    const auto kernel = certified_kernel(phi, 20.0, 0.5);
    for (double r : {0.1, 0.3, 0.5}) CHECK(bergman_B(kernel, phi, r) == doctest::Approx(quadratic_B_oracle(1.0, 20.0, r)).epsilon(1e-7));
}

TEST_CASE("B is gauge invariant and positive") {
    const auto phi = RadialWeight::polynomial({0.0, 1.0, 0.5});
    const auto shifted = RadialWeight::polynomial({2.5, 1.0, 0.5});
    for (double k : {5.0, 50.0}) {
        const auto a = certified_kernel(phi, k, 0.6);
        const auto b = certified_kernel(shifted, k, 0.6);
        for (double r : {0.0, 0.2, 0.6}) {
            const double ba = bergman_B(a, phi, r);
            CHECK(ba > 0.0);
            CHECK(bergman_B(b, shifted, r) == doctest::Approx(ba).epsilon(1e-10));
        }
    }
}

TEST_CASE("truncated kernel is monotone in the order and the tail is certified") {
    const auto phi = RadialWeight::polynomial({0.0, 1.0});
    const auto full = bergman_coefficients(phi, 10.0, 256);
    double previous = -1e300;
    for (std::size_t order : {4, 8, 16, 32, 64}) {
        const auto part = bergman_coefficients(phi, 10.0, order);
        const double v = log_bergman_kernel(part, 0.7).log_K;
        CHECK(v >= previous);
        previous = v;
    }
    const auto certified = certified_kernel(phi, 10.0, 0.7);
    const auto value = log_bergman_kernel(certified, 0.7);
    CHECK(value.tail_bound < 1e-12);
    CHECK(std::abs(std::exp(log_bergman_kernel(full, 0.7).log_K - value.log_K) - 1.0) < 1e-10);
}

TEST_CASE("scaled density converges to the curvature density") {
    const std::vector<double> ks{5, 10, 20, 50, 100};
    const auto quad = density_limit_check(RadialWeight::polynomial({0.0, 1.0}), 0.0, ks);
    CHECK(quad.limit == doctest::Approx(1.0 / (2.0 * kPi)));
    CHECK(quad.gaps.back() <= 0.02 / (2.0 * kPi));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double exact = 1.0 / (2.0 * kPi * (1.0 - std::exp(-ks[i])));
        CHECK(std::abs(quad.gaps[i] - std::abs(exact - 1.0 / (2.0 * kPi))) <= 1e-10 * quad.limit);
    }
    CHECK(density_limit_check(RadialWeight::polynomial({0.0, 1.0}), 0.3, ks).limit == doctest::Approx(1.0 / (2.0 * kPi)));
    CHECK(density_limit_check(RadialWeight::polynomial({0.0, 2.0}), 0.0, ks).limit == doctest::Approx(1.0 / kPi));

    // Interior point, smooth strictly subharmonic weight: each doubling of k
    // shrinks the gap by at least 1.5.
    const auto quartic = density_limit_check(RadialWeight::polynomial({0.0, 1.0, 1.0}), 0.3, {10, 20, 40, 80});
    CHECK(quartic.limit == doctest::Approx((1.0 + 4.0 * 0.09) / (2.0 * kPi)).epsilon(1e-8));
    for (std::size_t i = 1; i < quartic.gaps.size(); ++i) CHECK(quartic.gaps[i - 1] >= 1.5 * quartic.gaps[i]);
    CHECK(quartic.gaps.back() <= 0.02 * quartic.limit);

    const RadialWeight lipschitz([](double r) { return r * r + std::pow(std::max(r - 0.2, 0.0), 3); }, Smoothness::LipschitzSecond);
    const auto lip = density_limit_check(lipschitz, 0.3, ks);
    for (std::size_t i = 1; i < lip.gaps.size(); ++i) CHECK(lip.gaps[i] < lip.gaps[i - 1]);

    CHECK_THROWS_AS(density_limit_check(RadialWeight::polynomial({0.0, 1.0}), 0.95, ks), InputError);
    CHECK_THROWS_AS(bergman_coefficients(RadialWeight::polynomial({0.0, 1.0}), -1.0, 4), InputError);
}

TEST_CASE("subharmonicity of radial weights") {
    const UniformGrid r(0.0, 0.95, 96);
    CHECK(RadialWeight::polynomial({0.0, 1.0, 1.0}).subharmonic_on(r));
    CHECK_FALSE(RadialWeight::polynomial({0.0, -1.0}).subharmonic_on(r));
    const auto phi = RadialWeight::polynomial({0.0, 1.0, 1.0});
    CHECK(phi.ddc_density(0.3) == doctest::Approx(1.0 + 4.0 * 0.09).epsilon(1e-6));
}

TEST_CASE("log K is plurisubharmonic on certified families") {
    const auto independent = WeightFamily::tau_independent(RadialWeight::polynomial({0.0, 1.0, 1.0}), kTau, kZ);
    const auto r1 = log_psh_check(independent, 50.0);
    CHECK(r1.certified);
    CHECK(r1.min_value >= -1e-6 * r1.scale);
    const auto h = complex_hessian([&](std::complex<double> t, std::complex<double> z) { return independent.log_K(t, z, 50.0); },
                                   {0.0, 0.0}, {0.3, 0.0}, kHessianStep);
    CHECK(std::abs(h.tt) < 1e-8 * h.max_abs_eigenvalue());
    CHECK(std::abs(h.tz) < 1e-8 * h.max_abs_eigenvalue());

    const auto translated = log_psh_check(WeightFamily::translated_quadratic(kTau, kZ), 50.0);
    CHECK(translated.certified);
    CHECK(translated.min_value >= -1e-6 * translated.scale);

    const auto augmented = log_psh_check(WeightFamily::quartic(true, kTau, kZ), 50.0);
    CHECK(augmented.certified);
    CHECK(augmented.min_value >= -1e-6 * augmented.scale);

    // Without |tau|^2 the quartic weight fails its precondition: no verdict.
    const auto plain = log_psh_check(WeightFamily::quartic(false, kTau, kZ), 50.0);
    CHECK_FALSE(plain.certified);
    CHECK(plain.note.find("inconclusive") != std::string::npos);
}

TEST_CASE("T_k is nonnegative on Monge-Ampere families") {
    const auto independent = tk_positivity(WeightFamily::tau_independent(RadialWeight::polynomial({0.0, 1.0}), kTau, kZ), 50.0);
    CHECK(independent.certified);
    CHECK(std::abs(independent.min_value) <= 1e-8 * independent.scale);

    const auto translated = tk_positivity(WeightFamily::translated_quadratic(kTau, kZ), 50.0);
    CHECK(translated.certified);
    CHECK(translated.min_value >= -1e-4 * translated.scale);

    const ParameterSquare tau{{0.5, 0.0}, 0.1, 3};
    const auto orbit = orbit_geodesic(SymplecticPotential::round(), 0.5).as_geodesic(0.0, 1.0, 64);
    const auto orbit_report = tk_positivity(WeightFamily::geodesic_localization(orbit, tau, kZ), 50.0);
    CHECK(orbit_report.certified);
    CHECK(orbit_report.min_value >= -1e-6 * orbit_report.scale);

    testing::CorrectionGenerator gen(41);
    const auto path = weak_geodesic(gen.next().potential(), gen.next().potential(), 64);
    const auto family = WeightFamily::geodesic_localization(path, tau, kZ);
    const auto tk = tk_positivity(family, 50.0);
    CHECK(tk.certified);
    CHECK(tk.min_value >= -1e-4 * tk.scale);
    const auto psh = log_psh_check(family, 50.0);
    CHECK(psh.min_value >= -1e-6 * psh.scale);

    const auto quartic = tk_positivity(WeightFamily::quartic(true, kTau, kZ), 50.0);
    CHECK_FALSE(quartic.certified);

    const ParameterSquare outside{{0.95, 0.0}, 0.1, 3};
    CHECK_THROWS_AS(WeightFamily::geodesic_localization(path, outside, kZ), InputError);
}
