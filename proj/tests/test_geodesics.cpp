#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kenergy/error.hpp"
#include "kenergy/functionals.hpp"
#include "kenergy/geodesics.hpp"
#include "kenergy/symmetry.hpp"
#include "support.hpp"

using namespace kenergy;

namespace {

// d^2 M / dt^2 along the linear path = int (v'' / u_t'')^2 dx.
double second_variation_oracle(const testing::SmoothCorrection& c0, const testing::SmoothCorrection& c1, double t) {
    return testing::simpson(
        [&](double x) {
            const double q = x * (1.0 - x);
            const double v2 = c1.second(x) - c0.second(x);
            const double f2 = (1.0 - t) * c0.second(x) + t * c1.second(x);
            // v'' / u'' = q v'' / (1 + q f'').
            const double r = q * v2 / (1.0 + q * f2);
            return r * r;
        },
        0.0, 1.0, 20000);
}

}  // namespace

TEST_CASE("a constant path and a constant shift are trivial geodesics") {
    const auto u = testing::CorrectionGenerator(1).next().potential();
    const auto flat = weak_geodesic(u, u, 16);
    CHECK(hrma_residual(flat).value < 1e-12);
    CHECK(geodesic_ode_residual(flat).value < 1e-12);
    const auto shift = weak_geodesic(u, u.plus_affine(0.5, 0.0), 16);
    CHECK(hrma_residual(shift).value < 1e-10);
    CHECK(geodesic_ode_residual(shift).value < 1e-10);
    const auto m = mabuchi_along(shift);
    for (double v : m) CHECK(v == doctest::Approx(m.front()).epsilon(1e-10));
    const auto fiber = second_variation_fiber_integral(shift, 0.5);
    CHECK(std::abs(fiber.value) < 1e-8 * fiber.scale);
}

TEST_CASE("slices are linear in t and independent of the t-grid") {
    testing::CorrectionGenerator gen(2);
    const auto u0 = gen.next().potential();
    const auto u1 = gen.next().potential();
    const auto coarse = weak_geodesic(u0, u1, 8);
    const auto fine = weak_geodesic(u0, u1, 64);
    CHECK(coarse.t_grid().size == 9);
    const auto a = coarse.slice(0.375);
    const auto b = fine.slice(0.375);
    for (std::size_t i = 0; i < a.f_values().size(); ++i) {
        REQUIRE(a.f_values()[i] == b.f_values()[i]);
        CHECK(a.f_values()[i] == doctest::Approx(0.625 * u0.f_values()[i] + 0.375 * u1.f_values()[i]).epsilon(1e-15));
    }
    const auto v = coarse.velocity();
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(u1.f_values()[i] - u0.f_values()[i]));
}

TEST_CASE("geodesic to a rotated round metric is the orbit") {
    const double a = 0.7;
    const auto round = SymplecticPotential::round();
    const auto path = weak_geodesic(round, round.plus_affine(0.0, -2.0 * a));
    const auto orbit = orbit_geodesic(round, a);
    for (double t : {0.2, 0.5, 0.9}) {
        const auto p = path.slice(t);
        const auto o = orbit.slice(t);
        const double shift = o.f_values()[0] - p.f_values()[0];
        double err = 0.0;
        for (std::size_t i = 0; i < p.f_values().size(); ++i) err = std::max(err, std::abs(o.f_values()[i] - p.f_values()[i] - shift));
        CHECK(err < 1e-8);
    }
    CHECK(hrma_residual(path).value < 1e-6);
    CHECK(geodesic_ode_residual(path).value < 1e-4);
    const auto m = mabuchi_along(path);
    for (double v : m) CHECK(std::abs(v) < 1e-6);
    const auto fiber = second_variation_fiber_integral(path, 0.5);
    CHECK(std::abs(fiber.value) < 1e-6);
}

TEST_CASE("random geodesics satisfy the Monge-Ampere and geodesic equations, improving under refinement") {
    testing::CorrectionGenerator gen(3);
    const auto u0 = gen.next().potential();
    const auto u1 = gen.next().potential();
    const auto coarse = complexify(weak_geodesic(u0, u1, 32), default_s_grid(1024));
    const auto fine = complexify(weak_geodesic(u0, u1, 64), default_s_grid(2048));
    const auto h0 = hrma_residual(coarse);
    const auto h1 = hrma_residual(fine);
    const auto o0 = geodesic_ode_residual(coarse);
    const auto o1 = geodesic_ode_residual(fine);
    CHECK(h1.value <= 1e-4);
    CHECK(o1.value <= 1e-3);
    CHECK(h1.value <= 0.5 * h0.value);
    CHECK(o1.value <= 0.5 * o0.value);
    CHECK(h1.excluded == 0);
    REQUIRE(h1.by_time.size() == 65);
    CHECK(std::isnan(h1.by_time.front()));
    CHECK(std::isnan(o1.by_time.back()));
    CHECK(joint_convexity_min_eigenvalue(fine) >= -1e-3);
}

TEST_CASE("K-energy is convex and continuous along random geodesics") {
    testing::CorrectionGenerator gen(4);
    for (int trial = 0; trial < 4; ++trial) {
        const auto u0 = gen.next().potential();
        const auto u1 = gen.next().potential();
        const auto path = weak_geodesic(u0, u1, 32);
        const auto m = mabuchi_along(path);
        double scale = 0.0;
        for (double v : m) scale = std::max(scale, std::abs(v));
        for (std::size_t j = 1; j + 1 < m.size(); ++j) CHECK(m[j - 1] - 2.0 * m[j] + m[j + 1] >= -1e-6 * (1.0 + scale));
        CHECK(std::abs(mabuchi(path.slice(1e-6)) - mabuchi(u0)) < 1e-4);
        CHECK(std::abs(mabuchi(path.slice(1.0 - 1e-6)) - mabuchi(u1)) < 1e-4);
    }
}

TEST_CASE("fiber integral of T equals the second variation of M") {
    testing::CorrectionGenerator gen(5);
    for (int trial = 0; trial < 3; ++trial) {
        const auto c0 = gen.next();
        const auto c1 = gen.next();
        const auto path = weak_geodesic(c0.potential(), c1.potential());
        const auto fiber = second_variation_fiber_integral(path, 0.5);
        const double oracle = second_variation_oracle(c0, c1, 0.5);
        CHECK(fiber.value == doctest::Approx(oracle).epsilon(1e-3));
        CHECK(fiber.min_integrand >= -1e-6 * fiber.scale);
    }
}

TEST_CASE("second variation needs an interior time") {
    const auto u = SymplecticPotential::round();
    const auto path = weak_geodesic(u, u.plus_affine(0.0, -1.0));
    CHECK_THROWS_AS(second_variation_fiber_integral(path, 0.0), InputError);
    CHECK_THROWS_AS(weak_geodesic(u, SymplecticPotential::round(129)), InvalidPotential);
}
