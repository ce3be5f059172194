#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "kenergy/error.hpp"
#include "kenergy/radial_geometry.hpp"
#include "support.hpp"

using namespace kenergy;

TEST_CASE("round metric has constant scalar curvature 2") {
    const auto u = SymplecticPotential::round();
    for (double x : {0.0, 1e-3, 0.1, 0.37, 0.5, 0.9, 1.0}) CHECK(u.scalar_curvature_at(x) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(total_scalar_curvature(u) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("round potential dualizes to softplus") {
    const auto grid = default_s_grid();
    const auto psi = legendre_to_s(SymplecticPotential::round(), grid);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double s = grid[i];
        err = std::max({err, std::abs(psi.values()[i] - testing::exact_softplus(s)), std::abs(psi.slopes()[i] - testing::exact_logistic(s)),
                        std::abs(psi.second_derivative()[i] - testing::exact_logistic_density(s))});
    }
    CHECK(err < 1e-12);
}

TEST_CASE("subtracting a x from u translates psi by a") {
    const auto grid = default_s_grid();
    for (double a : {-1.5, 0.4, 2.0}) {
        const auto psi = legendre_to_s(SymplecticPotential::round().plus_affine(0.0, -a), grid);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size; i += 7) {
            err = std::max(err, std::abs(psi.values()[i] - testing::exact_softplus(grid[i] + a)));
        }
        CHECK(err < 1e-8);
    }
}

TEST_CASE("adding a constant to u subtracts it from psi") {
    const auto u = testing::CorrectionGenerator(3).next().potential();
    const auto psi = legendre_to_s(u);
    const auto shifted = legendre_to_s(u.plus_affine(0.7, 0.0));
    double err = 0.0;
    for (std::size_t i = 0; i < psi.values().size(); ++i) err = std::max(err, std::abs(shifted.values()[i] - psi.values()[i] + 0.7));
    CHECK(err < 1e-12);
}

TEST_CASE("Legendre transform matches a brute-force supremum") {
    const auto c = testing::CorrectionGenerator(11).next();
    const auto u = c.potential();
    auto u_exact = [&](double x) { return x * std::log(x) + (1 - x) * std::log(1 - x) + c.value(x); };
    for (double s : {-6.0, -1.3, 0.0, 0.8, 4.5}) {
        // Coarse scan, then golden-section refinement of x s - u(x).
        const int n = 20000;
        int best = 1;
        double best_val = -1e300;
        for (int i = 1; i < n; ++i) {
            const double x = static_cast<double>(i) / n;
            const double v = x * s - u_exact(x);
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        double lo = std::max(1e-12, (best - 1.0) / n);
        double hi = std::min(1.0 - 1e-12, (best + 1.0) / n);
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int k = 0; k < 200; ++k) {
            const double m1 = hi - r * (hi - lo);
            const double m2 = lo + r * (hi - lo);
            if (m1 * s - u_exact(m1) > m2 * s - u_exact(m2)) hi = m2;
            else lo = m1;
        }
        const double x = 0.5 * (lo + hi);
        const auto p = u.dual_at(s);
        CHECK(p.psi == doctest::Approx(x * s - u_exact(x)).epsilon(1e-9));
        CHECK(p.x == doctest::Approx(x).epsilon(1e-7));
    }
}

TEST_CASE("Gauss-Bonnet and unit mass hold for random potentials") {
    testing::CorrectionGenerator gen(2024);
    for (int trial = 0; trial < 20; ++trial) {
        CAPTURE(trial);
        const auto u = gen.next().potential();
        CHECK(std::abs(total_scalar_curvature(u) - 2.0) <= 1e-6);
        const auto psi = legendre_to_s(u);
        CHECK(std::abs(total_mass(psi.density()) - 1.0) <= 1e-8);
        const auto ric = ricci_density(psi);
        CHECK(std::abs(total_mass(ric.density) - 2.0) <= 1e-6);
    }
}

TEST_CASE("scalar curvature from the Ricci density agrees with the symplectic formula") {
    const auto u = testing::CorrectionGenerator(5).next().potential();
    const auto psi = legendre_to_s(u);
    const auto ric = ricci_density(psi);
    const auto& grid = psi.grid();
    for (std::size_t i = grid.size / 4; i < 3 * grid.size / 4; i += 97) {
        const double r_complex = ric.density.values[i] / psi.second_derivative()[i];
        const double r_symp = u.scalar_curvature_at(psi.slopes()[i]);
        CHECK(r_complex == doctest::Approx(r_symp).epsilon(1e-5));
    }
}

TEST_CASE("Ricci density of the round metric") {
    const auto grid = default_s_grid();
    const auto ric = ricci_density(RadialPotential::reference(grid));
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size; i += 5) err = std::max(err, std::abs(ric.density.values[i] - 2.0 * testing::exact_logistic_density(grid[i])));
    CHECK(err < 1e-6);
    CHECK(total_mass(ric.density) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("Legendre round trip") {
    testing::CorrectionGenerator gen(77);
    for (int trial = 0; trial < 5; ++trial) {
        const auto c = gen.next();
        const auto u = c.potential();
        const auto psi = legendre_to_s(u);
        const auto back = legendre_to_x(psi);
        const auto again = legendre_to_s(back, psi.grid());
        double err = 0.0;
        const auto& grid = psi.grid();
        for (std::size_t i = 0; i < grid.size; ++i) {
            if (std::abs(grid[i]) > 10.0) continue;
            err = std::max(err, std::abs(again.values()[i] - psi.values()[i]));
        }
        CHECK(err <= 1e-6);
        double ferr = 0.0;
        for (double x : {0.05, 0.3, 0.5, 0.71, 0.95}) ferr = std::max(ferr, std::abs(back.correction(x) - c.value(x)));
        CHECK(ferr <= 1e-6);
    }
}

TEST_CASE("pushforward of the area form is Lebesgue measure") {
    const auto grid = default_s_grid(4096);
    const auto psi = legendre_to_s(testing::CorrectionGenerator(8).next().potential(), grid);
    const auto rho = psi.density();
    double cdf = rho.tail_left;
    double worst = std::abs(cdf - psi.slopes()[0]);
    const double h = grid.step();
    for (std::size_t i = 1; i < grid.size; ++i) {
        cdf += 0.5 * h * (rho.values[i - 1] + rho.values[i]);
        worst = std::max(worst, std::abs(cdf - psi.slopes()[i]));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("integrals against the area form") {
    const auto psi = RadialPotential::reference(default_s_grid());
    const auto rho = psi.density();
    const std::vector<double> one(rho.values.size(), 1.0);
    const std::vector<double> three(rho.values.size(), 3.0);
    CHECK(integrate_X(one, rho) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate_X(three, rho) == doctest::Approx(3.0).epsilon(1e-10));
    const auto x = moment_map(psi);
    CHECK(integrate_X(x, rho) == doctest::Approx(0.5).epsilon(1e-9));
    for (std::size_t i = 1; i < x.size(); ++i) REQUIRE(x[i] > x[i - 1]);
    std::vector<double> bad(rho.values.size() - 1, 1.0);
    CHECK_THROWS_AS(integrate_X(bad, rho), InputError);
}

TEST_CASE("non-convex potentials are rejected") {
    CHECK_THROWS_AS(SymplecticPotential::from_correction([](double x) { return 2.0 * std::sin(3.0 * x); }), InvalidPotential);
    const auto grid = default_s_grid(101, 5.0);
    std::vector<double> concave(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) concave[i] = -grid[i] * grid[i];
    CHECK_THROWS_AS(RadialPotential::from_values(grid, concave), InvalidPotential);
}

TEST_CASE("potential CSV round trip and errors") {
    const auto dir = std::filesystem::temp_directory_path() / "kenergy_test_csv";
    std::filesystem::create_directories(dir);
    const auto u = testing::CorrectionGenerator(9).next().potential(129);
    write_potential_csv(dir / "u.csv", u);
    const auto v = read_potential_csv(dir / "u.csv");
    REQUIRE(v.f_values().size() == u.f_values().size());
    for (std::size_t i = 0; i < v.f_values().size(); ++i) CHECK(v.f_values()[i] == doctest::Approx(u.f_values()[i]).epsilon(1e-15));

    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return dir / name;
    };
    std::string good = "x,f\n";
    for (int i = 0; i <= 16; ++i) good += std::to_string(i / 16.0) + ",0\n";
    CHECK_NOTHROW(read_potential_csv(write("good.csv", good)));
    std::string bad_row = good;
    bad_row.replace(bad_row.find("0.250000,0"), 10, "0.250000,zz");
    try {
        read_potential_csv(write("bad_row.csv", bad_row));
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 5") != std::string::npos);
    }
    CHECK_THROWS_AS(read_potential_csv(write("header.csv", "a,b\n0,0\n1,0\n")), InputError);
    std::string uneven = "x,f\n0,0\n0.1,0\n0.5,0\n0.75,0\n1,0\n";
    CHECK_THROWS_AS(read_potential_csv(write("uneven.csv", uneven)), InputError);
    CHECK_THROWS_AS(read_potential_csv(dir / "missing.csv"), InputError);
}
