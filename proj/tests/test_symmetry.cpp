#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kenergy/error.hpp"
#include "kenergy/functionals.hpp"
#include "kenergy/symmetry.hpp"
#include "support.hpp"

using namespace kenergy;

namespace {

// Max over x-nodes of |a - b - (a(0) - b(0))|: equality up to a constant.
double distance_mod_constants(const SymplecticPotential& a, const SymplecticPotential& b) {
    const double c = a.f_values()[0] - b.f_values()[0];
    double err = 0.0;
    for (std::size_t i = 0; i < a.f_values().size(); ++i) err = std::max(err, std::abs(a.f_values()[i] - b.f_values()[i] - c));
    return err;
}

}  // namespace

TEST_CASE("orbit with zero strength is constant") {
    const auto u = testing::CorrectionGenerator(51).next().potential();
    const auto path = orbit_geodesic(u, 0.0);
    for (double t : {-1.0, 0.5, 3.0}) CHECK(distance_mod_constants(path.slice(t), u) < 1e-14);
    for (double h : orbit_hamiltonian(path, 0.7)) CHECK(h == 0.0);
}

TEST_CASE("orbit of the round metric dualizes to translated softplus") {
    const auto path = orbit_geodesic(SymplecticPotential::round(), 1.0);
    const auto grid = default_s_grid();
    for (double t : {-0.8, 0.25, 1.5}) {
        const auto psi = legendre_to_s(path.slice(t), grid);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size; i += 11) err = std::max(err, std::abs(psi.slopes()[i] - testing::exact_logistic(grid[i] + 2.0 * t)));
        CHECK(err < 1e-9);
        CHECK(std::abs(energy_E(psi.relative_potential(), psi)) < 1e-9);
    }
}

TEST_CASE("orbit group law") {
    const auto u = testing::CorrectionGenerator(52).next().potential();
    const auto path = orbit_geodesic(u, 0.6);
    const auto first = path.slice(0.4);
    const auto composed = orbit_geodesic(first, 0.6).slice(0.7);
    CHECK(distance_mod_constants(composed, path.slice(1.1)) < 1e-12);
}

TEST_CASE("orbit Hamiltonian has vanishing average and matches the time derivative") {
    const auto path = orbit_geodesic(SymplecticPotential::round(), 1.0);
    const auto h = orbit_hamiltonian(path, 0.0);
    const auto& nodes = path.base().nodes();
    for (std::size_t i = 0; i < nodes.size; ++i) CHECK(h[i] == doctest::Approx(nodes[i] - 0.5).epsilon(1e-14));
    for (double t : {-1.0, 0.0, 0.8}) {
        const auto psi = legendre_to_s(path.slice(t));
        CHECK(std::abs(integrate_X(moment_map(psi), psi.density()) - 0.5) < 1e-9);
        CHECK(hamiltonian_defect(path, t) <= 1e-8);
    }
    const auto random = orbit_geodesic(testing::CorrectionGenerator(53).next().potential(), -0.7);
    CHECK(hamiltonian_defect(random, 0.3) <= 1e-8);
}

TEST_CASE("complex Hamiltonians at the round metric") {
    const auto round = SymplecticPotential::round();
    CHECK(complex_hamiltonian_check({0, {1.0}}, round) < 1e-10);
    // x - 1/2 = P_1(2x - 1) / 2.
    CHECK(complex_hamiltonian_check({0, {0.0, 0.5}}, round) <= 1e-6);
    CHECK(complex_hamiltonian_check({1, {1.0}}, round) <= 1e-6);
    CHECK(complex_hamiltonian_check({-1, {1.0}}, round) <= 1e-6);
    CHECK(complex_hamiltonian_check({0, {0.0, 0.0, 1.0}}, round) > 1e-2);
    CHECK(complex_hamiltonian_check({1, {0.0, 1.0}}, round) > 1e-2);
    CHECK(complex_hamiltonian_check({2, {1.0}}, round) > 1e-2);
}

TEST_CASE("Lichnerowicz operator at the round metric") {
    const auto op = lichnerowicz_assemble(SymplecticPotential::round(), 8);
    CHECK(kernel_dimension(op) == 4);
    CHECK(kernel_dimension(op, 0) == 2);
    CHECK(kernel_dimension(op, 1) == 1);
    CHECK(kernel_dimension(op, -1) == 1);
    CHECK(kernel_dimension(op, 2) == 0);
    CHECK(stable_kernel_dimension(SymplecticPotential::round(), 8) == 4);
    CHECK(op.min_eigenvalue() >= -1e-8 * op.max_eigenvalue());
    CHECK(op.realness_residual() <= 1e-8 * op.max_eigenvalue());
    CHECK(op.symmetry_residual() <= 1e-8 * op.max_eigenvalue());
    // Spectral gap above the kernel survives refinement.
    auto gap = [](const LichnerowiczOperator& o) {
        std::vector<double> all;
        for (const auto& b : o.blocks)
            for (Eigen::Index i = 0; i < b.eigenvalues.size(); ++i) all.push_back(b.eigenvalues[i]);
        std::sort(all.begin(), all.end());
        return all[4];
    };
    const double g8 = gap(op);
    const double g10 = gap(lichnerowicz_assemble(SymplecticPotential::round(), 10));
    CHECK(g8 > 1.0);
    CHECK(g10 == doctest::Approx(g8).epsilon(1e-6));
    CHECK_THROWS_AS(op.block(9), InputError);
}

TEST_CASE("Lichnerowicz operator at a non-CSC metric") {
    const auto u = testing::CorrectionGenerator(54).next().potential();
    const auto op = lichnerowicz_assemble(u, 8);
    CHECK(op.min_eigenvalue() >= -1e-8 * op.max_eigenvalue());
    CHECK(op.symmetry_residual() <= 1e-8 * op.max_eigenvalue());
    // Constants and the rotation Hamiltonian x - 1/2 (mean zero for every
    // torus-invariant metric) span the m = 0 kernel.
    CHECK(stable_kernel_dimension(u, 8, 0) == 2);
    CHECK(complex_hamiltonian_check({0, {0.0, 0.5}}, u) <= 1e-6);
    CHECK(kernel_dimension(op, 1) == 0);
    CHECK(std::isfinite(op.realness_residual()));
}

TEST_CASE("F along the orbit is convex with a unique interior minimizer") {
    const auto path = orbit_geodesic(SymplecticPotential::round(), 1.0);
    const auto grid = default_s_grid();
    const auto round_mu = RadialPotential::reference(grid).density();
    const auto scan = orbit_flatness_and_F(path, round_mu, -2.0, 2.0, 21);
    CHECK(scan.flatness <= 1e-6);
    CHECK(scan.min_second_difference > 0.0);
    CHECK(std::abs(scan.minimizer) < 1e-5);
    CHECK(scan.grows_at_both_ends);
    for (double e : scan.E) CHECK(std::abs(e) < 1e-9);

    // mu = area form of the orbit slice at t = 0.4 moves the minimizer there.
    const auto shifted_mu = legendre_to_s(path.slice(0.4), grid).density();
    const auto moved = orbit_flatness_and_F(path, shifted_mu, -2.0, 2.0, 21);
    CHECK(moved.minimizer == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(moved.min_second_difference > 0.0);
    CHECK(moved.grows_at_both_ends);

    CHECK_THROWS_AS(orbit_flatness_and_F(path, round_mu, 1.0, 1.0, 21), InputError);
}
