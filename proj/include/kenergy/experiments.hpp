#pragma once

// Experiment plumbing shared by the command-line tool and the acceptance
// suite: configuration files, the seeded potential ensemble, the perturbed
// functional M + sF and its minimiser, and CSV/SVG writers.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kenergy/radial_geometry.hpp"

namespace kenergy {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t nx = kDefaultNx;
    std::size_t ns = kDefaultNs;
    double s_max = kDefaultSMax;
    std::size_t steps = 64;          // t-steps per geodesic
    std::size_t pairs = 20;          // random endpoint pairs
    double t_min = -2.0;             // orbit scan range
    double t_max = 2.0;
    std::size_t t_samples = 41;
    double orbit_strength = 1.0;
    std::vector<double> k_list{5, 10, 20, 50, 100};
    std::vector<double> z_list{0.0, 0.3};
    std::vector<double> s_list{0.3, 0.1, 0.03, 0.01};
    std::size_t starts = 3;
    std::size_t degree = 8;
    std::string mu = "random";       // reference measure for F: round | random
    double convexity_tol = 1e-6;
    double joint_tol = 1e-3;         // discrete (t, s) Hessian of Psi, relative to its largest entry
    double chen_tol = 1e-6;
    double hrma_tol = 1e-4;
    double ode_tol = 1e-3;
    double pairwise_tol = 1e-4;
    std::string u0_file;             // optional endpoint files for `geodesic`
    std::string u1_file;
    std::filesystem::path out = "kenergy_out";
    bool svg = true;

    UniformGrid s_grid() const { return UniformGrid(-s_max, s_max, ns); }

    /// `key = value` lines, `#` comments. Unknown keys and malformed values
    /// raise InputError naming the line.
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;
};

/// Seeded band-limited potentials f = sum_{j<=8} a_j sin(j pi x), a_j uniform
/// in [-0.2/j^2, 0.2/j^2]. Draws whose Hessian factor 1 + x(1-x) f'' dips
/// below `margin` are rejected and redrawn; below about 0.4 the area form
/// varies too fast in s for the default s-grid.
class PotentialEnsemble {
public:
    static constexpr int kModes = 8;

    explicit PotentialEnsemble(std::uint64_t seed, std::size_t nx = kDefaultNx, double margin = 0.4);

    SymplecticPotential next();
    std::vector<double> next_coefficients();
    std::size_t rejected() const noexcept { return rejected_; }

    static double correction(const std::vector<double>& a, double x);
    static double min_hessian_factor(const std::vector<double>& a);

private:
    std::mt19937_64 rng_;
    std::size_t nx_;
    double margin_;
    std::size_t rejected_ = 0;
};

/// M_s = M + s F on potentials f = b_0 x + sum_j b_j sin(j pi x) / (j pi)^2,
/// normalised so that E = 0.
class PerturbedFunctional {
public:
    static constexpr int kModes = 8;
    static constexpr int kDimension = kModes + 1;

    PerturbedFunctional(double s, MetricDensity mu, std::size_t nx = kDefaultNx);

    double s() const noexcept { return s_; }
    SymplecticPotential potential(const Eigen::VectorXd& b) const;
    double value(const Eigen::VectorXd& b) const;
    /// Gradient from dM = int w (R - 2) dx and dF = int w dx - int w(x(s)) mu ds.
    Eigen::VectorXd gradient(const Eigen::VectorXd& b) const;
    /// Exact second variation of M plus s times a centred-difference Hessian of F.
    Eigen::MatrixXd hessian(const Eigen::VectorXd& b) const;

    static double basis(int i, double x);
    static double basis_second(int i, double x);

private:
    Eigen::VectorXd f_gradient(const SymplecticPotential& u) const;

    double s_;
    MetricDensity mu_;
    std::size_t nx_;
};

struct MinimizerState {
    Eigen::VectorXd coeffs;
    double objective = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::string stop_reason;
    std::vector<double> history;  // objective after each accepted step
};

struct MinimizerOptions {
    double gradient_tol = 1e-8;
    std::size_t max_iterations = 10000;
};

/// Preconditioned gradient descent with Armijo backtracking. The
/// preconditioner is the Hessian at the start, refreshed when a step is
/// rejected; only steps that do not increase the objective are accepted.
MinimizerState minimize_perturbed(const PerturbedFunctional& functional, Eigen::VectorXd start,
                                  const MinimizerOptions& options = {});

struct UniquenessRow {
    double s = 0.0;
    std::size_t starts = 0;
    std::size_t converged = 0;
    double max_pairwise = 0.0;
    double distance_to_orbit = 0.0;
    double objective = 0.0;
    std::size_t iterations = 0;
};

struct UniquenessReport {
    double orbit_minimizer = 0.0;  // t of the F-minimiser along the orbit of the round metric
    std::vector<UniquenessRow> rows;
    bool unique = false;
    bool monotone = false;
};

/// Reference measure for F: the round area form, or the area form of a
/// seeded ensemble potential.
MetricDensity reference_measure(const std::string& kind, std::uint64_t seed, const UniformGrid& s_grid,
                                std::size_t nx = kDefaultNx);

UniquenessReport run_uniqueness(const std::vector<double>& s_list, std::size_t starts, std::uint64_t seed,
                                const MetricDensity& mu, double pairwise_tol = 1e-4,
                                std::size_t nx = kDefaultNx);

/// Random admissible starting coefficients for the perturbed functional.
Eigen::VectorXd random_start(std::mt19937_64& rng);

// Output helpers. Numbers are written with 12 significant digits so that
// reruns produce identical bytes.
std::string format_number(double v);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line plot (or stem plot) with axes labels; convenience output only.
void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<SvgSeries>& series, bool stems = false);

}  // namespace kenergy
