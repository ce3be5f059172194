#include "kenergy/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kenergy/error.hpp"

namespace kenergy {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundaryRadius = 0.9;

}  // namespace

// ---------------------------------------------------------------------------
// RadialWeight

RadialWeight::RadialWeight(Profile value, Smoothness smoothness, Profile ddc)
    : value_(std::move(value)), ddc_(std::move(ddc)), smoothness_(smoothness) {
    if (!value_) throw InputError("radial weight needs a profile");
}

RadialWeight RadialWeight::polynomial(std::vector<double> coeffs) {
    auto value = [coeffs](double r) {
        const double r2 = r * r;
        double acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * r2 + coeffs[j];
        return acc;
    };
    // Delta r^{2j} = 4 j^2 r^{2(j-1)}, so phi_{z z-bar} = sum j^2 b_j r^{2(j-1)}.
    auto ddc = [coeffs](double r) {
        const double r2 = r * r;
        double acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 1;) {
            acc = acc * r2 + static_cast<double>(j * j) * coeffs[j];
        }
        return acc;
    };
    return RadialWeight(value, Smoothness::Smooth, ddc);
}

double RadialWeight::ddc_density(double r) const {
    if (ddc_) return ddc_(r);
    // Five-point Laplacian at the point (r, 0) of the plane.
    const double h = 1e-3;
    const double centre = value_(r);
    const double sum = value_(std::abs(r + h)) + value_(std::abs(r - h)) + 2.0 * value_(std::hypot(r, h));
    return 0.25 * (sum - 4.0 * centre) / (h * h);
}

bool RadialWeight::subharmonic_on(const UniformGrid& r_grid, double tol) const {
    for (std::size_t i = 0; i < r_grid.size; ++i) {
        if (ddc_density(r_grid[i]) < -tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Coefficients and kernel values

double BergmanKernel::coefficient(std::size_t m) const { return std::exp(log_c_.at(m)); }

BergmanKernel bergman_coefficients(const RadialWeight& phi, double k, std::size_t max_order) {
    if (!(k > 0.0)) throw InputError("bergman: k must be positive");
    using boost::math::quadrature::gauss_kronrod;
    BergmanKernel kernel;
    kernel.k_ = k;
    kernel.log_c_.resize(max_order + 1);

    // k phi on a coarse grid locates the peak of each integrand.
    constexpr std::size_t kScan = 513;
    std::vector<double> r_scan(kScan);
    std::vector<double> kphi(kScan);
    for (std::size_t i = 0; i < kScan; ++i) {
        r_scan[i] = static_cast<double>(i) / static_cast<double>(kScan - 1);
        kphi[i] = k * phi(std::min(r_scan[i], 1.0 - 1e-15));
        if (!std::isfinite(kphi[i])) throw InputError("bergman: weight is not finite on [0, 1)");
    }
    for (std::size_t m = 0; m <= max_order; ++m) {
        const double power = 2.0 * static_cast<double>(m) + 1.0;
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < kScan; ++i) peak = std::max(peak, power * std::log(r_scan[i]) - kphi[i]);
        auto integrand = [&](double r) {
            if (r <= 0.0) return 0.0;
            return std::exp(power * std::log(r) - k * phi(r) - peak);
        };
        double error = 0.0;
        const double integral = gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 20, 1e-12, &error);
        if (!(integral > 0.0) || !(error <= 1e-10 * integral)) {
            throw ConvergenceError("bergman: coefficient quadrature did not converge at m = " + std::to_string(m));
        }
        kernel.log_c_[m] = std::log(2.0 * kTwoPi) + peak + std::log(integral);
    }
    return kernel;
}

KernelValue log_bergman_kernel(const BergmanKernel& kernel, double r) {
    if (!(r >= 0.0 && r < 1.0)) throw InputError("bergman: radius outside [0, 1)");
    const std::size_t n = kernel.max_order() + 1;
    if (r == 0.0) return {-kernel.log_coefficient(0), 0.0};
    const double log_r2 = 2.0 * std::log(r);
    std::vector<double> terms(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < n; ++m) {
        terms[m] = static_cast<double>(m) * log_r2 - kernel.log_coefficient(m);
        top = std::max(top, terms[m]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    KernelValue out;
    out.log_K = top + std::log(sum);
    // Term ratios r^2 c_m / c_{m+1} do not increase in m (c_m is log-convex),
    // so the tail is dominated by a geometric series from the last ratio.
    if (n >= 2) {
        const double rho = std::exp(terms[n - 1] - terms[n - 2]);
        const double last = std::exp(terms[n - 1] - out.log_K);
        out.tail_bound = rho < 1.0 ? last * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
    } else {
        out.tail_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

BergmanKernel certified_kernel(const RadialWeight& phi, double k, double r_max, double tol) {
    std::size_t order = 32;
    for (int attempt = 0; attempt < 8; ++attempt, order *= 2) {
        auto kernel = bergman_coefficients(phi, k, order);
        if (log_bergman_kernel(kernel, r_max).tail_bound < tol) return kernel;
    }
    throw ConvergenceError("bergman: tail not certified below tolerance");
}

double bergman_B(const BergmanKernel& kernel, const RadialWeight& phi, double r) {
    return std::exp(log_bergman_kernel(kernel, r).log_K - kernel.k() * phi(r));
}

DensityLimit density_limit_check(const RadialWeight& phi, double r, const std::vector<double>& k_list) {
    if (r >= kBoundaryRadius) throw InputError("bergman: z too close to the boundary of the disc");
    DensityLimit out;
    out.limit = phi.ddc_density(r) / kTwoPi;
    if (!(out.limit > 0.0)) throw InputError("bergman: ddc phi is not positive at z");
    for (double k : k_list) {
        const auto kernel = certified_kernel(phi, k, r);
        const double b = bergman_B(kernel, phi, r) / k;
        out.k.push_back(k);
        out.scaled_B.push_back(b);
        out.gaps.push_back(std::abs(b - out.limit));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Families

std::vector<std::complex<double>> ParameterSquare::points() const {
    std::vector<std::complex<double>> out;
    if (n == 1) return {centre};
    const double step = 2.0 * half_width / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.push_back(centre + std::complex<double>(-half_width + step * static_cast<double>(i),
                                                        -half_width + step * static_cast<double>(j)));
        }
    }
    return out;
}

struct WeightFamily::Cache {
    std::map<std::tuple<double, double, double>, BergmanKernel> kernels;
};

WeightFamily::WeightFamily(std::string name, RadialPart radial, Twist twist, ParameterSquare tau,
                           ParameterSquare z)
    : name_(std::move(name)),
      radial_(std::move(radial)),
      twist_(std::move(twist)),
      tau_(tau),
      z_(z),
      cache_(std::make_shared<Cache>()) {
    const double reach = std::abs(z_.centre) + std::sqrt(2.0) * z_.half_width + 4.0 * kHessianStep;
    if (reach >= kBoundaryRadius) throw InputError("weight family: z-square reaches the boundary of the disc");
}

double WeightFamily::phi(std::complex<double> tau, std::complex<double> z) const {
    double value = radial_(tau)(std::abs(z));
    if (twist_) value += twist_(tau, z);
    return value;
}

double WeightFamily::log_K(std::complex<double> tau, std::complex<double> z, double k) const {
    const auto key = std::make_tuple(tau.real(), tau.imag(), k);
    auto it = cache_->kernels.find(key);
    if (it == cache_->kernels.end()) {
        const double r_max = std::abs(z_.centre) + std::sqrt(2.0) * z_.half_width + 4.0 * kHessianStep;
        it = cache_->kernels.emplace(key, certified_kernel(radial_(tau), k, r_max)).first;
    }
    double value = log_bergman_kernel(it->second, std::abs(z)).log_K;
    if (twist_) value += k * twist_(tau, z);
    return value;
}

WeightFamily WeightFamily::tau_independent(RadialWeight phi, ParameterSquare tau, ParameterSquare z) {
    return WeightFamily("tau_independent", [phi](std::complex<double>) { return phi; }, {}, tau, z);
}

WeightFamily WeightFamily::translated_quadratic(ParameterSquare tau, ParameterSquare z) {
    // |z - tau|^2 = |z|^2 + (|tau|^2 - 2 Re(z conj(tau))), the bracket pluriharmonic in z.
    const auto base = RadialWeight::polynomial({0.0, 1.0});
    return WeightFamily(
        "translated_quadratic", [base](std::complex<double>) { return base; },
        [](std::complex<double> tau, std::complex<double> z) {
            return std::norm(tau) - 2.0 * (z * std::conj(tau)).real();
        },
        tau, z);
}

WeightFamily WeightFamily::quartic(bool augmented, ParameterSquare tau, ParameterSquare z) {
    return WeightFamily(
        augmented ? "quartic_augmented" : "quartic",
        [augmented](std::complex<double> tau) {
            return RadialWeight::polynomial({augmented ? std::norm(tau) : 0.0, 1.0, tau.real()});
        },
        {}, tau, z);
}

WeightFamily WeightFamily::geodesic_localization(const GeodesicPath& path, ParameterSquare tau, ParameterSquare z) {
    const double lo = tau.centre.real() - tau.half_width - 4.0 * kHessianStep;
    const double hi = tau.centre.real() + tau.half_width + 4.0 * kHessianStep;
    if (lo < 0.0 || hi > 1.0) throw InputError("geodesic localization: Re tau must stay inside [0, 1]");
    auto shared = std::make_shared<GeodesicPath>(path);
    return WeightFamily(
        "geodesic_localization",
        [shared](std::complex<double> tau) {
            auto slice = std::make_shared<SymplecticPotential>(shared->slice(tau.real()));
            return RadialWeight([slice](double r) {
                const double s = r > 0.0 ? 2.0 * std::log(r) : -std::numeric_limits<double>::infinity();
                return slice->dual_at(s).psi;
            });
        },
        {}, tau, z);
}

// ---------------------------------------------------------------------------
// Complex Hessians

double ComplexHessian::min_eigenvalue() const {
    return 0.5 * (tt + zz) - std::hypot(0.5 * (tt - zz), std::abs(tz));
}

double ComplexHessian::max_abs_eigenvalue() const {
    const double radius = std::hypot(0.5 * (tt - zz), std::abs(tz));
    return std::abs(0.5 * (tt + zz)) + radius;
}

ComplexHessian complex_hessian(const std::function<double(std::complex<double>, std::complex<double>)>& f,
                               std::complex<double> tau, std::complex<double> z, double step) {
    // Real coordinates (Re tau, Im tau, Re z, Im z).
    auto eval = [&](const double* d) {
        return f(tau + std::complex<double>(d[0], d[1]), z + std::complex<double>(d[2], d[3]));
    };
    const double first[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
    const double second[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
    double d[4] = {0.0, 0.0, 0.0, 0.0};
    const double centre = eval(d);
    double hess[4][4];
    for (int a = 0; a < 4; ++a) {
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) {
            if (i == 2) {
                acc += second[i] * centre;
                continue;
            }
            d[a] = (i - 2) * step;
            acc += second[i] * eval(d);
        }
        d[a] = 0.0;
        hess[a][a] = acc / (step * step);
        for (int b = a + 1; b < 4; ++b) {
            double mixed = 0.0;
            for (int i = 0; i < 5; ++i) {
                if (i == 2) continue;
                for (int j = 0; j < 5; ++j) {
                    if (j == 2) continue;
                    d[a] = (i - 2) * step;
                    d[b] = (j - 2) * step;
                    mixed += first[i] * first[j] * eval(d);
                }
            }
            d[a] = 0.0;
            d[b] = 0.0;
            hess[a][b] = hess[b][a] = mixed / (step * step);
        }
    }
    ComplexHessian h;
    h.tt = 0.25 * (hess[0][0] + hess[1][1]);
    h.zz = 0.25 * (hess[2][2] + hess[3][3]);
    h.tz = 0.25 * std::complex<double>(hess[0][2] + hess[1][3], hess[0][3] - hess[1][2]);
    return h;
}

namespace {

struct NodeHessians {
    std::vector<ComplexHessian> phi;
    double min_phi_eigenvalue = 0.0;
    double max_phi_det = 0.0;
    double phi_scale = 1.0;
};

NodeHessians weight_hessians(const WeightFamily& family, double step) {
    NodeHessians out;
    auto f = [&](std::complex<double> tau, std::complex<double> z) { return family.phi(tau, z); };
    double worst = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    for (const auto& tau : family.tau_square().points()) {
        for (const auto& z : family.z_square().points()) {
            const auto h = complex_hessian(f, tau, z, step);
            out.phi.push_back(h);
            worst = std::min(worst, h.min_eigenvalue());
            largest = std::max(largest, h.max_abs_eigenvalue());
            out.max_phi_det = std::max(out.max_phi_det, std::abs(h.determinant()));
        }
    }
    out.min_phi_eigenvalue = worst;
    out.phi_scale = 1.0 + largest;
    return out;
}

constexpr double kPshTolerance = 1e-6;
constexpr double kMongeAmpereTolerance = 1e-6;

}  // namespace

FamilyReport log_psh_check(const WeightFamily& family, double k, double step) {
    FamilyReport report;
    const auto weights = weight_hessians(family, step);
    report.node_count = weights.phi.size();
    if (weights.min_phi_eigenvalue < -kPshTolerance * weights.phi_scale) {
        report.certified = false;
        report.min_value = std::numeric_limits<double>::quiet_NaN();
        report.note = "inconclusive: weight is not jointly plurisubharmonic";
        return report;
    }
    report.certified = true;
    auto f = [&](std::complex<double> tau, std::complex<double> z) { return family.log_K(tau, z, k); };
    double worst = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    for (const auto& tau : family.tau_square().points()) {
        for (const auto& z : family.z_square().points()) {
            const auto h = complex_hessian(f, tau, z, step);
            worst = std::min(worst, h.min_eigenvalue());
            largest = std::max(largest, h.max_abs_eigenvalue());
        }
    }
    report.min_value = worst;
    report.scale = 1.0 + largest;
    return report;
}

FamilyReport tk_positivity(const WeightFamily& family, double k, double step) {
    FamilyReport report;
    const auto weights = weight_hessians(family, step);
    report.node_count = weights.phi.size();
    if (weights.min_phi_eigenvalue < -kPshTolerance * weights.phi_scale) {
        report.min_value = std::numeric_limits<double>::quiet_NaN();
        report.note = "inconclusive: weight is not jointly plurisubharmonic";
        return report;
    }
    if (weights.max_phi_det > kMongeAmpereTolerance * weights.phi_scale * weights.phi_scale) {
        report.min_value = std::numeric_limits<double>::quiet_NaN();
        report.note = "inconclusive: weight does not solve the homogeneous Monge-Ampere equation";
        return report;
    }
    report.certified = true;
    auto log_k = [&](std::complex<double> tau, std::complex<double> z) { return family.log_K(tau, z, k); };
    double worst = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    std::size_t excluded = 0;
    std::size_t node = 0;
    for (const auto& tau : family.tau_square().points()) {
        for (const auto& z : family.z_square().points()) {
            const auto& p = weights.phi[node++];
            if (p.tt + p.zz <= kDegenerateDensity) {
                ++excluded;
                continue;
            }
            auto a = complex_hessian(log_k, tau, z, step);
            // log B = log K - k Phi.
            a.tt -= k * p.tt;
            a.zz -= k * p.zz;
            a.tz -= k * p.tz;
            const double t = a.tt * p.zz + a.zz * p.tt - 2.0 * (a.tz * std::conj(p.tz)).real();
            worst = std::min(worst, t);
            const double a_norm = std::sqrt(a.tt * a.tt + a.zz * a.zz + 2.0 * std::norm(a.tz));
            const double p_norm = std::sqrt(p.tt * p.tt + p.zz * p.zz + 2.0 * std::norm(p.tz));
            largest = std::max(largest, a_norm * p_norm);
        }
    }
    report.min_value = worst;
    report.scale = 1.0 + largest;
    report.excluded_fraction = static_cast<double>(excluded) / static_cast<double>(report.node_count);
    return report;
}

}  // namespace kenergy
