#include "otrank/transport.hpp"

#include "otrank/lap.hpp"
#include "otrank/linalg.hpp"
#include "otrank/quadrature.hpp"
#include "otrank/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otrank::transport {

namespace {

// Inverts a continuous non-decreasing CDF on [0, inf) by bracketing and
// bisection.
double invert_cdf(const ScalarFn& cdf, double p) {
    if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("radial quantile requires p in [0, 1)");
    if (p == 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (cdf(hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("radial quantile: bracket search failed");
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void require_monotone(const ScalarFn& cdf, const std::string& name, double upper) {
    double prev = cdf(0.0);
    if (!(prev >= 0.0 && prev <= 1.0)) throw std::invalid_argument(name + ": CDF leaves [0, 1]");
    constexpr int kProbes = 64;
    for (int k = 1; k <= kProbes; ++k) {
        const double v = cdf(upper * k / kProbes);
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(name + ": CDF leaves [0, 1]");
        if (v < prev - 1e-12) throw std::invalid_argument(name + ": CDF is not monotone");
        prev = v;
    }
}

double quad_or_throw(const std::function<double(double)>& f, double a, double b) {
    QuadOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-12;
    const QuadResult r = integrate(f, a, b, opts);
    if (!r.converged) throw std::runtime_error("radial CDF quadrature did not converge");
    return r.value;
}

}  // namespace

Matrix PopulationMap::apply(const Matrix& points) const {
    Matrix out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out.row(i) = map(points.row(i).transpose()).transpose();
    return out;
}

PopulationMap gaussian_to_gaussian_map(const Vector& theta, const Matrix& sigma) {
    if (theta.size() != sigma.rows()) throw std::invalid_argument("gaussian map: theta and Sigma sizes differ");
    const Matrix w = linalg::sym_inv_sqrt(sigma);
    PopulationMap pm;
    pm.family = "gaussian";
    pm.target = NuTag::gaussian;
    pm.dim = static_cast<int>(theta.size());
    pm.map = [w, theta](const Vector& x) -> Vector { return w * (x - theta); };
    return pm;
}

RadialLaw chi_radial(int d) {
    if (d < 1) throw std::invalid_argument("chi_radial: d must be positive");
    return {"chi_" + std::to_string(d), [d](double r) { return r <= 0.0 ? 0.0 : special::chi_d_cdf(d, r); },
            [d](double p) { return p <= 0.0 ? 0.0 : special::chi_d_quantile(d, p); }};
}

RadialLaw unit_uniform_radial() {
    return {"unit_uniform", [](double r) { return std::clamp(r, 0.0, 1.0); },
            [](double p) {
                if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("radial quantile requires p in [0, 1]");
                return p;
            }};
}

RadialLaw t_radial(int d, double dof) {
    if (d < 1 || !(dof >= 1.0) || dof != std::floor(dof)) {
        throw std::invalid_argument("t_radial: need d >= 1 and a positive integer dof");
    }
    const double smax = std::sqrt(dof + 60.0 * std::sqrt(2.0 * dof) + 200.0);
    // |X| = |G| sqrt(dof / V), V ~ chi2_dof; integrate over s = sqrt(V).
    ScalarFn cdf = [d, dof, smax](double r) {
        if (r <= 0.0) return 0.0;
        auto f = [&](double s) {
            if (s <= 0.0) return 0.0;
            return special::chi_d_cdf(d, r * s / std::sqrt(dof)) * special::chi_d_pdf(static_cast<int>(dof), s);
        };
        return std::min(1.0, quad_or_throw(f, 0.0, smax));
    };
    return {"t_" + std::to_string(d), cdf, [cdf](double p) { return invert_cdf(cdf, p); }};
}

RadialLaw laplace_radial(int d) {
    if (d < 1) throw std::invalid_argument("laplace_radial: d must be positive");
    ScalarFn cdf = [d](double r) {
        if (r <= 0.0) return 0.0;
        auto f = [&](double w) {
            const double h = w <= 0.0 ? 1.0 : special::chi_d_cdf(d, r / std::sqrt(w));
            return h * std::exp(-w);
        };
        return std::min(1.0, quad_or_throw(f, 0.0, 40.0));
    };
    return {"laplace_" + std::to_string(d), cdf, [cdf](double p) { return invert_cdf(cdf, p); }};
}

PopulationMap elliptical_radial_map(const Vector& theta, const Matrix& sigma, const RadialLaw& h1,
                                    const RadialLaw& h2, NuTag target) {
    if (theta.size() != sigma.rows()) throw std::invalid_argument("elliptical map: theta and Sigma sizes differ");
    if (!h1.cdf || !h2.cdf || !h2.quantile) throw std::invalid_argument("elliptical map: radial law incomplete");
    require_monotone(h1.cdf, h1.name, 10.0);
    require_monotone(h2.cdf, h2.name, 10.0);
    const Matrix w = linalg::sym_inv_sqrt(sigma);
    PopulationMap pm;
    pm.family = "elliptical(" + h1.name + "->" + h2.name + ")";
    pm.target = target;
    pm.dim = static_cast<int>(theta.size());
    pm.map = [w, theta, h1, h2](const Vector& x) -> Vector {
        const Vector z = w * (x - theta);
        const double r = z.norm();
        if (r == 0.0) return Vector::Zero(z.size());
        return z * (h2.quantile(h1.cdf(r)) / r);
    };
    return pm;
}

PopulationMap independent_components_map(const std::vector<ScalarFn>& cdfs, NuTag target) {
    if (cdfs.empty()) throw std::invalid_argument("independent map: need at least one CDF");
    if (target != NuTag::uniform_cube && target != NuTag::gaussian) {
        throw std::invalid_argument("independent map: target must be uniform_cube or gaussian");
    }
    for (std::size_t k = 0; k < cdfs.size(); ++k) {
        const auto& f = cdfs[k];
        double prev = f(-50.0);
        for (int i = -499; i <= 500; ++i) {
            const double v = f(0.1 * i);
            if (!(v >= 0.0 && v <= 1.0) || v < prev - 1e-12) {
                throw std::invalid_argument("independent map: coordinate CDF " + std::to_string(k) + " is not monotone");
            }
            prev = v;
        }
    }
    PopulationMap pm;
    pm.family = "independent";
    pm.target = target;
    pm.dim = static_cast<int>(cdfs.size());
    pm.map = [cdfs, target](const Vector& x) -> Vector {
        if (x.size() != static_cast<Eigen::Index>(cdfs.size())) throw std::invalid_argument("independent map: dimension mismatch");
        Vector out(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            const double u = cdfs[k](x(k));
            out(k) = target == NuTag::gaussian ? special::std_normal_quantile(u) : u;
        }
        return out;
    };
    return pm;
}

double rank_convergence_error(const SampleMatrix& sample, const ReferenceGrid& grid, const PopulationMap& map) {
    if (map.target != grid.nu) throw std::invalid_argument("rank_convergence_error: map and grid target different laws");
    const lap::RankedSample ranked = lap::empirical_rank_map(sample, grid);
    double total = 0.0;
    for (Eigen::Index i = 0; i < sample.rows(); ++i) {
        total += (ranked.ranks.row(i).transpose() - map(sample.row(i).transpose())).norm();
    }
    return total / static_cast<double>(sample.rows());
}

}  // namespace otrank::transport
