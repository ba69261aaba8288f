#include "otrank/are.hpp"

#include "otrank/linalg.hpp"
#include "otrank/quadrature.hpp"
#include "otrank/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace otrank::are {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double chi_pdf(int d, double r) { return r <= 0.0 ? (d == 1 ? special::chi_d_pdf(1, 0.0) : 0.0) : special::chi_d_pdf(d, r); }

QuadResult integrate_checked(const std::function<double(double)>& f, double a, double b) {
    QuadOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-13;
    opts.max_intervals = 20000;
    QuadResult r = integrate(f, a, b, opts);
    if (!r.converged) throw std::runtime_error("ARE quadrature did not converge");
    return r;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

double are_gaussian_uniform_erd() { return 3.0 / std::numbers::pi; }

AreResult are_gaussian_uniform_erd_quadrature() {
    const QuadResult r = integrate_checked(
        [](double x) {
            const double p = special::std_normal_pdf(x);
            return p * p;
        },
        -40.0, 40.0);
    return {12.0 * r.value * r.value, Method::quadrature, 24.0 * r.value * r.error};
}

double kappa_closed_form(int d) {
    if (d < 1) throw std::invalid_argument("kappa_d: d must be at least 1");
    try {
        const double dd = d;
        const double lg_half = special::ln_gamma(0.5 * dd);
        const double first = std::exp(special::ln_gamma(dd - 0.5) - (dd - 1.0) * std::numbers::ln2 - 2.0 * lg_half);
        const double sqrt2pi = std::sqrt(2.0 * std::numbers::pi);
        const double omega_a = sqrt2pi * (dd - 1.0) * std::exp(-0.5 * dd * std::numbers::ln2 - lg_half) *
                               special::abs_normal_moment(dd - 2.0 < 0.0 ? 0.0 : dd - 2.0);
        const double f21 = special::hyp2f1_at_minus_one(dd - 0.5, 0.5 * dd - 0.5, 0.5 * dd + 0.5);
        const double omega_b = sqrt2pi * special::double_factorial_odd(d) *
                               std::exp(-(dd - 1.0) * std::numbers::ln2 - 2.0 * lg_half) * f21;
        const double inner = first + omega_a - omega_b;
        const double value = 3.0 / dd * inner * inner;
        return std::isfinite(value) ? value : kNaN;
    } catch (const std::exception&) {
        return kNaN;
    }
}

AreResult are_noncentrality_spherical(int d) {
    if (d < 1) throw std::invalid_argument("are_noncentrality_spherical: d must be at least 1");
    double lo = 0.0;
    double hi = 40.0;
    if (d > 50) {
        const double mode = std::sqrt(d - 1.0);
        lo = std::max(0.0, mode - 40.0);
        hi = mode + 40.0;
    }
    // E h(R) = int h^2; E[H(R)/R] = int H h / r.
    const QuadResult a = integrate_checked(
        [d](double r) {
            const double h = chi_pdf(d, r);
            return h * h;
        },
        lo, hi);
    QuadResult b{};
    if (d > 1) {
        b = integrate_checked(
            [d](double r) {
                if (r <= 0.0) return 0.0;
                return special::chi_d_cdf(d, r) * chi_pdf(d, r) / r;
            },
            lo, hi);
    }
    const double s = a.value + (d - 1.0) * b.value;
    const double err = a.error + (d - 1.0) * b.error;
    return {3.0 / d * s * s, Method::quadrature, 6.0 / d * std::abs(s) * err};
}

AreResult are_noncentrality_spherical_mc(int d, long draws, std::uint64_t seed, unsigned threads) {
    if (d < 1 || draws < 2) throw std::invalid_argument("are_noncentrality_spherical_mc: bad arguments");
    constexpr std::size_t kChunks = 64;
    std::vector<double> sums(kChunks, 0.0);
    std::vector<double> sq(kChunks, 0.0);
    parallel_for(kChunks, threads, [&](std::size_t c) {
        Rng rng = make_rng(seed, c);
        std::chi_squared_distribution<double> chi2(d);
        const long begin = static_cast<long>(c) * draws / static_cast<long>(kChunks);
        const long end = static_cast<long>(c + 1) * draws / static_cast<long>(kChunks);
        double s = 0.0;
        double s2 = 0.0;
        for (long i = begin; i < end; ++i) {
            const double r = std::sqrt(chi2(rng));
            double v = chi_pdf(d, r);
            if (d > 1 && r > 0.0) v += (d - 1.0) * special::chi_d_cdf(d, r) / r;
            s += v;
            s2 += v * v;
        }
        sums[c] = s;
        sq[c] = s2;
    });
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t c = 0; c < kChunks; ++c) {
        s += sums[c];
        s2 += sq[c];
    }
    const double n = static_cast<double>(draws);
    const double mean = s / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
    const double se_mean = std::sqrt(var / n);
    return {3.0 / d * mean * mean, Method::monte_carlo, 6.0 / d * std::abs(mean) * se_mean};
}

KappaResult kappa_d(int d) {
    KappaResult out;
    out.d = d;
    out.closed_form = {kappa_closed_form(d), Method::closed_form, 0.0};
    out.quadrature = are_noncentrality_spherical(d);
    out.discrepancy = std::abs(out.closed_form.value - out.quadrature.value);
    out.agrees = std::isfinite(out.discrepancy) && out.discrepancy <= 1e-5;
    return out;
}

double hodges_lehmann_bound() { return 108.0 / 125.0; }

double chernoff_savage_bound() { return 1.0; }

double elliptical_bound(double d) {
    if (!(d >= 1.0)) throw std::invalid_argument("elliptical_bound: d must be at least 1");
    const double s = std::sqrt(2.0 * d - 1.0);
    return 81.0 * std::pow(s + 1.0, 5) / (500.0 * d * d * (s + 5.0));
}

double elliptical_bound_limit() { return 81.0 / 125.0; }

double are_general(double noncentrality_rank, double noncentrality_hotelling) {
    if (!(noncentrality_rank > 0.0) || !(noncentrality_hotelling > 0.0)) {
        throw std::invalid_argument("are_general: non-centrality parameters must be positive");
    }
    return noncentrality_rank / noncentrality_hotelling;
}

ContaminationResult are_contamination(const ContaminationSpec& spec) {
    if (!spec.f1_sampler || !spec.g_sampler || !spec.score_of_rank) {
        throw std::invalid_argument("are_contamination: samplers and score map are required");
    }
    if (spec.draws < 100) throw std::invalid_argument("are_contamination: too few draws");
    const Matrix w_erd = linalg::sym_inv_sqrt(spec.sigma_erd);
    const Eigen::Index d = spec.sigma_erd.rows();

    Rng rng_x = make_rng(spec.seed, 1);
    Rng rng_w = make_rng(spec.seed, 1);
    const long n = spec.draws;
    Matrix score_diff(n, d);
    Matrix loc_diff(n, d);
    Matrix xs(n, d);
    for (long i = 0; i < n; ++i) {
        const Vector x = spec.f1_sampler(rng_x);
        const Vector w = spec.g_sampler(rng_w);
        if (x.size() != d || w.size() != d) throw std::invalid_argument("are_contamination: sampler dimension mismatch");
        const Vector jx = spec.score_of_rank(x);
        const Vector jw = spec.score_of_rank(w);
        if (!jx.allFinite() || !jw.allFinite() || !x.allFinite() || !w.allFinite()) {
            throw std::domain_error("are_contamination: non-finite draw or score");
        }
        score_diff.row(i) = (jw - jx).transpose();
        loc_diff.row(i) = (w - x).transpose();
        xs.row(i) = x.transpose();
    }
    Matrix sigma_x;
    if (spec.sigma_x) {
        sigma_x = *spec.sigma_x;
    } else {
        const Matrix c = xs.rowwise() - xs.colwise().mean();
        sigma_x = c.transpose() * c / (n - 1.0);
    }
    const Matrix w_x = linalg::sym_inv_sqrt(sigma_x);

    // ||W m||^2 with delta-method standard error from the per-draw covariance.
    auto quad_form = [n](const Matrix& rows, const Matrix& w, double& se) {
        const Vector mean = rows.colwise().mean().transpose();
        const Vector wm = w * mean;
        const Vector grad = 2.0 * w.transpose() * wm;
        const Matrix c = rows.rowwise() - mean.transpose();
        const Matrix cov = c.transpose() * c / (n - 1.0);
        se = std::sqrt(std::max(0.0, grad.dot(cov * grad)) / n);
        return wm.squaredNorm();
    };

    ContaminationResult out;
    out.numerator = quad_form(score_diff, w_erd, out.numerator_se);
    out.denominator = quad_form(loc_diff, w_x, out.denominator_se);
    out.degenerate = out.denominator == 0.0 || out.denominator <= 2.0 * out.denominator_se;
    out.are.method = Method::monte_carlo;
    if (out.degenerate) {
        out.are.value = kNaN;
        out.are.error_estimate = kNaN;
        return out;
    }
    out.are.value = out.numerator / out.denominator;
    const double rel = std::hypot(out.numerator > 0.0 ? out.numerator_se / out.numerator : 0.0,
                                  out.denominator_se / out.denominator);
    out.are.error_estimate = out.numerator > 0.0 ? out.are.value * rel : out.numerator_se / out.denominator;
    return out;
}

}  // namespace otrank::are
