#pragma once

// Scalar special functions used by score maps, null calibration and the
// efficiency formulas. All functions are pure and thread-safe.

namespace otrank::special {

struct SpecialFnConfig {
    double series_tol = 1e-14;
    int max_terms = 10'000;

    void validate() const;
};

double std_normal_pdf(double x);
double std_normal_cdf(double x);
// Upper tail 1 - cdf(x) without cancellation.
double std_normal_sf(double x);
// Throws std::domain_error for p outside (0, 1).
double std_normal_quantile(double p);

// x > 0.
double ln_gamma(double x);

// Regularized lower/upper incomplete gamma functions, a > 0, x >= 0.
double regularized_gamma_p(double a, double x, const SpecialFnConfig& cfg = {});
double regularized_gamma_q(double a, double x, const SpecialFnConfig& cfg = {});

double chi2_cdf(int df, double x);
double chi2_sf(int df, double x);
double chi2_pdf(int df, double x);
// |chi2_cdf(df, q) - p| <= 1e-10.
double chi2_quantile(int df, double p);

// Law of sqrt(chi2_df).
double chi_d_cdf(int d, double r);
double chi_d_pdf(int d, double r);
double chi_d_quantile(int d, double p);

/// Gauss hypergeometric 2F1(a, b; c; -1).
///
/// Evaluated after the Pfaff transformation
///   2F1(a, b; c; z) = (1 - z)^{-a} 2F1(a, c - b; c; z / (z - 1)),
/// which moves the argument to 1/2 where the power series converges
/// geometrically. Throws std::domain_error when c is a non-positive integer
/// and std::runtime_error when the series fails to converge within
/// cfg.max_terms.
double hyp2f1_at_minus_one(double a, double b, double c, const SpecialFnConfig& cfg = {});

// E|Z|^p for Z ~ N(0, 1), p >= 0.
double abs_normal_moment(double p);

// 1 x 3 x ... x (2d - 3); the empty product (d = 1) is 1.
double double_factorial_odd(int d);

}  // namespace otrank::special
