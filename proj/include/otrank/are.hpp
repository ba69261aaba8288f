#pragma once

// Asymptotic relative efficiencies of rank Hotelling tests against the
// classical Hotelling T^2: closed forms, quadrature oracles and Monte Carlo.

#include "otrank/parallel.hpp"
#include "otrank/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace otrank::are {

enum class Method { closed_form, quadrature, monte_carlo };
std::string_view to_string(Method m);

struct AreResult {
    double value = 0.0;
    Method method = Method::closed_form;
    double error_estimate = 0.0;
};

// Gaussian location family, Unif[0,1]^d ERD: 3/pi.
double are_gaussian_uniform_erd();
// 12 (int phi^2)^2 by quadrature.
AreResult are_gaussian_uniform_erd_quadrature();

// Closed form with the 2F1 term; NaN when a special function fails (large d).
double kappa_closed_form(int d);

// (3/d) (E h_d(|G|) + (d-1) E[H_d(|G|)/|G|])^2, h_d and H_d the chi_d density
// and CDF. Integrated on [0, 40] for d <= 50, otherwise on a window of
// half-width 40 around the chi_d mode.
AreResult are_noncentrality_spherical(int d);

// Same quantity from `draws` Gaussian radii; error_estimate is one standard error.
AreResult are_noncentrality_spherical_mc(int d, long draws, std::uint64_t seed, unsigned threads = 1);

struct KappaResult {
    int d = 0;
    AreResult closed_form;
    AreResult quadrature;  // authoritative
    double discrepancy = 0.0;  // |closed - quadrature|, NaN when the closed form failed
    bool agrees = false;       // discrepancy <= 1e-5
};
KappaResult kappa_d(int d);

double hodges_lehmann_bound();   // 108/125
double chernoff_savage_bound();  // 1
// (81/500) (s+1)^5 / (d^2 (s+5)), s = sqrt(2d - 1).
double elliptical_bound(double d);
// Limit of elliptical_bound as d grows: 81/125.
double elliptical_bound_limit();

// Ratio of non-centrality parameters, rank over Hotelling. Both must be > 0.
double are_general(double noncentrality_rank, double noncentrality_hotelling);

using Sampler = std::function<Vector(Rng&)>;

struct ContaminationSpec {
    Sampler f1_sampler;
    Sampler g_sampler;
    // x -> J(R(x)), R the population rank map of f1.
    std::function<Vector(const Vector&)> score_of_rank;
    Matrix sigma_erd;
    // Covariance of f1; estimated from the f1 draws when absent.
    std::optional<Matrix> sigma_x;
    long draws = 1'000'000;
    std::uint64_t seed = 0;
};

struct ContaminationResult {
    AreResult are;  // NaN value when degenerate
    double numerator = 0.0;
    double numerator_se = 0.0;
    double denominator = 0.0;
    double denominator_se = 0.0;
    bool degenerate = false;
};

/// Monte Carlo estimate of
///   ||Sigma_ERD^{-1/2} E_f1[J(R(X)) (g/f1 - 1)(X)]||^2 / ||Sigma^{-1/2}(EW - EX)||^2.
/// The numerator expectation is rewritten as E_g[J(R(W))] - E_f1[J(R(X))],
/// which avoids unbounded likelihood ratios; X and W draws share a random
/// stream, so g == f1 gives an exact 0/0 which is flagged degenerate.
ContaminationResult are_contamination(const ContaminationSpec& spec);

}  // namespace otrank::are
