#include "otrank/are.hpp"
#include "otrank/special_fn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace otrank;
using namespace otrank::are;

namespace {

// (3/d)(E h(R) + (d-1) E[H(R)/R])^2 with the chi_d law written out through Boost.
double kappa_boost(int d) {
    const double c = std::pow(2.0, 1.0 - d / 2.0) / boost::math::tgamma(d / 2.0);
    auto pdf = [&](double r) { return c * std::pow(r, d - 1.0) * std::exp(-r * r / 2.0); };
    auto cdf = [&](double r) { return boost::math::gamma_p(d / 2.0, r * r / 2.0); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double a = GK::integrate([&](double r) { return pdf(r) * pdf(r); }, 0.0, 40.0, 15, 1e-14);
    const double b = d == 1 ? 0.0 : GK::integrate([&](double r) { return r > 0 ? cdf(r) * pdf(r) / r : 0.0; }, 0.0, 40.0, 15, 1e-14);
    const double s = a + (d - 1.0) * b;
    return 3.0 / d * s * s;
}

}  // namespace

TEST(Are, Constants) {
    EXPECT_NEAR(are_gaussian_uniform_erd(), 3.0 / std::numbers::pi, 1e-15);
    const auto q = are_gaussian_uniform_erd_quadrature();
    EXPECT_NEAR(q.value, 3.0 / std::numbers::pi, 1e-10);
    EXPECT_EQ(q.method, Method::quadrature);
    EXPECT_EQ(hodges_lehmann_bound(), 0.864);
    EXPECT_EQ(chernoff_savage_bound(), 1.0);
    EXPECT_EQ(elliptical_bound(1.0), 0.864);
    EXPECT_EQ(elliptical_bound_limit(), 0.648);
}

TEST(Are, EllipticalBoundDecreases) {
    EXPECT_GT(elliptical_bound(2.0), elliptical_bound(1.0));
    double prev = elliptical_bound(2.0);
    for (double d = 3.4; d <= 1e6; d *= 1.7) {
        const double v = elliptical_bound(d);
        EXPECT_LT(v, prev) << d;
        EXPECT_GT(v, 0.648);
        prev = v;
    }
    EXPECT_NEAR(elliptical_bound(1e6), 0.648, 1e-3);
    EXPECT_THROW(elliptical_bound(0.5), std::invalid_argument);
}

TEST(Are, KappaFrozenValues) {
    const double frozen[] = {0.9549296586, 0.9846376997, 0.9748240264, 0.9614369049, 0.9490442414,
                             0.9382241115, 0.9288516060, 0.9206948581, 0.9135389390, 0.9072071940};
    for (int d = 1; d <= 10; ++d) {
        const auto q = are_noncentrality_spherical(d);
        EXPECT_NEAR(q.value, frozen[d - 1], 1e-9) << d;
        EXPECT_NEAR(q.value, kappa_boost(d), 1e-10) << d;
    }
}

TEST(Are, KappaClosedFormCrossCheck) {
    for (int d = 2; d <= 10; ++d) {
        const auto k = kappa_d(d);
        EXPECT_TRUE(k.agrees) << d << " discrepancy " << k.discrepancy;
    }
    const auto k1 = kappa_d(1);
    EXPECT_FALSE(k1.agrees);
    EXPECT_NEAR(k1.quadrature.value, 3.0 / std::numbers::pi, 1e-10);
    EXPECT_NEAR(k1.closed_form.value, 0.16384, 1e-5);
}

TEST(Are, KappaOrderingAroundThreeOverPi) {
    const double c = 3.0 / std::numbers::pi;
    for (int d = 2; d <= 4; ++d) EXPECT_GT(are_noncentrality_spherical(d).value, c);
    for (int d = 5; d <= 60; ++d) EXPECT_LT(are_noncentrality_spherical(d).value, c);
}

TEST(Are, KappaMonteCarloAgrees) {
    for (int d : {2, 5}) {
        const auto mc = are_noncentrality_spherical_mc(d, 400000, 3, 2);
        EXPECT_EQ(mc.method, Method::monte_carlo);
        EXPECT_NEAR(mc.value, are_noncentrality_spherical(d).value, 4.0 * mc.error_estimate) << d;
        EXPECT_EQ(mc.value, are_noncentrality_spherical_mc(d, 400000, 3, 1).value);
    }
}

TEST(Are, LargeDimensionWindow) {
    const auto v = are_noncentrality_spherical(200);
    EXPECT_GT(v.value, 0.0);
    EXPECT_LT(v.value, are_noncentrality_spherical(50).value);
}

TEST(Are, GeneralRatio) {
    EXPECT_DOUBLE_EQ(are_general(2.0, 4.0), 0.5);
    EXPECT_DOUBLE_EQ(are_general(2.0 * 7.3, 4.0 * 7.3), 0.5);
    EXPECT_THROW(are_general(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(are_general(1.0, -1.0), std::invalid_argument);
}

namespace {

ContaminationSpec gaussian_shift_spec(double mu, std::uint64_t seed, long draws) {
    ContaminationSpec s;
    s.f1_sampler = [](Rng& r) { return Vector::Constant(1, std::normal_distribution<double>()(r)); };
    s.g_sampler = [mu](Rng& r) { return Vector::Constant(1, mu + std::normal_distribution<double>()(r)); };
    s.score_of_rank = [](const Vector& x) { return Vector::Constant(1, special::std_normal_cdf(x(0))); };
    s.sigma_erd = Matrix::Constant(1, 1, 1.0 / 12.0);
    s.sigma_x = Matrix::Identity(1, 1);
    s.draws = draws;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Are, ContaminationDegenerateWhenGEqualsF1) {
    auto s = gaussian_shift_spec(0.0, 1, 10000);
    const auto r = are_contamination(s);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.numerator, 0.0);
    EXPECT_TRUE(std::isnan(r.are.value));
}

TEST(Are, ContaminationMatchesClosedFormAndVanishes) {
    double prev = 1e9;
    for (double mu : {1.0, 2.0, 4.0, 8.0}) {
        const auto r = are_contamination(gaussian_shift_spec(mu, 2, 200000));
        const double p = special::std_normal_cdf(mu / std::sqrt(2.0)) - 0.5;
        const double exact = 12.0 * p * p / (mu * mu);
        EXPECT_FALSE(r.degenerate);
        EXPECT_NEAR(r.are.value, exact, 4.0 * r.are.error_estimate + 1e-3) << mu;
        EXPECT_LT(r.are.value, prev);
        prev = r.are.value;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(Are, ContaminationStableAcrossSeeds) {
    const auto a = are_contamination(gaussian_shift_spec(0.5, 10, 200000));
    const auto b = are_contamination(gaussian_shift_spec(0.5, 11, 200000));
    EXPECT_LE(std::abs(a.are.value - b.are.value), 2.0 * std::hypot(a.are.error_estimate, b.are.error_estimate));
    auto bad = gaussian_shift_spec(0.5, 1, 1000);
    bad.g_sampler = nullptr;
    EXPECT_THROW(are_contamination(bad), std::invalid_argument);
}
