#pragma once

// Samplers for the simulation families and the Monte Carlo power harness.

#include "otrank/calibration.hpp"
#include "otrank/parallel.hpp"
#include "otrank/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace otrank::sim {

enum class Family { gaussian, logistic, laplace_elliptical, lognormal, epanechnikov, spherical_uniform };
std::string_view to_string(Family f);
Family parse_family(std::string_view text);

struct FamilyParams {
    // Location; zero when empty. For lognormal this is the mean of log X.
    Vector location;
    // Coordinate scale (logistic, epanechnikov sigma).
    double scale = 1.0;
    // Scatter matrix for gaussian and laplace_elliptical; identity when empty.
    Matrix scatter;
};

// Draws n rows. Reproducible for a given generator state.
SampleMatrix sample_family(Family family, const FamilyParams& params, int n, int d, Rng& rng);
SampleMatrix sample_family(Family family, const FamilyParams& params, int n, int d, std::uint64_t seed);

// Epanechnikov variate with variance 1: sqrt(5) t, t = 2 sin(asin(2u - 1) / 3).
double epanechnikov_from_uniform(double u);
// Density of Epanechnikov(theta, sigma); support |x - theta| <= sqrt(5) sigma.
double epanechnikov_pdf(double x, double theta, double sigma);

// Konijn mixing with blocks ((1 - delta/sqrt(n_rate)) I, (delta/sqrt(n_rate)) M;
// (delta/sqrt(n_rate)) M', (1 - delta/sqrt(n_rate)) I). n_rate defaults to
// the row count.
struct KonijnPair {
    SampleMatrix x;
    SampleMatrix y;
};
KonijnPair konijn_mix(const SampleMatrix& xp, const SampleMatrix& yp, double delta, const Matrix& m,
                      std::optional<int> n_rate = {});
// Rectangular identity of size dx x dy.
Matrix default_konijn_matrix(int dx, int dy);

enum class Setting { H1, H2, A1, A2, A3, A4, konijn, custom };
std::string_view to_string(Setting s);
Setting parse_setting(std::string_view text);

enum class TestId { hotelling, rank_uniform, rank_gaussian, rank_spearman, wilks };
std::string_view to_string(TestId t);
TestId parse_test(std::string_view text);

struct ScenarioSpec {
    Setting setting = Setting::A1;
    int d = 2;
    int m = 300;
    int n = 300;
    std::vector<double> thetas;  // theta for two-sample settings, delta for konijn
    int B = 500;
    double alpha = 0.05;
    std::vector<TestId> tests;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: default_thread_count()
    calib::Calibration calibration = calib::Calibration::asymptotic;
    // Null draws when calibration is permutation. For konijn_power the rank
    // test uses a universal null table and Wilks a per-replication permutation
    // test with this many permutations.
    int permutation_B = 2000;

    // Konijn settings.
    int dx = 2;
    int dy = 2;
    Family konijn_family = Family::gaussian;
    Matrix konijn_m;  // default_konijn_matrix when empty

    // custom setting: both samples from this family, sample 2 shifted by theta * 1.
    Family custom_family = Family::gaussian;

    void validate() const;
};

// Default theta range and tests for a setting.
ScenarioSpec default_scenario(Setting setting, int d = 2);

struct PowerPoint {
    double theta = 0.0;
    TestId test = TestId::hotelling;
    double power = 0.0;
    double se = 0.0;
    int B = 0;
    int m = 0;
    int n = 0;
};

struct PowerCurve {
    std::vector<PowerPoint> points;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
    std::string notes;  // interpretation flags for the setting

    // Rejection rate for (theta, test); throws if absent.
    [[nodiscard]] const PowerPoint& at(double theta, TestId test) const;
};

// Draws sample 1 and sample 2 for a two-sample setting at parameter theta.
// The same generator state gives the same underlying noise for every theta.
struct TwoSampleDraw {
    SampleMatrix x;
    SampleMatrix y;
};
TwoSampleDraw draw_two_sample(Setting setting, Family custom_family, int m, int n, int d, double theta, Rng& rng);

// Interpretation notes for settings whose construction is not fully pinned down.
std::string setting_notes(Setting setting);

PowerCurve power_curve(const ScenarioSpec& spec);
PowerCurve konijn_power(const ScenarioSpec& spec);

struct HlRow {
    int n = 0;
    int n_matched = 0;
    double rank_uniform = 0.0;   // at n
    double hotelling = 0.0;      // at n_matched
    double rank_gaussian = 0.0;  // at n_matched
    double se = 0.0;             // largest binomial SE of the row
};

struct HlReport {
    Setting setting = Setting::H1;
    double ratio = 0.0;
    int B = 0;
    std::vector<HlRow> rows;
    double max_gap = 0.0;            // max |rank_uniform - hotelling|
    double max_gaussian_deficit = 0.0;  // max (hotelling - rank_gaussian)
    double max_spread = 0.0;         // max pairwise gap among the three curves
};

/// Rank test on the uniform cube at m = n, Hotelling and the Gaussian-grid
/// rank test at floor(ratio * n). Replication b draws n rows per sample and
/// the matched tests use the leading rows, so the curves share noise.
HlReport hl_sample_size_match(Setting setting, const std::vector<int>& ns, int B, double ratio, std::uint64_t seed,
                              unsigned threads = 0, double alpha = 0.05);

// CSV with header theta,test,power,se,B,seed.
std::string to_csv(const PowerCurve& curve);
// Blank-line separated blocks per test with columns theta power se.
std::string to_gnuplot(const PowerCurve& curve);

}  // namespace otrank::sim
