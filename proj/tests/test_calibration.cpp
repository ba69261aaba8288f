#include "otrank/calibration.hpp"
#include "otrank/ks.hpp"
#include "otrank/special_fn.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <map>
#include <unistd.h>

using namespace otrank;
using namespace otrank::calib;

namespace {

SampleMatrix normal_matrix(int n, int d, Rng& rng) {
    std::normal_distribution<double> g;
    SampleMatrix x(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) x(i, k) = g(rng);
    return x;
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("otrank_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Calibration, AsymptoticCutoff) {
    EXPECT_NEAR(asymptotic_cutoff(2, 0.05), 5.991464547107979, 1e-10);
    EXPECT_NEAR(asymptotic_cutoff(4, 0.01), 13.276704135987622, 1e-9);
    EXPECT_THROW(asymptotic_cutoff(2, 0.0), std::invalid_argument);
    EXPECT_THROW(asymptotic_cutoff(2, 1.0), std::invalid_argument);
}

TEST(Calibration, CutoffAgreesWithPValueRule) {
    Rng rng = make_rng(41);
    std::exponential_distribution<double> e;
    for (int b : {19, 99, 100, 199, 1000}) {
        std::vector<double> draws(b);
        for (auto& v : draws) v = std::floor(e(rng) * 4.0) / 4.0;  // heavy ties on purpose
        const NullTable t(draws);
        for (double alpha : {0.01, 0.05, 0.1, 0.5}) {
            const double c = t.cutoff(alpha);
            std::vector<double> probes = t.draws();
            for (double v : t.draws()) {
                probes.push_back(std::nextafter(v, -1e300));
                probes.push_back(std::nextafter(v, 1e300));
            }
            for (double obs : probes) EXPECT_EQ(obs >= c, t.p_value(obs) <= alpha) << b << ' ' << alpha << ' ' << obs;
        }
    }
}

TEST(Calibration, PValueAndQuantile) {
    const NullTable t({5.0, 1.0, 3.0, 2.0, 4.0});
    EXPECT_EQ(t.draws().front(), 1.0);
    EXPECT_DOUBLE_EQ(t.p_value(4.5), 2.0 / 6.0);
    EXPECT_DOUBLE_EQ(t.p_value(0.0), 1.0);
    EXPECT_DOUBLE_EQ(t.p_value(9.0), 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(t.quantile(0.5), 3.0);
    EXPECT_DOUBLE_EQ(t.quantile(1.0), 5.0);
    EXPECT_EQ(t.cutoff(0.1), std::numeric_limits<double>::infinity());
    EXPECT_THROW(NullTable(std::vector<double>{}), std::invalid_argument);
}

TEST(Calibration, KeysAreCanonical) {
    const auto setup = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 30, 2);
    NullOptions o;
    o.B = 1000;
    o.seed = 3;
    const auto k1 = make_key(setup, 10, o);
    const auto k2 = make_key(setup, 10, o);
    EXPECT_EQ(k1.canonical(), k2.canonical());
    o.seed = 4;
    EXPECT_NE(make_key(setup, 10, o).canonical(), k1.canonical());
    EXPECT_NE(make_key(setup, 11, o).canonical(), make_key(setup, 10, o).canonical());
    EXPECT_EQ(k1.m, 10);
    EXPECT_EQ(k1.n, 20);
}

TEST(Calibration, NullIndependentOfThreadCount) {
    const auto setup = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 40, 2);
    NullOptions o;
    o.B = 300;
    o.seed = 5;
    o.threads = 1;
    const auto a = permutation_null(setup, 15, o);
    o.threads = 4;
    const auto b = permutation_null(setup, 15, o);
    EXPECT_EQ(a.draws(), b.draws());
    o.route = NullRoute::fresh_gaussian;
    o.threads = 1;
    const auto c = permutation_null(setup, 15, o);
    o.threads = 3;
    EXPECT_EQ(c.draws(), permutation_null(setup, 15, o).draws());

    const auto ind = stats::IndependenceSetup::standard(NuTag::gaussian, ScoreKind::identity, 30, 2, 1);
    NullOptions oi;
    oi.B = 200;
    oi.threads = 1;
    const auto d = permutation_null(ind, oi);
    oi.threads = 4;
    EXPECT_EQ(d.draws(), permutation_null(ind, oi).draws());
}

TEST(Calibration, LabelAndFreshRoutesAgreeInLaw) {
    const auto setup = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 40, 2);
    NullOptions o;
    o.B = 1000;
    o.seed = 6;
    const auto label = permutation_null(setup, 20, o);
    o.route = NullRoute::fresh_uniform;
    o.seed = 7;
    const auto fresh = permutation_null(setup, 20, o);
    EXPECT_GT(ks::two_sample(label.draws(), fresh.draws()).p_value, 0.01);
}

TEST(Calibration, PermutationPValuesAreSuperUniform) {
    const int m = 20;
    const auto setup = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 2 * m, 2);
    NullOptions o;
    o.B = 199;
    o.seed = 8;
    const auto table = permutation_null(setup, m, o);
    Rng rng = make_rng(9);
    const int reps = 600;
    int at_05 = 0;
    int at_20 = 0;
    for (int r = 0; r < reps; ++r) {
        const double p = table.p_value(stats::rank_hotelling(normal_matrix(m, 2, rng), normal_matrix(m, 2, rng), setup).statistic);
        at_05 += p <= 0.05;
        at_20 += p <= 0.20;
    }
    // Binomial upper limits at 3 standard errors.
    EXPECT_LE(at_05 / double(reps), 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / reps));
    EXPECT_LE(at_20 / double(reps), 0.20 + 3.0 * std::sqrt(0.20 * 0.80 / reps));
}

TEST(Calibration, CacheRoundTrip) {
    const auto dir = temp_dir("cache");
    const NullCache cache(dir);
    NullTableKey key;
    key.B = 3;
    key.m = 4;
    key.n = 5;
    key.d1 = 2;
    key.grid_fingerprint = 0xabcdef;
    EXPECT_FALSE(cache.load(key).has_value());
    cache.store(key, NullTable({3.0, 1.0, 2.0}));
    const auto back = cache.load(key);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->draws(), (std::vector<double>{1.0, 2.0, 3.0}));
    std::ifstream idx(dir / "index.txt");
    std::string line;
    std::getline(idx, line);
    EXPECT_EQ(line.substr(0, 16), "0000000000abcdef");
    // A truncated file is ignored rather than trusted.
    std::filesystem::resize_file(cache.file_for(key), std::filesystem::file_size(cache.file_for(key)) - 4);
    EXPECT_FALSE(cache.load(key).has_value());
    std::filesystem::remove_all(dir);
}

TEST(Calibration, PermutationNullUsesCache) {
    const auto dir = temp_dir("null");
    const auto setup = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 24, 2);
    NullOptions o;
    o.B = 1000;
    o.seed = 10;
    o.cache_dir = dir;
    const auto first = permutation_null(setup, 12, o);
    const NullCache cache(dir);
    ASSERT_TRUE(std::filesystem::exists(cache.file_for(make_key(setup, 12, o))));
    EXPECT_EQ(permutation_null(setup, 12, o).draws(), first.draws());
    std::filesystem::remove_all(dir);
}

TEST(Calibration, DefaultCacheDirFollowsEnvironment) {
    ::setenv("OTRANK_CACHE", "/tmp/otrank_env_cache", 1);
    EXPECT_EQ(NullCache::default_dir(), std::filesystem::path("/tmp/otrank_env_cache"));
    ::unsetenv("OTRANK_CACHE");
}

TEST(Calibration, RunTestReports) {
    Rng rng = make_rng(11);
    const auto setup = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 60, 2);
    SampleMatrix y = normal_matrix(30, 2, rng);
    y.array() += 1.0;
    const stats::TwoSampleInput input{normal_matrix(30, 2, rng), y, setup};
    RunOptions opts;
    opts.calibration = Calibration::asymptotic;
    const auto a = run_test(input, opts);
    EXPECT_EQ(a.df, 2);
    EXPECT_NEAR(a.p_value, special::chi2_sf(2, a.statistic), 1e-15);
    EXPECT_EQ(a.decision, a.statistic >= a.cutoff);
    EXPECT_TRUE(a.decision);
    opts.calibration = Calibration::permutation;
    opts.null.B = 200;
    const auto p = run_test(input, opts);
    EXPECT_EQ(p.B, 200);
    EXPECT_DOUBLE_EQ(p.statistic, a.statistic);
    EXPECT_DOUBLE_EQ(p.p_value, 1.0 / 201.0);
    EXPECT_TRUE(p.decision);
    opts.alpha = 1.5;
    EXPECT_THROW(run_test(input, opts), std::invalid_argument);

    const auto ind = stats::IndependenceSetup::standard(NuTag::gaussian, ScoreKind::identity, 50, 2, 2);
    RunOptions io;
    io.calibration = Calibration::asymptotic;
    const auto r = run_test(stats::IndependenceInput{normal_matrix(50, 2, rng), normal_matrix(50, 2, rng), ind}, io);
    EXPECT_EQ(r.df, 4);
    EXPECT_EQ(r.test, "rank_spearman");
}

TEST(Calibration, ShuffleIsUniform) {
    Rng rng = make_rng(12);
    std::map<std::vector<int>, int> counts;
    const int reps = 60000;
    for (int r = 0; r < reps; ++r) {
        std::vector<int> v{0, 1, 2};
        shuffle(v, rng);
        ++counts[v];
    }
    ASSERT_EQ(counts.size(), 6u);
    double chi2 = 0.0;
    for (const auto& [p, c] : counts) chi2 += (c - reps / 6.0) * (c - reps / 6.0) / (reps / 6.0);
    EXPECT_LT(chi2, special::chi2_quantile(5, 0.999));
}

TEST(Calibration, Parsing) {
    EXPECT_EQ(parse_calibration("asymptotic"), Calibration::asymptotic);
    EXPECT_EQ(parse_calibration("permutation"), Calibration::permutation);
    EXPECT_THROW(parse_calibration("bootstrap"), std::invalid_argument);
}
