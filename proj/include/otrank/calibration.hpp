#pragma once

// Null calibration: chi-square cutoffs, simulated universal null tables and
// their on-disk cache.

#include "otrank/statistics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace otrank::calib {

enum class Calibration { asymptotic, permutation };
enum class TestKind { rank_hotelling, rank_spearman };
// label_permutation draws a uniformly random relabelling of the pooled ranks;
// the fresh routes rank newly drawn uniform or Gaussian data against the grid.
enum class NullRoute { label_permutation, fresh_uniform, fresh_gaussian };

std::string_view to_string(Calibration c);
std::string_view to_string(TestKind k);
std::string_view to_string(NullRoute r);
Calibration parse_calibration(std::string_view text);

// chi2_quantile(df, 1 - alpha).
double asymptotic_cutoff(int df, double alpha);

struct NullTableKey {
    TestKind kind = TestKind::rank_hotelling;
    int m = 0;   // sample-1 size (two-sample) or n (independence)
    int n = 0;   // sample-2 size (two-sample) or 0
    int d1 = 0;
    int d2 = 0;  // 0 for two-sample
    std::uint64_t grid_fingerprint = 0;
    ScoreKind score = ScoreKind::identity;
    int B = 0;
    std::uint64_t seed = 0;
    NullRoute route = NullRoute::label_permutation;

    // Single-line text form; equal keys give equal strings.
    [[nodiscard]] std::string canonical() const;
};

class NullTable {
public:
    NullTable() = default;
    explicit NullTable(std::vector<double> draws);

    [[nodiscard]] const std::vector<double>& draws() const { return draws_; }
    [[nodiscard]] int size() const { return static_cast<int>(draws_.size()); }

    // Empirical quantile, order statistic ceil(p B).
    [[nodiscard]] double quantile(double p) const;
    // Smallest value c such that (statistic >= c) <=> p_value(statistic) <= alpha.
    [[nodiscard]] double cutoff(double alpha) const;
    // (1 + #{draws >= observed}) / (B + 1).
    [[nodiscard]] double p_value(double observed) const;

private:
    std::vector<double> draws_;  // ascending
};

struct NullOptions {
    int B = 2000;
    std::uint64_t seed = 0;
    NullRoute route = NullRoute::label_permutation;
    unsigned threads = 0;  // 0: default_thread_count()
    std::optional<std::filesystem::path> cache_dir;  // no caching when empty
};

NullTableKey make_key(const stats::TwoSampleSetup& setup, int m, const NullOptions& options);
NullTableKey make_key(const stats::IndependenceSetup& setup, const NullOptions& options);

// B >= 100. Uses and fills the cache when options.cache_dir is set and B >= 1000.
NullTable permutation_null(const stats::TwoSampleSetup& setup, int m, const NullOptions& options);
NullTable permutation_null(const stats::IndependenceSetup& setup, const NullOptions& options);

/// One file per key holding a header line with the canonical key followed by
/// the sorted draws as little-endian float64; `index.txt` maps grid
/// fingerprints to file names. Writes go through a temporary file and an
/// atomic rename.
class NullCache {
public:
    explicit NullCache(std::filesystem::path dir);

    [[nodiscard]] std::optional<NullTable> load(const NullTableKey& key) const;
    void store(const NullTableKey& key, const NullTable& table) const;
    [[nodiscard]] std::filesystem::path file_for(const NullTableKey& key) const;
    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

    // $OTRANK_CACHE, else $XDG_CACHE_HOME/otrank, else $HOME/.cache/otrank.
    static std::optional<std::filesystem::path> default_dir();

private:
    std::filesystem::path dir_;
};

struct TestReport {
    std::string test;
    double statistic = 0.0;
    int df = 0;
    double cutoff = 0.0;
    double p_value = 1.0;
    Calibration calibration = Calibration::asymptotic;
    bool decision = false;
    double alpha = 0.05;
    int B = 0;
    std::map<std::string, double> diagnostics;
};

struct RunOptions {
    double alpha = 0.05;
    Calibration calibration = Calibration::permutation;
    NullOptions null;
};

TestReport run_test(const stats::TwoSampleInput& input, const RunOptions& options);
TestReport run_test(const stats::IndependenceInput& input, const RunOptions& options);

// Fisher-Yates shuffle with a portable bounded draw.
void shuffle(std::vector<int>& v, Rng& rng);

}  // namespace otrank::calib
