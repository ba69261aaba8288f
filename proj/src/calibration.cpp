#include "otrank/calibration.hpp"

#include "otrank/parallel.hpp"
#include "otrank/special_fn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace otrank::calib {

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

unsigned resolve_threads(unsigned threads) { return threads == 0 ? default_thread_count() : threads; }

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

void check_B(int B) {
    if (B < 100) throw std::invalid_argument("permutation null needs B >= 100");
}

SampleMatrix fresh_data(NullRoute route, int n, int d, Rng& rng) {
    SampleMatrix z(n, d);
    if (route == NullRoute::fresh_uniform) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index k = 0; k < z.cols(); ++k)
            for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, k) = unif(rng);
    } else {
        std::normal_distribution<double> norm;
        for (Eigen::Index k = 0; k < z.cols(); ++k)
            for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, k) = norm(rng);
    }
    return z;
}

template <class Generate>
NullTable cached_or_generate(const NullTableKey& key, const NullOptions& options, Generate&& generate) {
    const bool cacheable = options.cache_dir.has_value() && options.B >= 1000;
    if (cacheable) {
        const NullCache cache(*options.cache_dir);
        if (auto hit = cache.load(key)) return *hit;
        NullTable table = generate();
        cache.store(key, table);
        return table;
    }
    return generate();
}

void write_le(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le(const unsigned char* bytes) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

void atomic_write(const std::filesystem::path& target, const std::string& content) {
    std::filesystem::path tmp = target;
    tmp += ".tmp" + hex(fnv1a(content) ^ static_cast<std::uint64_t>(std::random_device{}()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

TestReport finish_report(TestReport report, const RunOptions& options, const NullTable* table) {
    report.alpha = options.alpha;
    report.calibration = options.calibration;
    if (options.calibration == Calibration::asymptotic) {
        report.cutoff = asymptotic_cutoff(report.df, options.alpha);
        report.p_value = special::chi2_sf(report.df, std::max(report.statistic, 0.0));
        report.B = 0;
    } else {
        report.cutoff = table->cutoff(options.alpha);
        report.p_value = table->p_value(report.statistic);
        report.B = table->size();
    }
    report.decision = report.statistic >= report.cutoff;
    return report;
}

}  // namespace

std::string_view to_string(Calibration c) {
    return c == Calibration::asymptotic ? "asymptotic" : "permutation";
}

std::string_view to_string(TestKind k) {
    return k == TestKind::rank_hotelling ? "rank_hotelling" : "rank_spearman";
}

std::string_view to_string(NullRoute r) {
    switch (r) {
        case NullRoute::label_permutation: return "label_permutation";
        case NullRoute::fresh_uniform: return "fresh_uniform";
        case NullRoute::fresh_gaussian: return "fresh_gaussian";
    }
    return "unknown";
}

Calibration parse_calibration(std::string_view text) {
    if (text == "asymptotic") return Calibration::asymptotic;
    if (text == "permutation") return Calibration::permutation;
    throw std::invalid_argument("unknown calibration '" + std::string(text) + "'");
}

double asymptotic_cutoff(int df, double alpha) {
    check_alpha(alpha);
    return special::chi2_quantile(df, 1.0 - alpha);
}

std::string NullTableKey::canonical() const {
    std::ostringstream s;
    s << "kind=" << to_string(kind) << " m=" << m << " n=" << n << " d1=" << d1 << " d2=" << d2
      << " grid=" << hex(grid_fingerprint) << " score=" << to_string(score) << " B=" << B << " seed=" << seed
      << " route=" << to_string(route);
    return s.str();
}

NullTable::NullTable(std::vector<double> draws) : draws_(std::move(draws)) {
    if (draws_.empty()) throw std::invalid_argument("null table needs at least one draw");
    std::sort(draws_.begin(), draws_.end());
}

double NullTable::quantile(double p) const {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(draws_.size()) - 1e-9));
    return draws_[std::clamp<std::size_t>(k, 1, draws_.size()) - 1];
}

double NullTable::cutoff(double alpha) const {
    check_alpha(alpha);
    const double B = static_cast<double>(draws_.size());
    // Reject iff #{draws >= t} <= k.
    const long k = static_cast<long>(std::floor(alpha * (B + 1.0) - 1.0 + 1e-9));
    if (k < 0) return std::numeric_limits<double>::infinity();
    if (k >= static_cast<long>(draws_.size())) return -std::numeric_limits<double>::infinity();
    const double s = draws_[draws_.size() - 1 - static_cast<std::size_t>(k)];
    return std::nextafter(s, std::numeric_limits<double>::infinity());
}

double NullTable::p_value(double observed) const {
    const auto first = std::lower_bound(draws_.begin(), draws_.end(), observed);
    const auto count = static_cast<double>(draws_.end() - first);
    return (1.0 + count) / (static_cast<double>(draws_.size()) + 1.0);
}

void shuffle(std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        // Unbiased bounded draw by rejection.
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r = 0;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(v[i - 1], v[r % bound]);
    }
}

NullTableKey make_key(const stats::TwoSampleSetup& setup, int m, const NullOptions& options) {
    NullTableKey key;
    key.kind = TestKind::rank_hotelling;
    key.m = m;
    key.n = static_cast<int>(setup.grid.size()) - m;
    key.d1 = static_cast<int>(setup.grid.dim());
    key.grid_fingerprint = reference::fingerprint(setup.grid);
    key.score = setup.score.kind;
    key.B = options.B;
    key.seed = options.seed;
    key.route = options.route;
    return key;
}

NullTableKey make_key(const stats::IndependenceSetup& setup, const NullOptions& options) {
    NullTableKey key;
    key.kind = TestKind::rank_spearman;
    key.m = static_cast<int>(setup.grid_x.size());
    key.d1 = static_cast<int>(setup.grid_x.dim());
    key.d2 = static_cast<int>(setup.grid_y.dim());
    key.grid_fingerprint = reference::fingerprint(setup.grid_x) ^ (reference::fingerprint(setup.grid_y) * 0x9e3779b97f4a7c15ULL);
    key.score = setup.score_x.kind;
    key.B = options.B;
    key.seed = options.seed;
    key.route = options.route;
    return key;
}

NullTable permutation_null(const stats::TwoSampleSetup& setup, int m, const NullOptions& options) {
    check_B(options.B);
    const int total = static_cast<int>(setup.grid.size());
    if (m < 1 || m >= total) throw std::invalid_argument("permutation_null: m must lie in [1, N)");
    const NullTableKey key = make_key(setup, m, options);
    return cached_or_generate(key, options, [&] {
        std::vector<double> draws(static_cast<std::size_t>(options.B));
        parallel_for(draws.size(), resolve_threads(options.threads), [&](std::size_t b) {
            Rng rng = make_rng(options.seed, b);
            if (options.route == NullRoute::label_permutation) {
                std::vector<int> order(static_cast<std::size_t>(total));
                std::iota(order.begin(), order.end(), 0);
                shuffle(order, rng);
                draws[b] = stats::rank_hotelling_from_scores(setup.scored_grid, order, m, setup.sigma_inv);
            } else {
                const SampleMatrix z = fresh_data(options.route, total, static_cast<int>(setup.grid.dim()), rng);
                draws[b] = stats::rank_hotelling(z.topRows(m), z.bottomRows(total - m), setup).statistic;
            }
        });
        return NullTable(std::move(draws));
    });
}

NullTable permutation_null(const stats::IndependenceSetup& setup, const NullOptions& options) {
    check_B(options.B);
    const int n = static_cast<int>(setup.grid_x.size());
    const NullTableKey key = make_key(setup, options);
    return cached_or_generate(key, options, [&] {
        std::vector<double> draws(static_cast<std::size_t>(options.B));
        parallel_for(draws.size(), resolve_threads(options.threads), [&](std::size_t b) {
            Rng rng = make_rng(options.seed, b);
            if (options.route == NullRoute::label_permutation) {
                std::vector<int> order(static_cast<std::size_t>(n));
                std::iota(order.begin(), order.end(), 0);
                shuffle(order, rng);
                Matrix sy(n, setup.scored_y.cols());
                for (int i = 0; i < n; ++i) sy.row(i) = setup.scored_y.row(order[i]);
                draws[b] = stats::spearman_from_scores(setup.scored_x, sy, setup.whiten_x, setup.whiten_y);
            } else {
                const SampleMatrix x = fresh_data(options.route, n, static_cast<int>(setup.grid_x.dim()), rng);
                const SampleMatrix y = fresh_data(options.route, n, static_cast<int>(setup.grid_y.dim()), rng);
                draws[b] = stats::rank_spearman(x, y, setup);
            }
        });
        return NullTable(std::move(draws));
    });
}

NullCache::NullCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path NullCache::file_for(const NullTableKey& key) const {
    return dir_ / ("null_" + hex(fnv1a(key.canonical())) + ".bin");
}

std::optional<NullTable> NullCache::load(const NullTableKey& key) const {
    std::ifstream in(file_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::string header;
    if (!std::getline(in, header) || header != "otrank-null 1 " + key.canonical()) return std::nullopt;
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != static_cast<std::size_t>(key.B) * 8) return std::nullopt;
    std::vector<double> draws(static_cast<std::size_t>(key.B));
    for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = read_le(bytes.data() + 8 * i);
    return NullTable(std::move(draws));
}

void NullCache::store(const NullTableKey& key, const NullTable& table) const {
    std::filesystem::create_directories(dir_);
    std::ostringstream out(std::ios::binary);
    out << "otrank-null 1 " << key.canonical() << '\n';
    for (double v : table.draws()) write_le(out, v);
    const std::filesystem::path file = file_for(key);
    atomic_write(file, out.str());

    const std::filesystem::path index = dir_ / "index.txt";
    std::string existing;
    {
        std::ifstream in(index);
        existing.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    const std::string entry = hex(key.grid_fingerprint) + " " + file.filename().string() + "\n";
    if (existing.find(entry) == std::string::npos) atomic_write(index, existing + entry);
}

std::optional<std::filesystem::path> NullCache::default_dir() {
    if (const char* env = std::getenv("OTRANK_CACHE"); env && *env) return std::filesystem::path(env);
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "otrank";
    if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "otrank";
    return std::nullopt;
}

TestReport run_test(const stats::TwoSampleInput& input, const RunOptions& options) {
    check_alpha(options.alpha);
    const auto result = stats::rank_hotelling(input);
    TestReport report;
    report.test = "rank_hotelling";
    report.statistic = result.statistic;
    report.df = static_cast<int>(input.setup.grid.dim());
    report.diagnostics["m"] = static_cast<double>(input.x.rows());
    report.diagnostics["n"] = static_cast<double>(input.y.rows());
    report.diagnostics["delta_norm"] = result.delta.norm();
    if (options.calibration == Calibration::asymptotic) return finish_report(report, options, nullptr);
    const NullTable table = permutation_null(input.setup, static_cast<int>(input.x.rows()), options.null);
    return finish_report(report, options, &table);
}

TestReport run_test(const stats::IndependenceInput& input, const RunOptions& options) {
    check_alpha(options.alpha);
    TestReport report;
    report.test = "rank_spearman";
    report.statistic = stats::rank_spearman(input);
    report.df = static_cast<int>(input.setup.grid_x.dim() * input.setup.grid_y.dim());
    report.diagnostics["n"] = static_cast<double>(input.x.rows());
    report.diagnostics["d1"] = static_cast<double>(input.x.cols());
    report.diagnostics["d2"] = static_cast<double>(input.y.cols());
    if (options.calibration == Calibration::asymptotic) return finish_report(report, options, nullptr);
    const NullTable table = permutation_null(input.setup, options.null);
    return finish_report(report, options, &table);
}

}  // namespace otrank::calib
