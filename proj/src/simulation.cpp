#include "otrank/simulation.hpp"

#include "otrank/linalg.hpp"
#include "otrank/special_fn.hpp"
#include "otrank/statistics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace otrank::sim {

namespace {

Vector location_or_zero(const FamilyParams& p, int d) {
    if (p.location.size() == 0) return Vector::Zero(d);
    if (p.location.size() != d) throw std::invalid_argument("family location has the wrong dimension");
    return p.location;
}

Matrix scatter_root(const FamilyParams& p, int d) {
    if (p.scatter.size() == 0) return Matrix::Identity(d, d);
    if (p.scatter.rows() != d) throw std::invalid_argument("family scatter has the wrong dimension");
    return linalg::sym_sqrt(p.scatter);
}

double uniform_open(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = 0.0;
    do {
        u = unif(rng);
    } while (u <= 0.0);
    return u;
}

Matrix correlated_laplace_scatter(int d) {
    return 0.5 * Matrix::Identity(d, d) + 0.5 * Matrix::Ones(d, d);
}

double binomial_se(double p, int b) { return std::sqrt(p * (1.0 - p) / b); }

unsigned threads_or_default(unsigned t) { return t == 0 ? default_thread_count() : t; }

bool is_two_sample_test(TestId t) {
    return t == TestId::hotelling || t == TestId::rank_uniform || t == TestId::rank_gaussian;
}

// Unit-variance log-normal coordinates for the Konijn experiments.
void standardize_lognormal(SampleMatrix& z) {
    const double e = std::numbers::e;
    const double mean = std::sqrt(e);
    const double sd = std::sqrt(e * (e - 1.0));
    z = ((z.array() - mean) / sd).matrix();
}

// Centered block with identity sample covariance, so that the Wilks statistic
// of (x, y[pi]) is -n log det(I - C C'), C = wx' wy[pi] / n.
Matrix whitened(const SampleMatrix& z) {
    const double n = static_cast<double>(z.rows());
    const Matrix c = z.rowwise() - z.colwise().mean();
    return c * linalg::sym_inv_sqrt(c.transpose() * c / n);
}

double wilks_whitened(const Matrix& wx, const Matrix& wy, const std::vector<int>& perm) {
    const Eigen::Index n = wx.rows();
    Matrix c = Matrix::Zero(wx.cols(), wy.cols());
    for (Eigen::Index i = 0; i < n; ++i) c.noalias() += wx.row(i).transpose() * wy.row(perm[static_cast<std::size_t>(i)]);
    c /= static_cast<double>(n);
    const Matrix g = Matrix::Identity(c.rows(), c.rows()) - c * c.transpose();
    return -static_cast<double>(n) * std::log(g.determinant());
}

}  // namespace

std::string_view to_string(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::logistic: return "logistic";
        case Family::laplace_elliptical: return "laplace_elliptical";
        case Family::lognormal: return "lognormal";
        case Family::epanechnikov: return "epanechnikov";
        case Family::spherical_uniform: return "spherical_uniform";
    }
    return "unknown";
}

Family parse_family(std::string_view text) {
    for (Family f : {Family::gaussian, Family::logistic, Family::laplace_elliptical, Family::lognormal,
                     Family::epanechnikov, Family::spherical_uniform}) {
        if (text == to_string(f)) return f;
    }
    throw std::invalid_argument("unknown family '" + std::string(text) + "'");
}

double epanechnikov_from_uniform(double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("epanechnikov_from_uniform: u must lie in [0, 1]");
    // Root in [-1, 1] of t^3 - 3t + 2(2u - 1) = 0, the inverse of the CDF of (3/4)(1 - t^2).
    const double t = 2.0 * std::sin(std::asin(2.0 * u - 1.0) / 3.0);
    return std::sqrt(5.0) * t;
}

double epanechnikov_pdf(double x, double theta, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("epanechnikov_pdf: sigma must be positive");
    const double z = x - theta;
    if (std::abs(z) > std::sqrt(5.0) * sigma) return 0.0;
    return 3.0 / (20.0 * std::sqrt(5.0) * sigma * sigma * sigma) * (5.0 * sigma * sigma - z * z);
}

SampleMatrix sample_family(Family family, const FamilyParams& params, int n, int d, Rng& rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("sample_family: n and d must be positive");
    if (!(params.scale > 0.0)) throw std::invalid_argument("sample_family: scale must be positive");
    const Vector loc = location_or_zero(params, d);
    SampleMatrix out(n, d);
    std::normal_distribution<double> norm;
    switch (family) {
        case Family::gaussian: {
            const Matrix root = scatter_root(params, d);
            Vector g(d);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < d; ++k) g(k) = norm(rng);
                out.row(i) = (loc + root * g).transpose();
            }
            break;
        }
        case Family::logistic:
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < d; ++k) {
                    const double u = uniform_open(rng);
                    out(i, k) = loc(k) + params.scale * std::log(u / (1.0 - u));
                }
            }
            break;
        case Family::laplace_elliptical: {
            const Matrix root = scatter_root(params, d);
            std::exponential_distribution<double> expo(1.0);
            Vector g(d);
            for (int i = 0; i < n; ++i) {
                const double w = expo(rng);
                for (int k = 0; k < d; ++k) g(k) = norm(rng);
                out.row(i) = (loc + std::sqrt(w) * (root * g)).transpose();
            }
            break;
        }
        case Family::lognormal:
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < d; ++k) out(i, k) = std::exp(loc(k) + norm(rng));
            break;
        case Family::epanechnikov: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < d; ++k) out(i, k) = loc(k) + params.scale * epanechnikov_from_uniform(unif(rng));
            break;
        }
        case Family::spherical_uniform: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            Vector g(d);
            for (int i = 0; i < n; ++i) {
                double r2 = 0.0;
                do {
                    for (int k = 0; k < d; ++k) g(k) = norm(rng);
                    r2 = g.squaredNorm();
                } while (r2 == 0.0);
                out.row(i) = (loc + g * (params.scale * unif(rng) / std::sqrt(r2))).transpose();
            }
            break;
        }
    }
    return out;
}

SampleMatrix sample_family(Family family, const FamilyParams& params, int n, int d, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return sample_family(family, params, n, d, rng);
}

Matrix default_konijn_matrix(int dx, int dy) { return Matrix::Identity(dx, dy); }

KonijnPair konijn_mix(const SampleMatrix& xp, const SampleMatrix& yp, double delta, const Matrix& m,
                      std::optional<int> n_rate) {
    if (xp.rows() != yp.rows()) throw std::invalid_argument("konijn_mix: row counts differ");
    if (m.rows() != xp.cols() || m.cols() != yp.cols()) throw std::invalid_argument("konijn_mix: M has the wrong shape");
    const double rate = n_rate.value_or(static_cast<int>(xp.rows()));
    if (!(rate > 0.0)) throw std::invalid_argument("konijn_mix: rate must be positive");
    const double e = delta / std::sqrt(rate);
    if (delta == 0.0) return {xp, yp};
    return {(1.0 - e) * xp + e * yp * m.transpose(), e * xp * m + (1.0 - e) * yp};
}

std::string_view to_string(Setting s) {
    switch (s) {
        case Setting::H1: return "H1";
        case Setting::H2: return "H2";
        case Setting::A1: return "A1";
        case Setting::A2: return "A2";
        case Setting::A3: return "A3";
        case Setting::A4: return "A4";
        case Setting::konijn: return "konijn";
        case Setting::custom: return "custom";
    }
    return "unknown";
}

Setting parse_setting(std::string_view text) {
    for (Setting s : {Setting::H1, Setting::H2, Setting::A1, Setting::A2, Setting::A3, Setting::A4, Setting::konijn,
                      Setting::custom}) {
        if (text == to_string(s)) return s;
    }
    throw std::invalid_argument("unknown setting '" + std::string(text) + "'");
}

std::string_view to_string(TestId t) {
    switch (t) {
        case TestId::hotelling: return "hotelling";
        case TestId::rank_uniform: return "rank_uniform";
        case TestId::rank_gaussian: return "rank_gaussian";
        case TestId::rank_spearman: return "rank_spearman";
        case TestId::wilks: return "wilks";
    }
    return "unknown";
}

TestId parse_test(std::string_view text) {
    for (TestId t : {TestId::hotelling, TestId::rank_uniform, TestId::rank_gaussian, TestId::rank_spearman,
                     TestId::wilks}) {
        if (text == to_string(t)) return t;
    }
    throw std::invalid_argument("unknown test '" + std::string(text) + "'");
}

void ScenarioSpec::validate() const {
    if (B < 1) throw std::invalid_argument("scenario: B must be at least 1");
    if (thetas.empty()) throw std::invalid_argument("scenario: parameter grid is empty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scenario: alpha must lie in (0, 1)");
    if (tests.empty()) throw std::invalid_argument("scenario: no tests selected");
    if (setting == Setting::konijn) {
        if (n < 3 || dx < 1 || dy < 1) throw std::invalid_argument("scenario: bad Konijn dimensions");
        for (TestId t : tests) {
            if (is_two_sample_test(t)) throw std::invalid_argument("scenario: two-sample test in an independence setting");
        }
    } else {
        if (m < 2 || n < 2 || d < 1) throw std::invalid_argument("scenario: bad sample sizes");
        for (TestId t : tests) {
            if (!is_two_sample_test(t)) throw std::invalid_argument("scenario: independence test in a two-sample setting");
        }
    }
    if (calibration == calib::Calibration::permutation && permutation_B < 100) {
        throw std::invalid_argument("scenario: permutation calibration needs permutation_B >= 100");
    }
}

ScenarioSpec default_scenario(Setting setting, int d) {
    ScenarioSpec s;
    s.setting = setting;
    s.d = d;
    s.tests = {TestId::hotelling, TestId::rank_uniform, TestId::rank_gaussian};
    auto range = [](double lo, double hi, int k) {
        std::vector<double> v;
        for (int i = 0; i < k; ++i) v.push_back(lo + (hi - lo) * i / (k - 1));
        return v;
    };
    switch (setting) {
        case Setting::A1:
        case Setting::A2: s.thetas = range(0.01, 0.20, 5); break;
        case Setting::A3: s.thetas = range(0.01, 0.5, 5); break;
        case Setting::A4: s.thetas = range(-0.25, -0.01, 5); break;
        case Setting::H1:
        case Setting::H2: s.thetas = {0.1}; break;
        case Setting::konijn:
            s.thetas = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
            s.tests = {TestId::rank_spearman, TestId::wilks};
            s.d = 0;
            break;
        case Setting::custom: s.thetas = range(0.0, 0.3, 4); break;
    }
    return s;
}

const PowerPoint& PowerCurve::at(double theta, TestId test) const {
    for (const auto& p : points) {
        if (p.test == test && std::abs(p.theta - theta) < 1e-12) return p;
    }
    throw std::out_of_range("power curve has no point for the requested parameter and test");
}

TwoSampleDraw draw_two_sample(Setting setting, Family custom_family, int m, int n, int d, double theta, Rng& rng) {
    FamilyParams p1;
    FamilyParams p2;
    p2.location = Vector::Constant(d, theta);
    Family family = Family::gaussian;
    switch (setting) {
        case Setting::H1: family = Family::epanechnikov; break;
        case Setting::H2:
        case Setting::A1: family = Family::gaussian; break;
        case Setting::A2: family = Family::logistic; break;
        case Setting::A3:
            family = Family::laplace_elliptical;
            p1.scatter = correlated_laplace_scatter(d);
            p2.scatter = p1.scatter;
            break;
        case Setting::A4: family = Family::lognormal; break;
        case Setting::custom: family = custom_family; break;
        case Setting::konijn: throw std::invalid_argument("draw_two_sample: konijn is an independence setting");
    }
    TwoSampleDraw out;
    out.x = sample_family(family, p1, m, d, rng);
    out.y = sample_family(family, p2, n, d, rng);
    return out;
}

std::string setting_notes(Setting setting) {
    switch (setting) {
        case Setting::A2: return "A2: independent logistic coordinates, unit scale";
        case Setting::A3: return "A3: elliptical Laplace sqrt(W) L G, W ~ Exp(1), L L' = 0.5 I + 0.5 11'";
        case Setting::A4: return "A4: log X ~ N(0, I), log Y ~ N(theta 1, I)";
        case Setting::H1: return "H1: independent Epanechnikov coordinates, sigma = 1";
        case Setting::konijn: return "konijn: M = rectangular identity; log-normal inputs standardized to mean 0, variance 1";
        default: return "";
    }
}

PowerCurve power_curve(const ScenarioSpec& spec) {
    if (spec.setting == Setting::konijn) return konijn_power(spec);
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    const int total = spec.m + spec.n;
    const std::size_t nt = spec.thetas.size();
    const std::size_t nk = spec.tests.size();

    std::map<TestId, stats::TwoSampleSetup> setups;
    std::map<TestId, double> cutoffs;
    for (TestId t : spec.tests) {
        if (t == TestId::rank_uniform) setups[t] = stats::TwoSampleSetup::standard(NuTag::uniform_cube, ScoreKind::identity, total, spec.d);
        if (t == TestId::rank_gaussian) setups[t] = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, total, spec.d);
        if (spec.calibration == calib::Calibration::permutation && t != TestId::hotelling) {
            calib::NullOptions null;
            null.B = spec.permutation_B;
            null.seed = splitmix64(spec.seed ^ 0x6e756c6cULL);
            null.threads = spec.threads;
            cutoffs[t] = calib::permutation_null(setups[t], spec.m, null).cutoff(spec.alpha);
        } else {
            cutoffs[t] = calib::asymptotic_cutoff(spec.d, spec.alpha);
        }
    }

    std::vector<unsigned char> reject(static_cast<std::size_t>(spec.B) * nt * nk, 0);
    parallel_for(static_cast<std::size_t>(spec.B), threads_or_default(spec.threads), [&](std::size_t b) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            Rng rng = make_rng(spec.seed, b);
            const TwoSampleDraw draw =
                draw_two_sample(spec.setting, spec.custom_family, spec.m, spec.n, spec.d, spec.thetas[ti], rng);
            for (std::size_t k = 0; k < nk; ++k) {
                const TestId t = spec.tests[k];
                const double stat = t == TestId::hotelling ? stats::hotelling_t2(draw.x, draw.y)
                                                           : stats::rank_hotelling(draw.x, draw.y, setups.at(t)).statistic;
                reject[(b * nt + ti) * nk + k] = stat >= cutoffs.at(t) ? 1 : 0;
            }
        }
    });

    PowerCurve curve;
    curve.seed = spec.seed;
    curve.notes = setting_notes(spec.setting);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        for (std::size_t k = 0; k < nk; ++k) {
            long count = 0;
            for (int b = 0; b < spec.B; ++b) count += reject[(static_cast<std::size_t>(b) * nt + ti) * nk + k];
            const double p = static_cast<double>(count) / spec.B;
            curve.points.push_back({spec.thetas[ti], spec.tests[k], p, binomial_se(p, spec.B), spec.B, spec.m, spec.n});
        }
    }
    curve.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return curve;
}

PowerCurve konijn_power(const ScenarioSpec& spec) {
    spec.validate();
    if (spec.setting != Setting::konijn) throw std::invalid_argument("konijn_power: setting must be konijn");
    const auto start = std::chrono::steady_clock::now();
    const Matrix mix = spec.konijn_m.size() == 0 ? default_konijn_matrix(spec.dx, spec.dy) : spec.konijn_m;
    if (spec.konijn_family != Family::gaussian && spec.konijn_family != Family::lognormal) {
        throw std::invalid_argument("konijn_power: inputs must be gaussian or lognormal");
    }
    const std::size_t nt = spec.thetas.size();
    const std::size_t nk = spec.tests.size();
    const int df = spec.dx * spec.dy;

    const stats::IndependenceSetup setup =
        stats::IndependenceSetup::standard(NuTag::gaussian, ScoreKind::identity, spec.n, spec.dx, spec.dy);
    double spearman_cut = calib::asymptotic_cutoff(df, spec.alpha);
    if (spec.calibration == calib::Calibration::permutation) {
        calib::NullOptions null;
        null.B = spec.permutation_B;
        null.seed = splitmix64(spec.seed ^ 0x6e756c6cULL);
        null.threads = spec.threads;
        spearman_cut = calib::permutation_null(setup, null).cutoff(spec.alpha);
    }
    const double wilks_cut = calib::asymptotic_cutoff(df, spec.alpha);
    // Wilks is not distribution-free; under permutation calibration each
    // replication gets its own permutation test, shared across the delta grid.
    const bool wilks_perm = spec.calibration == calib::Calibration::permutation &&
                            std::find(spec.tests.begin(), spec.tests.end(), TestId::wilks) != spec.tests.end();
    const std::uint64_t perm_seed = splitmix64(spec.seed ^ 0x7065726dULL);

    std::vector<unsigned char> reject(static_cast<std::size_t>(spec.B) * nt * nk, 0);
    parallel_for(static_cast<std::size_t>(spec.B), threads_or_default(spec.threads), [&](std::size_t b) {
        Rng rng = make_rng(spec.seed, b);
        SampleMatrix xp = sample_family(spec.konijn_family, {}, spec.n, spec.dx, rng);
        SampleMatrix yp = sample_family(spec.konijn_family, {}, spec.n, spec.dy, rng);
        if (spec.konijn_family == Family::lognormal) {
            standardize_lognormal(xp);
            standardize_lognormal(yp);
        }
        std::vector<KonijnPair> pairs;
        pairs.reserve(nt);
        for (std::size_t ti = 0; ti < nt; ++ti) pairs.push_back(konijn_mix(xp, yp, spec.thetas[ti], mix));

        std::vector<double> wilks_obs(nt);
        std::vector<unsigned char> wilks_rej(nt, 0);
        for (std::size_t ti = 0; ti < nt; ++ti) wilks_obs[ti] = stats::wilks(pairs[ti].x, pairs[ti].y);
        if (wilks_perm) {
            std::vector<Matrix> wx(nt);
            std::vector<Matrix> wy(nt);
            for (std::size_t ti = 0; ti < nt; ++ti) {
                wx[ti] = whitened(pairs[ti].x);
                wy[ti] = whitened(pairs[ti].y);
            }
            std::vector<int> perm(static_cast<std::size_t>(spec.n));
            std::iota(perm.begin(), perm.end(), 0);
            std::vector<long> exceed(nt, 0);
            Rng prng = make_rng(perm_seed, b);
            for (int p = 0; p < spec.permutation_B; ++p) {
                std::shuffle(perm.begin(), perm.end(), prng);
                for (std::size_t ti = 0; ti < nt; ++ti) {
                    if (wilks_whitened(wx[ti], wy[ti], perm) >= wilks_obs[ti]) ++exceed[ti];
                }
            }
            for (std::size_t ti = 0; ti < nt; ++ti) {
                const double pval = (1.0 + exceed[ti]) / (spec.permutation_B + 1.0);
                wilks_rej[ti] = pval <= spec.alpha ? 1 : 0;
            }
        } else {
            for (std::size_t ti = 0; ti < nt; ++ti) wilks_rej[ti] = wilks_obs[ti] >= wilks_cut ? 1 : 0;
        }

        for (std::size_t ti = 0; ti < nt; ++ti) {
            for (std::size_t k = 0; k < nk; ++k) {
                const bool rej = spec.tests[k] == TestId::wilks
                                     ? wilks_rej[ti] != 0
                                     : stats::rank_spearman(pairs[ti].x, pairs[ti].y, setup) >= spearman_cut;
                reject[(b * nt + ti) * nk + k] = rej ? 1 : 0;
            }
        }
    });

    PowerCurve curve;
    curve.seed = spec.seed;
    curve.notes = setting_notes(Setting::konijn);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        for (std::size_t k = 0; k < nk; ++k) {
            long count = 0;
            for (int b = 0; b < spec.B; ++b) count += reject[(static_cast<std::size_t>(b) * nt + ti) * nk + k];
            const double p = static_cast<double>(count) / spec.B;
            curve.points.push_back({spec.thetas[ti], spec.tests[k], p, binomial_se(p, spec.B), spec.B, spec.n, spec.n});
        }
    }
    curve.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return curve;
}

HlReport hl_sample_size_match(Setting setting, const std::vector<int>& ns, int B, double ratio, std::uint64_t seed,
                              unsigned threads, double alpha) {
    if (setting != Setting::H1 && setting != Setting::H2) {
        throw std::invalid_argument("hl_sample_size_match: setting must be H1 or H2");
    }
    if (ns.empty() || B < 1 || !(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("hl_sample_size_match: bad arguments");
    constexpr int d = 2;
    constexpr double shift = 0.1;
    const double cut = calib::asymptotic_cutoff(d, alpha);

    HlReport report;
    report.setting = setting;
    report.ratio = ratio;
    report.B = B;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        const int n = ns[ni];
        const int nm = static_cast<int>(std::floor(ratio * n));
        if (nm < 2) throw std::invalid_argument("hl_sample_size_match: matched size too small");
        const auto uni = stats::TwoSampleSetup::standard(NuTag::uniform_cube, ScoreKind::identity, 2 * n, d);
        const auto gau = stats::TwoSampleSetup::standard(NuTag::gaussian, ScoreKind::identity, 2 * nm, d);
        std::vector<unsigned char> rej(static_cast<std::size_t>(B) * 3, 0);
        const std::uint64_t row_seed = splitmix64(seed ^ static_cast<std::uint64_t>(n));
        parallel_for(static_cast<std::size_t>(B), threads_or_default(threads), [&](std::size_t b) {
            Rng rng = make_rng(row_seed, b);
            const TwoSampleDraw draw = draw_two_sample(setting, Family::gaussian, n, n, d, shift, rng);
            const SampleMatrix xm = draw.x.topRows(nm);
            const SampleMatrix ym = draw.y.topRows(nm);
            rej[b * 3 + 0] = stats::rank_hotelling(draw.x, draw.y, uni).statistic >= cut;
            rej[b * 3 + 1] = stats::hotelling_t2(xm, ym) >= cut;
            rej[b * 3 + 2] = stats::rank_hotelling(xm, ym, gau).statistic >= cut;
        });
        double c[3] = {0, 0, 0};
        for (int b = 0; b < B; ++b)
            for (int k = 0; k < 3; ++k) c[k] += rej[static_cast<std::size_t>(b) * 3 + k];
        HlRow row;
        row.n = n;
        row.n_matched = nm;
        row.rank_uniform = c[0] / B;
        row.hotelling = c[1] / B;
        row.rank_gaussian = c[2] / B;
        row.se = std::max({binomial_se(row.rank_uniform, B), binomial_se(row.hotelling, B), binomial_se(row.rank_gaussian, B)});
        report.max_gap = std::max(report.max_gap, std::abs(row.rank_uniform - row.hotelling));
        report.max_gaussian_deficit = std::max(report.max_gaussian_deficit, row.hotelling - row.rank_gaussian);
        report.max_spread = std::max({report.max_spread, std::abs(row.rank_uniform - row.hotelling),
                                      std::abs(row.rank_uniform - row.rank_gaussian), std::abs(row.hotelling - row.rank_gaussian)});
        report.rows.push_back(row);
    }
    return report;
}

std::string to_csv(const PowerCurve& curve) {
    std::string out = "theta,test,power,se,B,seed\n";
    char buf[256];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.10g,%s,%.10g,%.10g,%d,%llu\n", p.theta, std::string(to_string(p.test)).c_str(),
                      p.power, p.se, p.B, static_cast<unsigned long long>(curve.seed));
        out += buf;
    }
    return out;
}

std::string to_gnuplot(const PowerCurve& curve) {
    std::string out;
    std::vector<TestId> order;
    for (const auto& p : curve.points) {
        if (std::find(order.begin(), order.end(), p.test) == order.end()) order.push_back(p.test);
    }
    char buf[128];
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0) out += "\n\n";
        out += "# test=" + std::string(to_string(order[k])) + "\n# theta power se\n";
        for (const auto& p : curve.points) {
            if (p.test != order[k]) continue;
            std::snprintf(buf, sizeof buf, "%.10g %.10g %.10g\n", p.theta, p.power, p.se);
            out += buf;
        }
    }
    return out;
}

}  // namespace otrank::sim
