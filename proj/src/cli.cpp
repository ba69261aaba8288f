#include "otrank/cli.hpp"

#include "otrank/are.hpp"
#include "otrank/calibration.hpp"
#include "otrank/csv.hpp"
#include "otrank/lap.hpp"
#include "otrank/reference.hpp"
#include "otrank/simulation.hpp"
#include "otrank/statistics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace otrank::cli {

namespace {

struct Common {
    double alpha = 0.05;
    std::string nu = "gaussian";
    std::string score = "identity";
    std::string calibration = "permutation";
    int B = 2000;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> grid_seed;
    bool center = false;
    bool jitter = false;
    std::string cache_dir;
    bool no_cache = false;
    unsigned threads = 0;
    bool json = false;
    bool quiet = false;
    std::string output;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--alpha", c.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--nu", c.nu, "reference law: uniform_cube, spherical_uniform, gaussian");
    sub->add_option("--score", c.score, "score: identity, coord_gaussian_cdf, coord_gaussian_quantile, van_der_waerden");
    sub->add_option("--calibration", c.calibration, "asymptotic or permutation");
    sub->add_option("--B", c.B, "null draws for permutation calibration")->check(CLI::Range(100, 100000000));
    sub->add_option("--seed", c.seed, "seed for null draws, jitter and MC ERD");
    sub->add_option("--grid-seed", c.grid_seed, "seed for randomized grids");
    sub->add_flag("--center", c.center, "center the grid at its mean");
    sub->add_flag("--jitter", c.jitter, "break ties by seeded jitter instead of failing");
    sub->add_option("--cache-dir", c.cache_dir, "null-table cache directory");
    sub->add_flag("--no-cache", c.no_cache, "do not read or write the null-table cache");
    sub->add_option("--threads", c.threads, "worker threads (default: OTRANK_THREADS or all cores)");
    sub->add_flag("--json", c.json, "JSON report");
    sub->add_flag("--quiet", c.quiet, "no log output");
    sub->add_option("--output", c.output, "also write the report to this file");
}

class Log {
public:
    Log(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
    void operator()(const std::string& msg) const {
        if (!quiet_) err_ << "otrank: " << msg << '\n';
    }

private:
    std::ostream& err_;
    bool quiet_;
};

unsigned thread_count(unsigned flag) { return flag > 0 ? flag : default_thread_count(); }

std::optional<std::filesystem::path> cache_dir(const Common& c) {
    if (c.no_cache) return std::nullopt;
    if (!c.cache_dir.empty()) return std::filesystem::path(c.cache_dir);
    return calib::NullCache::default_dir();
}

Matrix erd_sigma(NuTag nu, const reference::ScoreFunction& score, std::uint64_t seed, const Log& log) {
    reference::ErdOptions opts;
    opts.allow_monte_carlo = true;
    opts.seed = seed;
    const auto spec = reference::erd_covariance(nu, score, opts);
    if (!spec.closed_form) log("ERD covariance estimated by Monte Carlo");
    return spec.sigma_erd;
}

ReferenceGrid make_grid(const Common& c, NuTag nu, int n, int d) {
    ReferenceGrid grid = reference::default_grid(nu, n, d, c.grid_seed);
    if (c.center) reference::center_grid(grid);
    return grid;
}

calib::RunOptions run_options(const Common& c) {
    calib::RunOptions opts;
    opts.alpha = c.alpha;
    opts.calibration = calib::parse_calibration(c.calibration);
    opts.null.B = c.B;
    opts.null.seed = c.seed;
    opts.null.threads = thread_count(c.threads);
    opts.null.cache_dir = cache_dir(c);
    return opts;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string render(const calib::TestReport& r, bool json) {
    if (json) {
        nlohmann::ordered_json j;
        j["schema"] = 1;
        j["test"] = r.test;
        j["statistic"] = r.statistic;
        j["df"] = r.df;
        j["cutoff"] = r.cutoff;
        j["p_value"] = r.p_value;
        j["calibration"] = std::string(calib::to_string(r.calibration));
        j["decision"] = r.decision;
        j["alpha"] = r.alpha;
        j["B"] = r.B;
        j["diagnostics"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = v;
        return j.dump(2) + "\n";
    }
    std::ostringstream s;
    s << "test:        " << r.test << '\n'
      << "statistic:   " << format_double(r.statistic) << '\n'
      << "df:          " << r.df << '\n'
      << "cutoff:      " << format_double(r.cutoff) << '\n'
      << "p-value:     " << format_double(r.p_value) << '\n'
      << "calibration: " << calib::to_string(r.calibration);
    if (r.calibration == calib::Calibration::permutation) s << " (B=" << r.B << ")";
    s << '\n'
      << "alpha:       " << format_double(r.alpha) << '\n'
      << "decision:    " << (r.decision ? "reject H0" : "do not reject H0") << '\n';
    for (const auto& [k, v] : r.diagnostics) s << "  " << k << " = " << format_double(v) << '\n';
    return s.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::filesystem::filesystem_error("cannot open output file", path, std::make_error_code(std::errc::io_error));
    f << text;
    if (!f) throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

int emit_report(const calib::TestReport& r, const Common& c, std::ostream& out) {
    const std::string text = render(r, c.json);
    out << text;
    if (!c.output.empty()) write_file(c.output, text);
    return r.decision ? kReject : kNoReject;
}

lap::RankOptions rank_options(const Common& c) {
    lap::RankOptions o;
    o.ties = c.jitter ? lap::TiePolicy::jitter : lap::TiePolicy::reject;
    o.jitter_seed = c.seed;
    return o;
}

int cmd_two_sample(const Common& c, const std::string& xpath, const std::string& ypath, std::ostream& out,
                   const Log& log) {
    const auto x = csv::read_file(xpath).data;
    const auto y = csv::read_file(ypath).data;
    if (x.cols() != y.cols()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()) +
                                    " columns");
    }
    const int d = static_cast<int>(x.cols());
    const int total = static_cast<int>(x.rows() + y.rows());
    const NuTag nu = parse_nu_tag(c.nu);
    const reference::ScoreFunction score{parse_score_kind(c.score), d};
    log("ranking " + std::to_string(total) + " points in dimension " + std::to_string(d));
    auto setup = stats::TwoSampleSetup::make(make_grid(c, nu, total, d), score, erd_sigma(nu, score, c.seed, log),
                                             rank_options(c));
    const stats::TwoSampleInput input{x, y, std::move(setup)};
    return emit_report(calib::run_test(input, run_options(c)), c, out);
}

int cmd_independence(const Common& c, const std::string& path, int dx, std::ostream& out, const Log& log) {
    const auto xy = csv::read_file(path).data;
    if (dx < 1 || dx >= xy.cols()) {
        throw std::invalid_argument("--dx must lie in [1, " + std::to_string(xy.cols() - 1) + "]");
    }
    const int dy = static_cast<int>(xy.cols()) - dx;
    const int n = static_cast<int>(xy.rows());
    const NuTag nu = parse_nu_tag(c.nu);
    const ScoreKind kind = parse_score_kind(c.score);
    const reference::ScoreFunction sx{kind, dx};
    const reference::ScoreFunction sy{kind, dy};
    log("ranking " + std::to_string(n) + " pairs, dimensions " + std::to_string(dx) + " and " + std::to_string(dy));
    auto setup = stats::IndependenceSetup::make(make_grid(c, nu, n, dx), make_grid(c, nu, n, dy), sx, sy,
                                                erd_sigma(nu, sx, c.seed, log), erd_sigma(nu, sy, c.seed, log),
                                                rank_options(c));
    const stats::IndependenceInput input{xy.leftCols(dx), xy.rightCols(dy), std::move(setup)};
    return emit_report(calib::run_test(input, run_options(c)), c, out);
}

struct PowerFlags {
    std::string setting = "A1";
    int d = 2;
    int m = 300;
    int n = 300;
    int B = 500;
    double alpha = 0.05;
    std::vector<double> thetas;
    std::vector<std::string> tests;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string calibration = "asymptotic";
    int permutation_B = 2000;
    int dx = 2;
    int dy = 2;
    std::string family = "gaussian";
    std::string output;
    std::string gnuplot;
    bool quiet = false;
};

int cmd_power_sim(const PowerFlags& f, std::ostream& out, const Log& log) {
    const sim::Setting setting = sim::parse_setting(f.setting);
    sim::ScenarioSpec spec = sim::default_scenario(setting, f.d);
    spec.m = f.m;
    spec.n = f.n;
    spec.B = f.B;
    spec.alpha = f.alpha;
    spec.seed = f.seed;
    spec.threads = thread_count(f.threads);
    spec.calibration = calib::parse_calibration(f.calibration);
    spec.permutation_B = f.permutation_B;
    spec.dx = f.dx;
    spec.dy = f.dy;
    if (setting == sim::Setting::konijn) spec.konijn_family = sim::parse_family(f.family);
    if (setting == sim::Setting::custom) spec.custom_family = sim::parse_family(f.family);
    if (!f.thetas.empty()) spec.thetas = f.thetas;
    if (!f.tests.empty()) {
        spec.tests.clear();
        for (const auto& t : f.tests) spec.tests.push_back(sim::parse_test(t));
    }
    const std::string notes = sim::setting_notes(setting);
    if (!notes.empty()) log(notes);
    const sim::PowerCurve curve = sim::power_curve(spec);
    log("runtime " + format_double(curve.runtime_seconds) + " s");
    const std::string text = sim::to_csv(curve);
    out << text;
    if (!f.output.empty()) write_file(f.output, text);
    if (!f.gnuplot.empty()) write_file(f.gnuplot, sim::to_gnuplot(curve));
    return kNoReject;
}

std::string are_table(int dmax) {
    std::string s = "d,kappa_closed,kappa_quadrature,elliptical_bound\n";
    char buf[160];
    for (int d = 1; d <= dmax; ++d) {
        const auto k = are::kappa_d(d);
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", d, k.closed_form.value, k.quadrature.value,
                      are::elliptical_bound(d));
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "constants,%.10g,%.10g,%.10g,%.10g\n", are::are_gaussian_uniform_erd(),
                  are::hodges_lehmann_bound(), are::chernoff_savage_bound(), are::elliptical_bound_limit());
    s += buf;
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal-transport rank tests for two-sample and independence problems"};
    app.name("otrank");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common two;
    std::string xpath;
    std::string ypath;
    auto* ts = app.add_subcommand("two-sample", "rank Hotelling test of equal distributions");
    ts->add_option("x", xpath, "sample 1 CSV")->required();
    ts->add_option("y", ypath, "sample 2 CSV")->required();
    add_common(ts, two);

    Common ind;
    std::string xypath;
    int dx = 0;
    auto* is = app.add_subcommand("independence", "rank Spearman test of independence");
    is->add_option("xy", xypath, "CSV with X columns followed by Y columns")->required();
    is->add_option("--dx", dx, "number of X columns")->required();
    add_common(is, ind);

    PowerFlags pf;
    auto* ps = app.add_subcommand("power-sim", "Monte Carlo power curve, CSV theta,test,power,se,B,seed");
    ps->add_option("--setting", pf.setting, "H1 H2 A1 A2 A3 A4 konijn custom");
    ps->add_option("--d", pf.d, "dimension (two-sample settings)");
    ps->add_option("--m", pf.m, "sample 1 size");
    ps->add_option("--n", pf.n, "sample 2 size, or pair count for konijn");
    ps->add_option("--B", pf.B, "replications")->check(CLI::PositiveNumber);
    ps->add_option("--alpha", pf.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    ps->add_option("--theta", pf.thetas, "parameter grid (delta for konijn)")->delimiter(',');
    ps->add_option("--tests", pf.tests, "hotelling rank_uniform rank_gaussian rank_spearman wilks")->delimiter(',');
    ps->add_option("--seed", pf.seed, "seed");
    ps->add_option("--threads", pf.threads, "worker threads");
    ps->add_option("--calibration", pf.calibration, "asymptotic or permutation");
    ps->add_option("--permutation-B", pf.permutation_B, "null draws under permutation calibration");
    ps->add_option("--dx", pf.dx, "konijn X dimension");
    ps->add_option("--dy", pf.dy, "konijn Y dimension");
    ps->add_option("--family", pf.family, "konijn inputs (gaussian, lognormal) or custom family");
    ps->add_option("--output", pf.output, "also write the CSV here");
    ps->add_option("--gnuplot", pf.gnuplot, "write per-test blocks for gnuplot here");
    ps->add_flag("--quiet", pf.quiet, "no log output");

    int dmax = 10;
    std::string are_out;
    auto* as = app.add_subcommand("are-table", "kappa_d and elliptical bounds, CSV");
    as->add_option("--dmax", dmax, "largest dimension")->check(CLI::Range(1, 100000));
    as->add_option("--output", are_out, "also write the CSV here");

    std::string g_nu = "gaussian";
    int g_n = 0;
    int g_d = 0;
    std::optional<std::uint64_t> g_seed;
    bool g_center = false;
    std::string g_out;
    std::string g_in;
    auto* gs = app.add_subcommand("grid", "generate or re-export reference grids");
    gs->require_subcommand(1);
    auto* gg = gs->add_subcommand("gen", "generate a grid as CSV");
    gs->add_subcommand("export", "alias of gen")->alias("generate");
    for (auto* sub : {gg, gs->get_subcommand("export")}) {
        sub->add_option("--nu", g_nu, "reference law");
        sub->add_option("--n", g_n, "number of points")->required();
        sub->add_option("--d", g_d, "dimension")->required();
        sub->add_option("--seed", g_seed, "randomization seed");
        sub->add_flag("--center", g_center, "center the grid");
        sub->add_option("--output", g_out, "write here instead of stdout");
    }
    auto* gi = gs->add_subcommand("import", "validate a grid CSV and re-emit it");
    gi->add_option("file", g_in, "grid CSV")->required();
    gi->add_option("--output", g_out, "write here instead of stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kNoReject;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kNoReject;
    } catch (const CLI::ParseError& e) {
        err << "otrank: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (ts->parsed()) return cmd_two_sample(two, xpath, ypath, out, Log(err, two.quiet));
        if (is->parsed()) return cmd_independence(ind, xypath, dx, out, Log(err, ind.quiet));
        if (ps->parsed()) return cmd_power_sim(pf, out, Log(err, pf.quiet));
        if (as->parsed()) {
            const std::string text = are_table(dmax);
            out << text;
            if (!are_out.empty()) write_file(are_out, text);
            return kNoReject;
        }
        if (gs->parsed()) {
            std::string text;
            if (gi->parsed()) {
                std::ifstream f(g_in, std::ios::binary);
                if (!f) throw std::filesystem::filesystem_error("cannot open grid file", g_in, std::make_error_code(std::errc::io_error));
                std::ostringstream buf;
                buf << f.rdbuf();
                text = reference::grid_to_csv(reference::grid_from_csv(buf.str()));
            } else {
                ReferenceGrid grid = reference::default_grid(parse_nu_tag(g_nu), g_n, g_d, g_seed);
                if (g_center) reference::center_grid(grid);
                text = reference::grid_to_csv(grid);
            }
            if (g_out.empty()) {
                out << text;
            } else {
                write_file(g_out, text);
            }
            return kNoReject;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        err << "otrank: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "otrank: " << e.what() << '\n';
        return kDataError;
    } catch (const std::domain_error& e) {
        err << "otrank: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "otrank: " << e.what() << '\n';
        return kInternal;
    }
    err << "otrank: no subcommand\n";
    return kUsage;
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace otrank::cli
