#include "otrank/are.hpp"
#include "otrank/cli.hpp"
#include "otrank/csv.hpp"
#include "otrank/reference.hpp"

#include <json.hpp>
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace otrank;

namespace {

const std::string kData = OTRANK_DATA_DIR;

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("otrank_cli_" + std::to_string(::getpid()) + "_" + name)).string();
}

}  // namespace

TEST(Csv, HeaderDetection) {
    const auto with = csv::parse("a,b\n1,2\n3,4\n");
    EXPECT_EQ(with.header, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(with.data.rows(), 2);
    const auto without = csv::parse("1,2\n3,4\n\n5, 6\r\n");
    EXPECT_TRUE(without.header.empty());
    EXPECT_EQ(without.data.rows(), 3);
    EXPECT_EQ(without.data(2, 1), 6.0);
    EXPECT_EQ(csv::parse("\xEF\xBB\xBFx\n1e-3\n").data(0, 0), 1e-3);
}

TEST(Csv, LineNumberedErrors) {
    try {
        csv::parse("a,b\n1,2\n3\n", "f.csv");
        FAIL();
    } catch (const csv::CsvError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(std::string(e.what()).rfind("f.csv:3:", 0), 0u) << e.what();
    }
    EXPECT_THROW(csv::parse("1,2\n3,4,5\n"), csv::CsvError);
    EXPECT_THROW(csv::parse("1,2\n3,4;5\n"), csv::CsvError);
    EXPECT_THROW(csv::parse("1,2\n3,4,\n"), csv::CsvError);
    EXPECT_THROW(csv::parse("1,2\n3,1,5\n"), csv::CsvError);
    EXPECT_THROW(csv::parse("x\n1,5\n"), csv::CsvError);
    EXPECT_THROW(csv::parse("x\n1e999\n"), csv::CsvError);
    EXPECT_THROW(csv::parse("x,y\n"), csv::CsvError);
    EXPECT_THROW(csv::read_file("/nonexistent/file.csv"), csv::CsvError);
}

TEST(Csv, WriteRoundTrip) {
    SampleMatrix m(2, 2);
    m << 0.1, 1.0 / 3.0, -2.5e-300, 7.0;
    const auto back = csv::parse(csv::write(m, {"p", "q"}));
    EXPECT_EQ(back.data, m);
    EXPECT_EQ(back.header.size(), 2u);
}

TEST(Cli, TwoSampleFixtureIsReproducible) {
    const std::vector<std::string> args{"two-sample", kData + "/gaussian_x.csv", kData + "/gaussian_y_shifted.csv",
                                        "--seed", "1", "--B", "999", "--no-cache", "--json", "--quiet"};
    const CliRun a = run(args);
    const CliRun b = run(args);
    EXPECT_EQ(a.code, cli::kReject);
    EXPECT_EQ(a.out, b.out);
    EXPECT_TRUE(a.err.empty());
    const auto j = nlohmann::json::parse(a.out);
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["test"], "rank_hotelling");
    EXPECT_EQ(j["decision"], true);
    EXPECT_EQ(j["B"], 999);
    EXPECT_NEAR(j["statistic"].get<double>(), 10.40372257, 1e-7);
    EXPECT_LE(j["p_value"].get<double>(), 0.05);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
    std::vector<std::string> args{"two-sample", kData + "/gaussian_x.csv", kData + "/gaussian_y_shifted.csv",
                                  "--B", "300", "--no-cache", "--quiet", "--threads", "1"};
    const CliRun a = run(args);
    args.back() = "4";
    EXPECT_EQ(run(args).out, a.out);
}

TEST(Cli, IdenticalFilesNeedJitter) {
    const std::string x = kData + "/gaussian_x.csv";
    const CliRun tied = run({"two-sample", x, x, "--no-cache", "--B", "500"});
    EXPECT_GE(tied.code, 64);
    EXPECT_NE(tied.err.find("jitter"), std::string::npos);
    const CliRun ok = run({"two-sample", x, x, "--no-cache", "--B", "500", "--jitter", "--json", "--quiet"});
    EXPECT_EQ(ok.code, cli::kNoReject);
    EXPECT_GT(nlohmann::json::parse(ok.out)["p_value"].get<double>(), 0.5);
}

TEST(Cli, MalformedInput) {
    const CliRun r = run({"two-sample", kData + "/malformed.csv", kData + "/gaussian_x.csv", "--no-cache"});
    EXPECT_GE(r.code, 64);
    EXPECT_NE(r.err.find("malformed.csv:4:"), std::string::npos) << r.err;
    EXPECT_TRUE(r.out.empty());
    const CliRun i = run({"independence", kData + "/malformed.csv", "--dx", "1", "--no-cache"});
    EXPECT_GE(i.code, 64);
    EXPECT_GE(run({"two-sample", kData + "/gaussian_x.csv", kData + "/independent_xy.csv"}).code, 64);
    EXPECT_EQ(run({"two-sample", "--bogus"}).code, cli::kUsage);
    EXPECT_EQ(run({}).code, cli::kUsage);
}

TEST(Cli, IndependenceFixtures) {
    const CliRun ind = run({"independence", kData + "/independent_xy.csv", "--dx", "2", "--no-cache", "--B", "999", "--quiet"});
    EXPECT_EQ(ind.code, cli::kNoReject) << ind.out;
    const CliRun kon = run({"independence", kData + "/konijn_xy.csv", "--dx", "2", "--no-cache", "--B", "999", "--quiet"});
    EXPECT_EQ(kon.code, cli::kReject) << kon.out;
    const CliRun asym = run({"independence", kData + "/konijn_xy.csv", "--dx", "2", "--calibration", "asymptotic", "--quiet"});
    EXPECT_EQ(asym.code, cli::kReject);
    EXPECT_NE(asym.out.find("calibration: asymptotic"), std::string::npos);
    EXPECT_GE(run({"independence", kData + "/konijn_xy.csv", "--dx", "4"}).code, 64);
}

TEST(Cli, OutputFileMatchesStdout) {
    const std::string path = temp_path("report.txt");
    const CliRun r = run({"independence", kData + "/independent_xy.csv", "--dx", "2", "--calibration", "asymptotic",
                       "--output", path, "--quiet"});
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    EXPECT_EQ(s.str(), r.out);
    std::filesystem::remove(path);
}

TEST(Cli, AreTableMatchesEngine) {
    const CliRun r = run({"are-table", "--dmax", "10"});
    EXPECT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "d,kappa_closed,kappa_quadrature,elliptical_bound");
    for (int d = 1; d <= 10; ++d) {
        std::getline(in, line);
        const auto row = csv::parse(line).data;
        EXPECT_EQ(row(0, 0), d);
        EXPECT_NEAR(row(0, 2), are::are_noncentrality_spherical(d).value, 1e-10);
        EXPECT_NEAR(row(0, 3), are::elliptical_bound(d), 1e-10);
    }
    std::getline(in, line);
    EXPECT_EQ(line, "constants,0.9549296586,0.864,1,0.648");
}

TEST(Cli, PowerSimIsDeterministic) {
    const std::vector<std::string> args{"power-sim", "--setting", "A1", "--d", "2", "--seed", "7", "--B", "4",
                                        "--m", "30", "--n", "30", "--quiet"};
    const CliRun a = run(args);
    const CliRun b = run(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.substr(0, 26), "theta,test,power,se,B,seed");
    const std::string gp = temp_path("curve.dat");
    auto with_gp = args;
    with_gp.insert(with_gp.end(), {"--gnuplot", gp, "--threads", "3"});
    EXPECT_EQ(run(with_gp).out, a.out);
    EXPECT_TRUE(std::filesystem::exists(gp));
    std::filesystem::remove(gp);
    EXPECT_GE(run({"power-sim", "--setting", "A9"}).code, 64);
}

TEST(Cli, GridRoundTripIsBitExact) {
    const std::string path = temp_path("grid.csv");
    EXPECT_EQ(run({"grid", "gen", "--nu", "gaussian", "--n", "100", "--d", "2", "--output", path}).code, 0);
    const CliRun back = run({"grid", "import", path});
    EXPECT_EQ(back.code, 0);
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    EXPECT_EQ(back.out, s.str());
    EXPECT_EQ(reference::grid_from_csv(back.out).points, reference::gaussian_grid(100, 2).points);
    std::filesystem::remove(path);
    EXPECT_EQ(run({"grid", "export", "--nu", "spherical_uniform", "--n", "50", "--d", "3", "--seed", "4"}).code, 0);
    EXPECT_GE(run({"grid", "import", "/nonexistent.csv"}).code, 64);
}
