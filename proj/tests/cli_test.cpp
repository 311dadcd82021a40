#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/acceptance.hpp"
#include "aoi/commands.hpp"

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::filesystem::path scratch_dir() {
    auto d = std::filesystem::temp_directory_path() / ("aoi_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Run run(const std::string& args, const std::string& env = "") {
    const auto dir = scratch_dir();
    const auto err_path = dir / "stderr.txt";
    const std::string cmd = env + " " + AOI_CLI_PATH + " " + args + " 2>" + err_path.string();
    Run r{};
    FILE* p = ::popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_path);
    return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& s) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(s);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.emplace_back();
        rows.push_back(row);
    }
    return rows;
}

double num(const std::string& s) {
    double v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

}  // namespace

TEST(CliAnalytic, AvgAge) {
    auto r = run("analytic --model mm11 --lambda 1 --mu 1 --metric avg-age");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"model", "lambda", "mu", "metric", "arg", "value"}));
    EXPECT_EQ(rows[1][0], "mm11");
    EXPECT_EQ(rows[1][5], "2.5");
}

TEST(CliAnalytic, SteadyState) {
    auto r = run("analytic --model mm12 --lambda 1 --mu 1 --metric steady-state");
    ASSERT_EQ(r.code, 0);
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 4u);
    for (int j = 1; j <= 3; ++j) EXPECT_NEAR(num(rows[j][5]), 1.0 / 3.0, 1e-12);
}

TEST(CliAnalytic, UsageErrors) {
    auto r = run("analytic --model mm1 --lambda 1.2 --mu 1 --metric avg-age");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("unstable queue"), std::string::npos);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
    EXPECT_EQ(run("analytic --model mm1 --lambda 0.5 --mu 1 --metric peak-ccdf").code, 2);
    EXPECT_EQ(run("analytic --model mm11 --lambda 1 --mu 1 --metric nope").code, 2);
    EXPECT_EQ(run("analytic --model mm3 --lambda 1 --mu 1 --metric avg-age").code, 2);
    EXPECT_EQ(run("analytic --model mm11 --lambda -1 --mu 1 --metric avg-age").code, 2);
    EXPECT_EQ(run("analytic --model mm11 --mu 1 --metric avg-age").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST(CliAnalytic, PeakCcdfGrid) {
    auto r = run("analytic --model mm11 --lambda 2 --mu 1 --metric peak-ccdf --a 0,1,2.5");
    ASSERT_EQ(r.code, 0);
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1][5], "1");
    EXPECT_NEAR(num(rows[2][5]), std::exp(-2.0) + 2.0 * std::exp(-1.0), 1e-11);
    EXPECT_EQ(rows[3][4], "2.5");
}

// Printed values parse back within one unit of the 12th significant digit.
TEST(CliAnalytic, NumbersRoundTrip) {
    auto r = run("analytic --model mm12star --lambda 0.37 --mu 1.9 --metric peak-pdf --a 0.1,0.7,3,11");
    ASSERT_EQ(r.code, 0);
    const auto law = aoi::analytic::peak_law(aoi::QueueModel::MM12Star, {0.37, 1.9});
    auto rows = parse_csv(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double exact = law.pdf(num(rows[i][4]));
        EXPECT_LE(std::abs(num(rows[i][5]) - exact), 1e-11 * std::abs(exact));
    }
    for (double v : {2.5, 1.0 / 3.0, 1e-300, 123456789.123456, -4.2e17}) {
        const std::string s = aoi::cli::fmt(v);
        EXPECT_LE(std::abs(num(s) - v), 1e-11 * std::abs(v)) << s;
    }
}

TEST(CliSimulate, SummaryAndDeterminism) {
    const std::string args = "simulate --model mm12star --lambda 0.6 --mu 1 --departures 1000000 --seed 7";
    auto a = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    auto b = run(args);
    EXPECT_EQ(a.out, b.out);
    auto rows = parse_csv(a.out);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"metric", "value", "stderr"}));
    bool found = false;
    for (const auto& row : rows) {
        if (row[0] == "time_avg_age") {
            found = true;
            EXPECT_NEAR(num(row[1]), 2.8934, 0.03);
            EXPECT_GT(num(row[2]), 0.0);
        }
    }
    EXPECT_TRUE(found);
}

TEST(CliSimulate, TraceFile) {
    const auto path = scratch_dir() / "trace.tsv";
    const std::string args =
        "simulate --model mm12 --lambda 1 --mu 1 --departures 50 --seed 3 --trace " + path.string();
    ASSERT_EQ(run(args).code, 0);
    const std::string first = slurp(path);
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(path), first);
    std::istringstream is(first);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "1.1381379357011194\tarrival\t1");
}

TEST(CliSimulate, UnstableMM1Warns) {
    auto r = run("simulate --model mm1 --lambda 1.5 --mu 1 --departures 100");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("unstable"), std::string::npos);
}

TEST(CliSimulate, UsageErrors) {
    EXPECT_EQ(run("simulate --model mm11 --lambda 1 --mu 1").code, 2);
    EXPECT_EQ(run("simulate --model mm11 --lambda 1 --mu 1 --departures 10 --horizon 5").code, 2);
    EXPECT_EQ(run("simulate --model mm11 --lambda 1 --mu 1 --departures 10 --burn-in 10").code, 2);
    EXPECT_EQ(run("simulate --model mm11 --lambda 1 --mu 1 --departures 0").code, 2);
}

TEST(CliSimulate, SeedFromEnvironment) {
    const std::string args = "simulate --model mm11 --lambda 1 --mu 1 --departures 1000";
    auto env = run(args, "AOI_SEED=99");
    auto flag = run(args + " --seed 99");
    auto def = run(args);
    auto def_hex = run(args + " --seed " + std::to_string(aoi::cli::kDefaultBaseSeed));
    EXPECT_EQ(env.out, flag.out);
    EXPECT_EQ(def.out, def_hex.out);
    EXPECT_NE(env.out, def.out);
}

TEST(CliFigure, AvgVsLambda) {
    auto r = run("figure avg-vs-lambda");
    ASSERT_EQ(r.code, 0);
    auto rows = parse_csv(r.out);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"series", "x", "y"}));
    double star = 0, mm12 = 0;
    for (const auto& row : rows) {
        if (row[1] == "0.6" && row[0] == "mm12star") star = num(row[2]);
        if (row[1] == "0.6" && row[0] == "mm12") mm12 = num(row[2]);
    }
    EXPECT_NEAR(star, 2.8934, 1e-4);
    EXPECT_NEAR(mm12, 3.0340, 1e-4);
    EXPECT_NEAR((mm12 - star) / mm12, 0.046, 0.001);
}

TEST(CliFigure, CompareMM1) {
    auto r = run("figure compare-mm1");
    ASSERT_EQ(r.code, 0);
    for (const auto& row : parse_csv(r.out)) {
        if (row[1] != "0.95") continue;
        if (row[0] == "mm1") EXPECT_NEAR(num(row[2]), 1 / 0.95 + 1 + 0.9025 / 0.05, 1e-9);
        if (row[0] == "mm12star") EXPECT_LT(num(row[2]), 3.0);
    }
}

TEST(CliFigure, AvgVsMuLimit) {
    auto r = run("figure avg-vs-mu");
    ASSERT_EQ(r.code, 0);
    int seen = 0;
    for (const auto& row : parse_csv(r.out)) {
        if (row[1] == "1000000") {
            ++seen;
            EXPECT_NEAR(num(row[2]), 2.0, 1e-4);
        }
    }
    EXPECT_EQ(seen, 3);
}

TEST(CliFigure, FilesAndSimColumns) {
    const auto dir = scratch_dir() / "figs";
    ASSERT_EQ(run("figure peak-vs-lambda --out " + dir.string()).code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "peak-vs-lambda.csv"));
    EXPECT_EQ(run("figure nope").code, 2);

    // In-process with fewer departures to keep the test short.
    aoi::cli::FigureOptions opt;
    opt.with_sim = true;
    opt.sim_departures = 20000;
    std::ostringstream a, b;
    aoi::cli::run_figure("peak-ccdf", opt, a);
    aoi::cli::run_figure("peak-ccdf", opt, b);
    EXPECT_EQ(a.str(), b.str());
    auto rows = parse_csv(a.str());
    EXPECT_EQ(rows[0].size(), 5u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 5u);
        const double y = num(rows[i][2]), sim = num(rows[i][3]), se = num(rows[i][4]);
        EXPECT_LE(std::abs(y - sim), 5 * se + 0.01);
    }
}

TEST(CliValidate, QuickPassesAndMutationFails) {
    auto r = run("validate --quick");
    EXPECT_EQ(r.code, 0) << r.out;
    int lines = 0;
    std::istringstream is(r.out);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind("PASS", 0) == 0 || line.rfind("FAIL", 0) == 0) ++lines;
    EXPECT_EQ(lines, 10);
    EXPECT_EQ(run("validate --quick --mutate avg-age").code, 1);
    EXPECT_EQ(run("validate --quick --mutate bogus").code, 2);
}

// Each perturbed closed form is caught by at least one criterion.
TEST(Acceptance, DetectsPerturbedFormulas) {
    using namespace aoi;
    acceptance::Options base;
    base.departures = 100000;
    base.check_determinism = false;

    auto age = base;
    age.formulas.avg_age = [](QueueModel m, const RateParams& r) {
        return m == QueueModel::MM12Star ? analytic::avg_age(m, r) + 0.02 : analytic::avg_age(m, r);
    };
    EXPECT_FALSE(acceptance::run_suite(age).all_passed());

    auto peak = base;
    peak.formulas.avg_peak_age = [](QueueModel m, const RateParams& r) { return 1.03 * analytic::avg_peak_age(m, r); };
    EXPECT_FALSE(acceptance::run_suite(peak).all_passed());

    auto ccdf = base;
    ccdf.formulas.peak_ccdf = [](QueueModel m, const RateParams& r, double a) {
        if (m == QueueModel::MM12Star && r.lambda() != r.mu()) {
            return std::clamp(analytic::expanded::mm12star_peak_ccdf_uncorrected(r.lambda(), r.mu(), a), 0.0, 1.0);
        }
        return analytic::peak_law(m, r).ccdf(a);
    };
    const auto rep = acceptance::run_suite(ccdf);
    EXPECT_FALSE(rep.criteria[3].passed);
}

TEST(Acceptance, DeterministicArtifacts) {
    aoi::acceptance::Options opt;
    opt.departures = 20000;
    const auto rep = aoi::acceptance::run_suite(opt);
    ASSERT_EQ(rep.criteria.size(), 10u);
    EXPECT_TRUE(rep.criteria[9].passed);
}
