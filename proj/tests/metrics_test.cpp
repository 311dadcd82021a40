#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/metrics.hpp"
#include "oracles.hpp"

using namespace aoi;
using namespace aoi::metrics;

TEST(TimeAverageAge, Examples) {
    AgeSamplePath p{0.0, {{0, 1}, {2, 3}}, 3.0};
    EXPECT_DOUBLE_EQ(time_average_age(p), 1.5);
    p.horizon = 4.0;
    EXPECT_DOUBLE_EQ(time_average_age(p), 1.5);
    const auto parts = area_decomposition(p);
    EXPECT_DOUBLE_EQ(parts.body, 4.0);
}

TEST(TimeAverageAge, NoDeliveries) {
    AgeSamplePath p{1.5, {}, 4.0};
    EXPECT_DOUBLE_EQ(time_average_age(p), 1.5 + 2.0);
    EXPECT_TRUE(area_decomposition(p).no_deliveries);
}

TEST(TimeAverageAge, ZeroHorizon) {
    AgeSamplePath p{0.0, {}, 0.0};
    try {
        time_average_age(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroHorizon);
    }
}

TEST(TimeAverageAge, MatchesBruteForceIntegration) {
    for (unsigned seed = 1; seed <= 20; ++seed) {
        auto p = oracle::random_path(seed, 50 + 10 * static_cast<int>(seed), seed % 3 ? 0.0 : 2.5);
        validate_path(p);
        const double brute = oracle::sawtooth_integral(p);
        EXPECT_NEAR(time_average_age(p) * p.duration(), brute, 1e-9 * brute);
    }
}

TEST(TimeAverageAge, BodyEqualsSumOfQk) {
    auto p = oracle::random_path(5, 300);
    const auto parts = area_decomposition(p);
    double sum_q = 0.0;
    for (const auto& q : derive_per_packet(p)) sum_q += q.area;
    EXPECT_NEAR(sum_q, p.duration() * time_average_age(p) - parts.head - parts.tail, 1e-9 * sum_q);
    EXPECT_NEAR(sum_q, parts.body, 1e-12 * sum_q);
}

TEST(TimeAverageAge, InvariantUnderSplitting) {
    auto p = oracle::random_path(11, 400);
    for (double frac : {0.1, 0.5, 0.77}) {
        const double s = p.start_time + frac * p.duration();
        const auto [left, right] = split_path(p, s);
        const double combined =
            (time_average_age(left) * left.duration() + time_average_age(right) * right.duration()) / p.duration();
        EXPECT_NEAR(combined, time_average_age(p), 1e-12 * time_average_age(p));
    }
    // Splitting exactly at a departure instant.
    const double at = p.deliveries[100].depart_time;
    const auto [l2, r2] = split_path(p, at);
    EXPECT_EQ(l2.deliveries.size(), 101u);
    const double c2 = (time_average_age(l2) * l2.duration() + time_average_age(r2) * r2.duration()) / p.duration();
    EXPECT_NEAR(c2, time_average_age(p), 1e-12 * c2);
    EXPECT_THROW(split_path(p, p.horizon + 1.0), Error);
}

TEST(AgeAt, RightContinuous) {
    AgeSamplePath p{0.5, {{0, 1}, {2, 3}}, 4.0};
    EXPECT_DOUBLE_EQ(age_at(p, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(age_at(p, 0.999), 1.499);
    EXPECT_DOUBLE_EQ(age_at(p, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(age_at(p, 3.0), 1.0);
    EXPECT_DOUBLE_EQ(age_at(p, 3.5), 1.5);
}

TEST(ExtractPeaks, Examples) {
    EXPECT_EQ(extract_peaks({0.0, {{0, 1}, {2, 3}}, 3.0}), std::vector<double>({3.0}));
    EXPECT_EQ(extract_peaks({0.0, {{0, 1}, {1, 2}, {2, 3}}, 3.0}), std::vector<double>({2.0, 2.0}));
    try {
        extract_peaks({0.0, {{0, 1}}, 3.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientPath);
    }
}

TEST(ExtractPeaks, LeftLimitsOfSawtooth) {
    auto p = oracle::random_path(3, 500);
    const auto peaks = extract_peaks(p);
    for (std::size_t k = 1; k < p.deliveries.size(); ++k) {
        EXPECT_NEAR(peaks[k - 1], oracle::sawtooth_left_limit(p, p.deliveries[k].depart_time), 1e-12);
    }
}

TEST(EmpiricalCcdf, Examples) {
    const std::vector<double> s{1, 2, 3};
    const std::vector<double> grid{0, 1.5, 2.5, 3.5};
    const auto c = empirical_ccdf(s, grid);
    EXPECT_DOUBLE_EQ(c[0], 1.0);
    EXPECT_DOUBLE_EQ(c[1], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(c[2], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(c[3], 0.0);
    const std::vector<double> same{2.0, 2.0};
    const std::vector<double> at{2.0};
    EXPECT_EQ(empirical_ccdf(same, at)[0], 0.0);
    EXPECT_THROW(empirical_ccdf(std::vector<double>{}, grid), Error);
}

TEST(EmpiricalCcdf, NonincreasingAndOneBelowMinimum) {
    std::mt19937_64 g(12);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> s(1000);
    for (double& v : s) v = e(g) + 0.1;
    std::vector<double> grid;
    for (int i = 0; i < 100; ++i) grid.push_back(0.05 * i);
    const auto c = empirical_ccdf(s, grid);
    EXPECT_EQ(c[0], 1.0);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LE(c[i], c[i - 1]);
}

TEST(KsDistance, Examples) {
    auto ccdf = [](double a) { return std::exp(-a); };
    const std::vector<double> q{-std::log(0.75), -std::log(0.5), -std::log(0.25)};
    const double d = ks_distance(q, ccdf);
    EXPECT_LE(d, 0.25 + 1e-12);
    EXPECT_GE(d, 0.0);
    EXPECT_THROW(ks_distance(std::vector<double>{}, ccdf), Error);
}

TEST(KsDistance, MatchesDirectScanOfEmpiricalCdf) {
    std::mt19937_64 g(3);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> s(200);
    for (double& v : s) v = e(g);
    auto ccdf = [](double a) { return std::exp(-1.1 * a); };
    double ref = 0.0;
    for (double x : s) {
        double below = 0.0, upto = 0.0;
        for (double y : s) {
            below += y < x;
            upto += y <= x;
        }
        const double f = 1.0 - ccdf(x);
        ref = std::max({ref, std::abs(upto / 200 - f), std::abs(below / 200 - f)});
    }
    EXPECT_NEAR(ks_distance(s, ccdf), ref, 1e-15);
}

TEST(KsDistance, LargeSampleFromTheLaw) {
    const analytic::PeakAgeLaw law = analytic::peak_law(QueueModel::MM11, {1.0, 1.0});
    std::mt19937_64 g(8);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> s(1000000);
    for (double& v : s) v = e(g) + e(g) + e(g);
    EXPECT_LT(ks_distance(s, [&](double a) { return law.ccdf(a); }), 0.005);
}

TEST(KsDistance, DistinguishesMM11FromMM12) {
    const RateParams r(1.3, 1.0);
    const auto l11 = analytic::peak_law(QueueModel::MM11, r);
    const auto l12 = analytic::peak_law(QueueModel::MM12, r);
    double gap = 0.0;
    for (int i = 0; i < 400; ++i) gap = std::max(gap, std::abs(l11.ccdf(0.05 * i) - l12.ccdf(0.05 * i)));
    EXPECT_GT(gap, 0.01);
    std::mt19937_64 g(4);
    std::exponential_distribution<double> em(1.0), el(1.3);
    std::vector<double> s(100000);
    for (double& v : s) v = em(g) + el(g) + em(g);
    EXPECT_GT(ks_distance(s, [&](double a) { return l12.ccdf(a); }), 0.01);
}

TEST(BatchMeans, IidStandardError) {
    std::mt19937_64 g(77);
    std::normal_distribution<double> n(5.0, 2.0);
    std::vector<double> x(64000);
    for (double& v : x) v = n(g);
    const auto e = batch_means(x, 32);
    EXPECT_NEAR(e.value, 5.0, 0.05);
    // The true standard error is 2 / sqrt(64000) ~ 0.0079; 31 dof gives ~13% noise.
    EXPECT_NEAR(e.stderr_, 2.0 / std::sqrt(64000.0), 0.004);
}

TEST(BatchMeans, ValueIsSampleMean) {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    EXPECT_DOUBLE_EQ(batch_means(x, 3).value, 4.0);
    EXPECT_TRUE(std::isnan(batch_means(std::vector<double>{}, 3).value));
    std::vector<double> d{1, 1, 1, 1};
    EXPECT_DOUBLE_EQ(ratio_batch_means(x, d, 2).value, 2.5);
}

TEST(TimeAverageAgeEstimate, ValueIsExactAverage) {
    auto p = oracle::random_path(21, 1000);
    const auto e = time_average_age_estimate(p);
    EXPECT_EQ(e.value, time_average_age(p));
    EXPECT_GT(e.stderr_, 0.0);
}
