#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "lfmo/failure_times.hpp"
#include "lfmo/stats.hpp"
#include "oracles.hpp"

using namespace lfmo;

namespace {

std::vector<double> exact_exponential(double rate, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> dist(rate);
    std::vector<double> out(count);
    for (auto& x : out) x = dist(rng);
    return out;
}

}  // namespace

TEST(Triggers, UnitMeanAndSorted) {
    rng_t rng(1);
    std::vector<double> draws;
    for (int i = 0; i < 100000; ++i) draws.push_back(sample_triggers(1, rng).order_statistic(1));
    const auto est = mean_and_se(draws);
    EXPECT_NEAR(est.mean, 1.0, 3.0 * est.standard_error);

    const auto three = sample_triggers(3, rng);
    EXPECT_TRUE(std::is_sorted(three.sorted().begin(), three.sorted().end()));
    EXPECT_THROW(sample_triggers(0, rng), lfmo::domain_error);
    EXPECT_THROW(three.order_statistic(4), lfmo::domain_error);
}

TEST(Triggers, MiddleOrderStatisticNearLogTwo) {
    rng_t rng(2);
    std::vector<double> medians;
    for (int i = 0; i < 1000; ++i) medians.push_back(sample_triggers(10000, rng).order_statistic(5000));
    std::nth_element(medians.begin(), medians.begin() + 500, medians.end());
    EXPECT_NEAR(medians[500], std::log(2.0), 0.02);
}

TEST(Triggers, KthTriggerMatchesSortedVector) {
    rng_t direct_rng(3);
    rng_t sorted_rng(4);
    for (auto [n, k] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 3}, {20, 20}, {50, 1}}) {
        std::vector<double> direct(5000);
        std::vector<double> sorted(5000);
        for (auto& x : direct) x = sample_kth_trigger(n, k, direct_rng);
        for (auto& x : sorted) x = sample_triggers(n, sorted_rng).order_statistic(k);
        EXPECT_GT(ks_two_sample(direct, sorted).p_value, 0.01) << n << ":" << k;
    }
    EXPECT_THROW(sample_kth_trigger(5, 0, direct_rng), lfmo::domain_error);
    EXPECT_THROW(sample_kth_trigger(5, 6, direct_rng), lfmo::domain_error);
}

TEST(FailureTimes, PureDriftGivesIndependentExponentials) {
    rng_t rng(5);
    std::vector<double> pooled;
    for (int i = 0; i < 2000; ++i) {
        const auto times = sample_failure_times(SubordinatorSpec::pure_drift(1.0), 5, rng);
        pooled.insert(pooled.end(), times.begin(), times.end());
    }
    EXPECT_GT(ks_two_sample(pooled, exact_exponential(1.0, 10000, 77)).p_value, 0.01);
}

TEST(FailureTimes, MarginalRateIsPsiOfOne) {
    // Exp(1) jumps at rate 1: psi(1) = 1/2, so a single lifetime has mean 2
    rng_t rng(6);
    const SubordinatorSpec spec{0.0, 1.0, JumpLaw::exponential(1.0)};
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_failure_times(spec, 1, rng)[0];
    const auto est = mean_and_se(xs);
    EXPECT_NEAR(est.mean, 2.0, 3.0 * est.standard_error);

    for (const auto& other : {SubordinatorSpec{0.5, 1.0, JumpLaw::uniform01()},
                              SubordinatorSpec{0.2, 0.5, JumpLaw::pareto(1.5)}}) {
        std::vector<double> first(10000);
        for (auto& x : first) x = sample_failure_times(other, 4, rng)[2];
        const auto reference = exact_exponential(laplace_exponent(other, 1.0), 10000, 78);
        EXPECT_GT(ks_two_sample(first, reference).p_value, 0.01);
    }
}

TEST(FailureTimes, BigFirstJumpKillsEverything) {
    // first jump is at least 100 while drift needs ~1e6 time units per unit barrier
    rng_t rng(7);
    const SubordinatorSpec spec{1e-6, 1.0, JumpLaw::pareto(2.0, 100.0)};
    for (int i = 0; i < 100; ++i) {
        const auto times = sample_failure_times(spec, 3, rng);
        EXPECT_EQ(times[0], times[1]);
        EXPECT_EQ(times[1], times[2]);
    }
}

TEST(FailureTimes, SimultaneityFrequencyMatchesPathScan) {
    const SubordinatorSpec spec{0.5, 1.0, JumpLaw::exponential(1.0)};
    const int reps = 20000;
    rng_t rng(8);
    int ties = 0;
    for (int i = 0; i < reps; ++i) {
        const auto times = sample_failure_times(spec, 2, rng);
        if (times[0] == times[1]) ++ties;
    }
    rng_t path_rng(9);
    std::exponential_distribution<double> exp1(1.0);
    int scan_ties = 0;
    for (int i = 0; i < reps; ++i) {
        const double e1 = exp1(path_rng);
        const double e2 = exp1(path_rng);
        const auto path = sample_path(spec, 200.0, path_rng);
        if (oracle::path_passage(path, e1) == oracle::path_passage(path, e2)) ++scan_ties;
    }
    const double p1 = static_cast<double>(ties) / reps;
    const double p2 = static_cast<double>(scan_ties) / reps;
    EXPECT_GT(p1, 0.05);
    EXPECT_NEAR(p1, p2, 4.0 * std::hypot(oracle::binomial_se(p1, reps), oracle::binomial_se(p2, reps)));
}

TEST(FailureTimes, Exchangeable) {
    rng_t rng(10);
    const SubordinatorSpec spec{0.5, 1.0, JumpLaw::uniform01()};
    std::vector<std::vector<double>> margins(4);
    std::vector<double> min01;
    std::vector<double> min23;
    for (int i = 0; i < 10000; ++i) {
        const auto t = sample_failure_times(spec, 4, rng);
        for (int c = 0; c < 4; ++c) margins[c].push_back(t[c]);
        min01.push_back(std::min(t[0], t[1]));
        min23.push_back(std::min(t[2], t[3]));
    }
    EXPECT_GT(ks_two_sample(margins[0], margins[3]).p_value, 0.01);
    EXPECT_GT(ks_two_sample(margins[1], margins[2]).p_value, 0.01);
    EXPECT_GT(ks_two_sample(min01, min23).p_value, 0.01);
}

TEST(KthFailure, SeriesOfTenPureDrift) {
    rng_t rng(11);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_kth_failure(SubordinatorSpec::pure_drift(1.0), 10, 1, rng);
    const auto est = mean_and_se(xs);
    EXPECT_NEAR(est.mean, 0.1, 3.0 * est.standard_error);
    EXPECT_THROW(sample_kth_failure(SubordinatorSpec::pure_drift(1.0), 10, 11, rng), lfmo::domain_error);
}

TEST(KthFailure, ConsistentWithSortedFullVector) {
    const SubordinatorSpec spec{0.5, 1.0, JumpLaw::uniform01()};
    for (auto [n, k] : {std::pair<std::size_t, std::size_t>{1, 1}, {6, 2}, {6, 6}, {10, 5}}) {
        rng_t a(12);
        rng_t b(13);
        std::vector<double> direct(10000);
        std::vector<double> sorted(10000);
        for (auto& x : direct) x = sample_kth_failure(spec, n, k, a);
        for (auto& x : sorted) {
            auto t = sample_failure_times(spec, n, b);
            std::sort(t.begin(), t.end());
            x = t[k - 1];
        }
        EXPECT_GT(ks_two_sample(direct, sorted).p_value, 0.01) << n << ":" << k;
    }
}
