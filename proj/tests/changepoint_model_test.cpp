#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "tdmh/changepoint/model.hpp"
#include "tdmh/validation/enumeration.hpp"

namespace {

using namespace tdmh::changepoint;

double hand_log_normal(double x, double m, double v) {
    return -0.5 * std::log(2.0 * std::numbers::pi * v) - (x - m) * (x - m) / (2.0 * v);
}

/// Per-point sum, independent of the prefix sums.
double naive_log_likelihood(const ChangepointState& s, const Dataset& d, double obs_var) {
    double ll = 0.0;
    std::size_t seg = 0;
    for (std::size_t t = 1; t <= d.n(); ++t) {
        while (seg < s.cps.size() && static_cast<int>(t) >= s.cps[seg]) ++seg;
        ll += hand_log_normal(d.y[t - 1], s.heights[seg], obs_var);
    }
    return ll;
}

ChangepointState random_state(std::mt19937_64& rng, std::size_t n) {
    std::bernoulli_distribution coin(0.3);
    std::normal_distribution<double> h(0.0, 2.0);
    ChangepointState s;
    for (int pos = 2; pos <= static_cast<int>(n); ++pos)
        if (coin(rng)) s.cps.push_back(pos);
    for (std::size_t i = 0; i <= s.cps.size(); ++i) s.heights.push_back(h(rng));
    return s;
}

Dataset random_data(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> y(0.0, 3.0);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) d.y.push_back(y(rng));
    return d;
}

TEST(Dataset, Validation) {
    EXPECT_THROW(Dataset{}.validate(), std::invalid_argument);
    EXPECT_THROW((Dataset{{1.0, INFINITY}}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((Dataset{{1.0}}.validate()));
}

TEST(Dataset, ReadWriteRoundTrip) {
    const Dataset d{{0.1, -2.5e-7, 3.0, 1.0 / 3.0}};
    std::stringstream ss;
    write_dataset(ss, d, "header");
    EXPECT_EQ(ss.str().rfind("# header\n", 0), 0u);
    const Dataset back = read_dataset(ss);
    EXPECT_EQ(back.y, d.y);
    EXPECT_EQ(dataset_checksum(back), dataset_checksum(d));
    std::stringstream bad("1.0\nx\n");
    EXPECT_THROW(read_dataset(bad), std::runtime_error);
}

TEST(GenerateDataset, Structure) {
    const Dataset d = generate_dataset(4, {}, {0.0}, 1.0, 17);
    EXPECT_EQ(d.n(), 4u);
    EXPECT_EQ(generate_dataset(4, {}, {0.0}, 1.0, 17).y, d.y);
    EXPECT_THROW(generate_dataset(4, {2}, {0.0}, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(generate_dataset(4, {5}, {0.0, 1.0}, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(generate_dataset(4, {3, 2}, {0.0, 1.0, 2.0}, 1.0, 1), std::invalid_argument);
}

TEST(GenerateDataset, SampleMeanWithinClt) {
    const Dataset d = generate_dataset(100000, {}, {3.0}, 1.0, 2024);
    double sum = 0.0;
    for (double v : d.y) sum += v;
    EXPECT_NEAR(sum / 1e5, 3.0, 0.02);
}

TEST(GenerateDataset, SegmentsFollowTheirMeans) {
    const Dataset d = generate_dataset(3000, {1001, 2001}, {-5.0, 0.0, 5.0}, 1.0, 8);
    const SegmentStats st(d);
    EXPECT_NEAR(segment_mean(st, 1, 1001), -5.0, 0.15);
    EXPECT_NEAR(segment_mean(st, 1001, 2001), 0.0, 0.15);
    EXPECT_NEAR(segment_mean(st, 2001, 3001), 5.0, 0.15);
}

TEST(GenerateDataset, CanonicalInstance) {
    const Dataset d = canonical_dataset();
    EXPECT_EQ(d.n(), 550u);
    EXPECT_EQ(CanonicalInstance::cps().size(), 9u);
    EXPECT_EQ(CanonicalInstance::means().size(), 10u);
    for (double m : CanonicalInstance::means()) EXPECT_LE(std::fabs(m), 3.0);
    EXPECT_TRUE(is_valid(ChangepointState{CanonicalInstance::cps(), CanonicalInstance::means()}, 550));
}

TEST(SegmentStats, PrefixSums) {
    const Dataset d{{1.0, 2.0, 3.0}};
    const SegmentStats st(d);
    EXPECT_EQ(st.prefix_sum().size(), 4u);
    EXPECT_EQ(st.prefix_sum()[0], 0.0);
    EXPECT_DOUBLE_EQ(st.prefix_sum()[3], 6.0);
    EXPECT_DOUBLE_EQ(st.prefix_sumsq()[3], 14.0);
}

TEST(SegmentMean, Examples) {
    const SegmentStats st(Dataset{{1.0, 2.0, 3.0}});
    EXPECT_DOUBLE_EQ(segment_mean(st, 1, 4), 2.0);
    EXPECT_DOUBLE_EQ(segment_mean(st, 1, 2), 1.0);
    EXPECT_THROW(segment_mean(st, 2, 2), std::invalid_argument);
    EXPECT_THROW(segment_mean(st, 0, 2), std::out_of_range);
}

TEST(SegmentMean, PooledIdentity) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 3 + rng() % 40;
        const SegmentStats st(random_data(rng, n));
        const int l = 1 + static_cast<int>(rng() % (n - 1));
        const int k = l + 2 + static_cast<int>(rng() % (n + 1 - l - 1));
        if (k > static_cast<int>(n) + 1) continue;
        const int i = l + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(k - l - 1));
        EXPECT_NEAR(segment_mean(st, l, k) * (k - l), segment_mean(st, l, i) * (i - l) + segment_mean(st, i, k) * (k - i),
                    1e-9);
    }
}

TEST(LogPrior, SingleGap) {
    ModelParams p;
    const ChangepointState s{{}, {0.0}};
    EXPECT_NEAR(log_prior(s, 2, p), std::log1p(-p.q) + hand_log_normal(0.0, 0.0, 25.0), 1e-14);
}

TEST(LogPrior, AddingAChangepoint) {
    ModelParams p;
    const double h = 1.3;
    const ChangepointState a{{4}, {0.2, h}}, b{{4, 7}, {0.2, h, h}};
    EXPECT_NEAR(log_prior(b, 10, p) - log_prior(a, 10, p),
                std::log(p.q / (1.0 - p.q)) + hand_log_normal(h, 0.0, 25.0), 1e-12);
}

TEST(LogPrior, ConfigurationMassIsOne) {
    EXPECT_NEAR(tdmh::validation::prior_configuration_mass(5, ModelParams{}), 1.0, 1e-10);
    ModelParams p;
    p.q = 0.37;
    EXPECT_NEAR(tdmh::validation::prior_configuration_mass(9, p), 1.0, 1e-10);
}

TEST(LogLikelihood, SinglePoint) {
    const SegmentStats st(Dataset{{0.0}});
    EXPECT_NEAR(log_likelihood(ChangepointState{{}, {0.0}}, st, ModelParams{}), -0.5 * std::log(2.0 * std::numbers::pi),
                1e-15);
    EXPECT_NEAR(-0.5 * std::log(2.0 * std::numbers::pi), -0.9189385, 1e-7);
}

TEST(LogLikelihood, PrefixSumsMatchNaiveSummation) {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng() % 60;
        const Dataset d = random_data(rng, n);
        const ChangepointState s = random_state(rng, n);
        ModelParams p;
        p.obs_var = 0.5 + static_cast<double>(rng() % 100) / 40.0;
        const SegmentStats st(d);
        EXPECT_NEAR(log_likelihood(s, st, p), naive_log_likelihood(s, d, p.obs_var), 1e-9);
        EXPECT_TRUE(std::isfinite(log_posterior(s, st, p)));
    }
}

TEST(LogLikelihood, SegmentMeanMaximizes) {
    const Dataset d{{0.4, 1.1, -0.3, 2.0}};
    const SegmentStats st(d);
    const double m = segment_mean(st, 1, 5);
    const double best = log_segment_likelihood(st, 1, 5, m, 1.0);
    for (double dh : {-1.0, -0.1, -1e-3, 1e-3, 0.1, 1.0}) EXPECT_LT(log_segment_likelihood(st, 1, 5, m + dh, 1.0), best);
}

TEST(LogL, EqualHeightsGiveZero) {
    const SegmentStats st(Dataset{{0.4, 1.1, -0.3, 2.0, 0.7}});
    EXPECT_NEAR(log_L(st, ModelParams{}, 1, 3, 6, 0.9, 0.9, 0.9), 0.0, 1e-14);
    EXPECT_THROW(log_L(st, ModelParams{}, 2, 2, 6, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST(LogL, MatchesNaiveMergedMinusSplit) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> h(0.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 3 + rng() % 30;
        const Dataset d = random_data(rng, n);
        const SegmentStats st(d);
        const int l = 1, k = static_cast<int>(n) + 1;
        const int i = 2 + static_cast<int>(rng() % (n - 1));
        const double hm = h(rng), h1 = h(rng), h2 = h(rng);
        const double merged = naive_log_likelihood(ChangepointState{{}, {hm}}, d, 1.0);
        const double split = naive_log_likelihood(ChangepointState{{i}, {h1, h2}}, d, 1.0);
        EXPECT_NEAR(log_L(st, ModelParams{}, l, i, k, hm, h1, h2), merged - split, 1e-8);
    }
}

TEST(LogL, NonPositiveAtLeastSquaresHeights) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 3 + rng() % 30;
        const SegmentStats st(random_data(rng, n));
        const int l = 1, k = static_cast<int>(n) + 1, i = 2 + static_cast<int>(rng() % (n - 1));
        EXPECT_LE(log_L(st, ModelParams{}, l, i, k, segment_mean(st, l, k), segment_mean(st, l, i), segment_mean(st, i, k)),
                  1e-9);
    }
}

TEST(LogL, SwappingMergeAndSplitNegates) {
    // Same heights on both sides: the merged configuration with h1 = h2 = h and the split with (h1, h2).
    const SegmentStats st(Dataset{{0.4, 1.1, -0.3, 2.0, 0.7, -1.2}});
    const double h = 0.35, h1 = -0.8, h2 = 1.6;
    const double fwd = log_L(st, ModelParams{}, 1, 4, 7, h, h1, h2);
    const double merged = log_segment_fit(st, 1, 7, h, 1.0);
    const double split = log_segment_fit(st, 1, 4, h1, 1.0) + log_segment_fit(st, 4, 7, h2, 1.0);
    EXPECT_EQ(fwd, merged - split);
    EXPECT_EQ(-(split - merged), fwd);
}

TEST(ModelParams, Validation) {
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.q = 1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.adhoc_var = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ChangepointState, Validity) {
    EXPECT_TRUE(is_valid(ChangepointState{{2, 5}, {0, 0, 0}}, 5));
    EXPECT_FALSE(is_valid(ChangepointState{{1}, {0, 0}}, 5));
    EXPECT_FALSE(is_valid(ChangepointState{{6}, {0, 0}}, 5));
    EXPECT_FALSE(is_valid(ChangepointState{{3, 3}, {0, 0, 0}}, 5));
    EXPECT_FALSE(is_valid(ChangepointState{{3}, {0}}, 5));
    EXPECT_FALSE(is_valid(ChangepointState{{3}, {0, NAN}}, 5));
}

}  // namespace
