#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tdmh/changepoint/model.hpp"
#include "tdmh/changepoint/moves.hpp"

namespace {

using namespace tdmh;
using namespace tdmh::changepoint;

double hand_log_normal(double x, double m, double v) {
    return -0.5 * std::log(2.0 * std::numbers::pi * v) - (x - m) * (x - m) / (2.0 * v);
}

TEST(MoveSchedule, InteriorAndBoundaryStates) {
    const auto mid = move_schedule(3, 10);
    EXPECT_EQ(mid.death, 0.25);
    EXPECT_EQ(mid.birth, 0.25);
    EXPECT_EQ(mid.shift, 0.25);
    EXPECT_EQ(mid.adjust, 0.25);
    const auto empty = move_schedule(0, 10);
    EXPECT_EQ(empty.death, 0.0);
    EXPECT_EQ(empty.shift, 0.0);
    EXPECT_EQ(empty.birth, 0.75);
    EXPECT_EQ(empty.adjust, 0.25);
    const auto full = move_schedule(9, 10);
    EXPECT_EQ(full.birth, 0.0);
    EXPECT_EQ(full.death, 0.5);
    EXPECT_EQ(full.shift, 0.25);
    EXPECT_EQ(full.adjust, 0.25);
    const auto single = move_schedule(0, 1);
    EXPECT_EQ(single.adjust, 1.0);
}

TEST(MoveSchedule, SumsToOne) {
    for (std::size_t n = 1; n < 60; ++n)
        for (std::size_t c = 0; c < n; ++c) {
            const auto s = move_schedule(c, n);
            EXPECT_NEAR(s.death + s.birth + s.shift + s.adjust, 1.0, 1e-12);
        }
}

TEST(AdjustRatio, HandExample) {
    const SegmentStats st(Dataset{{0.0}});
    const ChangepointState s{{}, {0.0}};
    EXPECT_NEAR(adjust_ratio(s, 0, 0.0, 1.0, st, ModelParams{}), -0.52, 1e-12);
    const double hand = hand_log_normal(1.0, 0.0, 25.0) - hand_log_normal(0.0, 0.0, 25.0) + hand_log_normal(0.0, 1.0, 1.0) -
                        hand_log_normal(0.0, 0.0, 1.0);
    EXPECT_NEAR(adjust_ratio(s, 0, 0.0, 1.0, st, ModelParams{}), hand, 1e-12);
    EXPECT_EQ(adjust_ratio(s, 0, 0.7, 0.7, st, ModelParams{}), 0.0);
}

TEST(ShiftRatio, TrivialCases) {
    const SegmentStats st(Dataset{{0.4, 1.1, -0.3, 2.0, 0.7, -1.2}});
    const ChangepointState s{{4}, {0.1, 1.9}};
    EXPECT_EQ(shift_ratio(s, 0, 4, 4, st, ModelParams{}), 0.0);
    const ChangepointState flat{{4}, {0.6, 0.6}};
    for (int j = 2; j <= 6; ++j) EXPECT_NEAR(shift_ratio(flat, 0, 4, j, st, ModelParams{}), 0.0, 1e-13);
    EXPECT_THROW(shift_ratio(s, 0, 4, 1, st, ModelParams{}), std::invalid_argument);
    EXPECT_THROW(shift_ratio(s, 0, 4, 7, st, ModelParams{}), std::invalid_argument);
}

TEST(ShiftRatio, MatchesPosteriorDifference) {
    const Dataset d{{0.4, 1.1, -0.3, 2.0, 0.7, -1.2, 0.3}};
    const SegmentStats st(d);
    const ModelParams p;
    const ChangepointState s{{3, 6}, {0.1, 1.9, -0.4}};
    for (int j = 4; j <= 5; ++j) {
        ChangepointState t = s;
        t.cps[1] = j;
        EXPECT_NEAR(shift_ratio(s, 1, 6, j, st, p), log_posterior(t, st, p) - log_posterior(s, st, p), 1e-12);
    }
}

/// Death ratio assembled from target ratio, proposal densities and move
/// probabilities, independently of the closed forms.
double generic_death_ratio(Variant v, const ChangepointState& from, std::size_t idx, double h, const SegmentStats& st,
                           const ModelParams& p) {
    const std::size_t n = st.n(), m = from.count();
    const int l = from.segment_begin(idx), i = from.cps[idx], k = from.segment_end(idx + 1, n);
    const double h1 = from.heights[idx], h2 = from.heights[idx + 1];
    const ChangepointState to = with_death(from, idx, h);
    double r = log_posterior(to, st, p) - log_posterior(from, st, p);
    r += std::log(move_schedule(to, n).birth) - std::log(move_schedule(from, n).death);
    r += -std::log(static_cast<double>(n - 1 - to.count())) + std::log(static_cast<double>(m));
    const double mu_lk = segment_mean(st, l, k), mu_li = segment_mean(st, l, i), mu_ik = segment_mean(st, i, k);
    switch (v) {
        case Variant::plain:
            r += hand_log_normal(h1, 0.0, p.height_prior_var) + hand_log_normal(h2, 0.0, p.height_prior_var) -
                 hand_log_normal(h, 0.0, p.height_prior_var);
            break;
        case Variant::adhoc:
            r += hand_log_normal(h1, mu_li, p.adhoc_var) + hand_log_normal(h2, mu_ik, p.adhoc_var) -
                 hand_log_normal(h, mu_lk, p.adhoc_var);
            break;
        case Variant::posthoc:
            r += hand_log_normal(h2, mu_ik, p.adhoc_var) + std::log(static_cast<double>(i - l) / (k - l));
            break;
    }
    return r;
}

class DeathRatioOracle : public ::testing::TestWithParam<Variant> {};

TEST_P(DeathRatioOracle, ClosedFormMatchesGenericDerivation) {
    const Variant v = GetParam();
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> y(0.0, 2.0), hd(0.0, 1.5);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 3 + rng() % 25;
        Dataset d;
        for (std::size_t t = 0; t < n; ++t) d.y.push_back(y(rng));
        const SegmentStats st(d);
        ModelParams p;
        p.q = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
        ChangepointState s{{}, {hd(rng)}};
        for (int pos = 2; pos <= static_cast<int>(n); ++pos)
            if (rng() % 3 == 0) {
                s.cps.push_back(pos);
                s.heights.push_back(hd(rng));
            }
        if (s.count() == 0) continue;
        const std::size_t idx = rng() % s.count();
        const Split sp = split_at(s, idx, n);
        const double h = v == Variant::posthoc ? merge_heights(sp.h1, sp.h2, sp.n1(), sp.n2()).first : hd(rng);
        const double closed = death_log_ratio(v, s, idx, h, st, p);
        const double generic = generic_death_ratio(v, s, idx, h, st, p);
        ASSERT_NEAR(closed, generic, 1e-9 * std::max(1.0, std::fabs(generic)));
        const double birth = birth_log_ratio(v, with_death(s, idx, h), sp.i, sp.h1, sp.h2, st, p);
        ASSERT_NEAR(birth, -closed, 1e-9 * std::max(1.0, std::fabs(closed)));
    }
}

INSTANTIATE_TEST_SUITE_P(Variants, DeathRatioOracle,
                         ::testing::Values(Variant::plain, Variant::adhoc, Variant::posthoc),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(DeathRatio, PlainReducesToCountFactorsWhenHeightsAgree) {
    const SegmentStats st(Dataset{{0.4, 1.1, -0.3, 2.0, 0.7, -1.2}});
    const ModelParams p;
    const ChangepointState s{{3, 5}, {0.2, 0.2, 0.2}};
    const double r = plain_death_ratio(s, 0, 0.2, st, p);
    const double hand = std::log((1.0 - p.q) / p.q) + std::log(2.0 / 4.0) + std::log(0.25 / 0.25);
    EXPECT_NEAR(r, hand, 1e-12);
}

TEST(DeathRatio, AdhocOnConstantData) {
    const SegmentStats st(Dataset{{0.0, 0.0, 0.0, 0.0, 0.0}});
    const ModelParams p;
    const ChangepointState s{{3}, {0.0, 0.0}};
    const double plain = plain_death_ratio(s, 0, 0.0, st, p);
    const double expected = plain - hand_log_normal(0.0, 0.0, 25.0) - 0.5 * std::log(2.0 * std::numbers::pi * p.adhoc_var);
    EXPECT_NEAR(adhoc_death_ratio(s, 0, 0.0, st, p), expected, 1e-12);
}

TEST(DeathRatio, WideAdhocProposalIsNotThePlainMove) {
    const SegmentStats st(Dataset{{0.5, 1.5, -0.5, 2.5}});
    const ChangepointState s{{3}, {0.3, -0.4}};
    for (double tau2 : {1.0, 25.0, 1e6}) {
        ModelParams p;
        p.adhoc_var = tau2;
        EXPECT_GT(std::fabs(adhoc_death_ratio(s, 0, 0.1, st, p) - plain_death_ratio(s, 0, 0.1, st, p)), 1e-3) << tau2;
    }
    const SegmentStats zeros(Dataset{{0.0, 0.0, 0.0, 0.0}});
    ModelParams p;
    p.adhoc_var = p.height_prior_var;
    EXPECT_NEAR(adhoc_death_ratio(s, 0, 0.1, zeros, p), plain_death_ratio(s, 0, 0.1, zeros, p), 1e-12);
}

TEST(DeathRatio, PosthocSymmetricSplitJacobian) {
    EXPECT_NEAR(log_merge_jacobian(3, 3), std::log(0.5), 1e-15);
    EXPECT_NEAR(log_merge_jacobian(1, 3), std::log(0.25), 1e-15);
    const auto m = merge_heights(1.0, 3.0, 3, 3);
    EXPECT_DOUBLE_EQ(m.first, 2.0);
    EXPECT_DOUBLE_EQ(m.second, 3.0);
}

TEST(DeathRatio, PrintedFormLacksPriorOdds) {
    const SegmentStats st(Dataset{{0.4, 1.1, -0.3, 2.0, 0.7, -1.2}});
    const ModelParams p;
    const ChangepointState s{{3, 5}, {0.2, 0.9, -0.1}};
    const std::size_t n = 6, m = 2;
    const double c = static_cast<double>(m) - 1.0;
    const double L = log_L(st, p, 1, 3, 5, 0.5, 0.2, 0.9);
    EXPECT_NEAR(printed_death_log_ratio(Variant::plain, s, 0, 0.5, st, p), std::log((n - c) / (c + 1.0)) + L, 1e-12);
    EXPECT_GT(std::fabs(printed_death_log_ratio(Variant::plain, s, 0, 0.5, st, p) - plain_death_ratio(s, 0, 0.5, st, p)),
              1.0);
}

TEST(BirthDeath, PairedDeathRestoresStateBitwise) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> hd(0.0, 2.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 2 + rng() % 40;
        ChangepointState s{{}, {hd(rng)}};
        for (int pos = 2; pos <= static_cast<int>(n); ++pos)
            if (rng() % 4 == 0) {
                s.cps.push_back(pos);
                s.heights.push_back(hd(rng));
            }
        if (s.count() + 1 >= n) continue;
        const int pos = changepoint::detail::free_position(s.cps, rng() % (n - 1 - s.count()));
        const auto it = std::lower_bound(s.cps.begin(), s.cps.end(), pos);
        const std::size_t seg = static_cast<std::size_t>(it - s.cps.begin());
        const ChangepointState born = with_birth(s, pos, hd(rng), hd(rng));
        ASSERT_TRUE(is_valid(born, n));
        EXPECT_EQ(with_death(born, seg, s.heights[seg]), s);
    }
}

TEST(BirthDeath, PosthocSplitMergeRoundTrip) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> hd(0.0, 3.0);
    for (int rep = 0; rep < 10000; ++rep) {
        const int n1 = 1 + static_cast<int>(rng() % 300), n2 = 1 + static_cast<int>(rng() % 300);
        const double h = hd(rng), u = hd(rng);
        const auto sp = split_heights(h, u, n1, n2);
        const auto back = merge_heights(sp.first, sp.second, n1, n2);
        ASSERT_NEAR(back.first, h, 1e-12 * std::max(1.0, std::fabs(h)));
        ASSERT_EQ(back.second, u);
    }
}

TEST(BirthDeath, DeathWithoutChangepointThrows) {
    const ChangepointState s{{}, {0.0}};
    EXPECT_THROW(split_at(s, 0, 5), std::out_of_range);
    EXPECT_THROW(with_death(s, 0, 0.0), std::out_of_range);
    EXPECT_THROW(with_birth(ChangepointState{{3}, {0, 0}}, 3, 0.0, 0.0), std::invalid_argument);
}

TEST(FreePosition, EnumeratesUnusedPositions) {
    const std::vector<int> cps{2, 4, 5};
    EXPECT_EQ(changepoint::detail::free_position(cps, 0), 3);
    EXPECT_EQ(changepoint::detail::free_position(cps, 1), 6);
    EXPECT_EQ(changepoint::detail::free_position(cps, 2), 7);
    EXPECT_EQ(changepoint::detail::free_position({}, 0), 2);
}

class SamplerMoves : public ::testing::TestWithParam<Variant> {};

TEST_P(SamplerMoves, ProposalsAreValidAndRatiosNegate) {
    const Variant v = GetParam();
    const Dataset d = generate_dataset(40, {15, 28}, {-1.0, 2.0, 0.5}, 1.0, 9);
    auto ctx = std::make_shared<const ModelContext>(d, ModelParams{}, v);
    const auto moves = make_move_set(ctx);
    Rng rng = make_chain_rng(21);
    ChangepointState s{{8, 15, 22, 28}, {-0.9, -1.1, 2.1, 1.8, 0.4}};
    for (int rep = 0; rep < 2000; ++rep) {
        for (const auto& m : moves) {
            if (m.move_prob(s) == 0.0) continue;
            const auto o = m.propose(s, rng);
            ASSERT_TRUE(is_valid(o.proposed, d.n())) << m.name;
            EXPECT_EQ(o.aux.has_value(), m.kind == MoveKind::posthoc) << m.name;
            if (m.same_fiber) {
                EXPECT_TRUE(m.same_fiber(s, o.proposed)) << m.name;
            }
            const double r = m.log_ratio(s, o);
            ASSERT_TRUE(std::isfinite(r)) << m.name;
            if (m.kind != MoveKind::posthoc) {
                const auto& rev = moves[m.reverse];
                const double back = rev.log_ratio(o.proposed, ProposalOutcome<ChangepointState>{s, std::nullopt, 0.0});
                EXPECT_NEAR(r + back, 0.0, 1e-9 * std::max(1.0, std::fabs(r))) << m.name;
            }
        }
        // Walk so that the state space is explored across counts.
        const auto& m = moves[MoveLabel{rng() % moves.size()}];
        if (m.move_prob(s) > 0.0) s = m.propose(s, rng).proposed;
    }
}

INSTANTIATE_TEST_SUITE_P(Variants, SamplerMoves, ::testing::Values(Variant::plain, Variant::adhoc, Variant::posthoc),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(SamplerMoves, KindsFollowTheVariant) {
    const Dataset d{{0.0, 1.0, 2.0, 3.0}};
    for (Variant v : {Variant::plain, Variant::adhoc, Variant::posthoc}) {
        const auto moves = make_move_set(std::make_shared<const ModelContext>(d, ModelParams{}, v));
        EXPECT_EQ(moves[0].kind, v == Variant::posthoc ? MoveKind::posthoc : MoveKind::adhoc);
        EXPECT_EQ(moves[2].kind, MoveKind::mwg);
        EXPECT_EQ(moves[3].kind, MoveKind::mwg);
    }
    EXPECT_EQ(parse_variant("adhoc"), Variant::adhoc);
    EXPECT_THROW(parse_variant("nope"), std::invalid_argument);
}

}  // namespace
