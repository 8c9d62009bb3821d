#ifndef TDMH_VALIDATION_PROPERTIES_HPP
#define TDMH_VALIDATION_PROPERTIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tdmh/chain.hpp"
#include "tdmh/changepoint/model.hpp"
#include "tdmh/changepoint/moves.hpp"
#include "tdmh/mixture.hpp"

namespace tdmh::validation {

/// Outcome of a randomized property check.
struct PropertyResult {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    double max_error = 0.0;
    std::string first_failure;

    bool passed() const { return cases > 0 && failures == 0; }

    void record(bool ok, double error, const std::string& what) {
        ++cases;
        max_error = std::max(max_error, error);
        if (!ok) {
            if (failures == 0) first_failure = what;
            ++failures;
        }
    }
};

namespace prop_detail {

using changepoint::ChangepointState;
using changepoint::Dataset;

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(n_min, n_max)(rng);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> level(-4.0, 4.0);
    Dataset d;
    double mean = level(rng);
    for (std::size_t t = 0; t < n; ++t) {
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.1) mean = level(rng);
        d.y.push_back(mean + noise(rng));
    }
    return d;
}

/// Random valid state with `count` changepoints (clamped to n - 1).
inline ChangepointState random_state(std::mt19937_64& rng, std::size_t n, std::size_t count) {
    std::vector<int> positions(n - 1);
    std::iota(positions.begin(), positions.end(), 2);
    std::shuffle(positions.begin(), positions.end(), rng);
    count = std::min(count, n - 1);
    ChangepointState s;
    s.cps.assign(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(s.cps.begin(), s.cps.end());
    std::normal_distribution<double> h(0.0, 3.0);
    for (std::size_t i = 0; i <= count; ++i) s.heights.push_back(h(rng));
    return s;
}

inline changepoint::Variant random_variant(std::mt19937_64& rng) {
    return static_cast<changepoint::Variant>(std::uniform_int_distribution<int>(0, 2)(rng));
}

inline double rel_err(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b))); }

}  // namespace prop_detail

/// Random involutive reverse tables must register and satisfy r(r(l)) = l;
/// tables with a broken involution must be rejected. Also covers the
/// changepoint move sets of every variant.
inline PropertyResult check_move_involution(std::uint64_t cases, std::uint64_t seed) {
    PropertyResult res;
    res.name = "move_label_involution";
    std::mt19937_64 rng(seed);
    using State = int;
    using Spec = MoveSpec<State, Rng>;
    auto make = [](const std::vector<std::size_t>& rev) {
        std::vector<Spec> specs(rev.size());
        for (std::size_t i = 0; i < rev.size(); ++i) {
            specs[i].label = MoveLabel{i};
            specs[i].reverse = MoveLabel{rev[i]};
            specs[i].name = "m" + std::to_string(i);
            specs[i].move_prob = [](const State&) { return 1.0; };
            specs[i].propose = [](const State& s, Rng&) { return ProposalOutcome<State>{s, std::nullopt, 0.0}; };
            specs[i].log_ratio = [](const State&, const ProposalOutcome<State>&) { return 0.0; };
        }
        return specs;
    };
    for (std::uint64_t c = 0; c < cases; ++c) {
        const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::size_t> rev(m);
        std::iota(rev.begin(), rev.end(), 0);
        for (std::size_t i = 0; i + 1 < m; i += 2)  // pair up a random prefix, leave the rest self-reverse
            if (std::uniform_int_distribution<int>(0, 1)(rng)) {
                rev[perm[i]] = perm[i + 1];
                rev[perm[i + 1]] = perm[i];
            }
        bool ok = true;
        try {
            const MoveSet<State, Rng> set(make(rev));
            for (std::size_t l = 0; l < m; ++l)
                ok = ok && reverse_move(set, reverse_move(set, MoveLabel{l})) == MoveLabel{l} &&
                     reverse_move(set, MoveLabel{l}) == MoveLabel{rev[l]};
        } catch (const std::exception&) {
            ok = false;
        }
        // Break the involution: point one move at a partner that does not point back.
        if (m >= 3) {
            std::vector<std::size_t> bad = rev;
            const std::size_t a = perm[0];
            std::size_t b = perm[1];
            if (rev[a] == b) b = perm[2];
            bad[a] = b;
            bool rejected = false;
            try {
                const MoveSet<State, Rng> broken(make(bad));
            } catch (const std::invalid_argument&) {
                rejected = true;
            }
            ok = ok && (rejected || bad[b] == a);
        }
        res.record(ok, 0.0, "move set of size " + std::to_string(m));
    }
    changepoint::Dataset d{{0.0, 1.0, 2.0}};
    for (auto v : {changepoint::Variant::plain, changepoint::Variant::adhoc, changepoint::Variant::posthoc}) {
        auto ctx = std::make_shared<const changepoint::ModelContext>(d, changepoint::ModelParams{}, v);
        const auto set = changepoint::make_move_set(ctx);
        bool ok = reverse_move(set, MoveLabel{0}) == MoveLabel{1} && reverse_move(set, MoveLabel{1}) == MoveLabel{0} &&
                  reverse_move(set, MoveLabel{2}) == MoveLabel{2} && reverse_move(set, MoveLabel{3}) == MoveLabel{3};
        res.record(ok, 0.0, std::string("changepoint move set ") + changepoint::to_string(v));
    }
    return res;
}

/// Birth and death log-ratios negate each other on paired transitions, in
/// both directions and for every variant. Transitions are drawn with the
/// moves' own proposal mechanisms.
inline PropertyResult check_birth_death_negation(std::uint64_t cases, std::uint64_t seed, double tol = 1e-9) {
    using namespace changepoint;
    PropertyResult res;
    res.name = "birth_death_negation";
    std::mt19937_64 rng(seed);
    Rng chain_rng = make_chain_rng(seed, 1);
    for (std::uint64_t c = 0; c < cases; ++c) {
        const Dataset d = prop_detail::random_dataset(rng, 3, 80);
        const std::size_t n = d.n();
        const Variant v = prop_detail::random_variant(rng);
        auto ctx = std::make_shared<const ModelContext>(d, ModelParams{}, v);
        const auto set = make_move_set(ctx);
        const bool from_birth = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
        const std::size_t count = from_birth ? std::uniform_int_distribution<std::size_t>(0, n - 2)(rng)
                                             : std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
        const ChangepointState s = prop_detail::random_state(rng, n, count);
        const auto& fwd = set[from_birth ? 1 : 0];
        const auto& rev = set[from_birth ? 0 : 1];
        const ProposalOutcome<ChangepointState> out = fwd.propose(s, chain_rng);
        const double r_fwd = fwd.log_ratio(s, out);

        // Paired reverse outcome: the proposal that maps back onto s.
        const ChangepointState& t = out.proposed;
        ProposalOutcome<ChangepointState> back{s, std::nullopt, -out.log_correction};
        const std::size_t idx = changepoint::detail::first_difference(s.cps, t.cps);
        if (v == Variant::posthoc) {
            if (from_birth) {
                back.aux = std::vector<double>{};
                back.proposed = with_death(t, idx, merge_heights(t.heights[idx], t.heights[idx + 1],
                                                                 split_at(t, idx, n).n1(), split_at(t, idx, n).n2())
                                                       .first);
            } else {
                back.aux = std::vector<double>{s.heights[idx + 1]};
            }
        }
        const double r_rev = rev.log_ratio(t, back);
        const double err = std::fabs(r_fwd + r_rev) / std::max(1.0, std::fabs(r_fwd));
        res.record(std::isfinite(r_fwd) && err <= tol, err,
                   std::string(to_string(v)) + (from_birth ? " birth" : " death") + " n=" + std::to_string(n));
    }
    return res;
}

/// The post-hoc height transform (h1, h2) <-> (h, u) composed with its
/// reverse is the identity, and a birth followed by the paired death
/// restores the state: bit for bit for plain and ad-hoc, to 1e-12 relative
/// for post-hoc heights.
inline PropertyResult check_transform_round_trip(std::uint64_t cases, std::uint64_t seed, double tol = 1e-12) {
    using namespace changepoint;
    PropertyResult res;
    res.name = "transform_round_trip";
    std::mt19937_64 rng(seed);
    Rng chain_rng = make_chain_rng(seed, 2);
    std::normal_distribution<double> h(0.0, 3.0);
    std::uniform_int_distribution<int> len(1, 500);
    for (std::uint64_t c = 0; c < cases; ++c) {
        const int n1 = len(rng), n2 = len(rng);
        const double h1 = h(rng), h2 = h(rng);
        const HeightPair m = merge_heights(h1, h2, n1, n2);
        const HeightPair back = split_heights(m.first, m.second, n1, n2);
        const HeightPair again = merge_heights(back.first, back.second, n1, n2);
        const double err = std::max({prop_detail::rel_err(back.first, h1), prop_detail::rel_err(back.second, h2),
                                     prop_detail::rel_err(again.first, m.first)});
        bool ok = err <= tol && back.second == h2;

        const Dataset d = prop_detail::random_dataset(rng, 3, 60);
        const Variant v = prop_detail::random_variant(rng);
        auto ctx = std::make_shared<const ModelContext>(d, ModelParams{}, v);
        const auto set = make_move_set(ctx);
        const ChangepointState s =
            prop_detail::random_state(rng, d.n(), std::uniform_int_distribution<std::size_t>(0, d.n() - 2)(rng));
        const ChangepointState t = set[1].propose(s, chain_rng).proposed;
        const std::size_t idx = changepoint::detail::first_difference(s.cps, t.cps);
        const Split sp = split_at(t, idx, d.n());
        const double h_back = v == Variant::posthoc ? merge_heights(sp.h1, sp.h2, sp.n1(), sp.n2()).first : s.heights[idx];
        const ChangepointState r = with_death(t, idx, h_back);
        double state_err = 0.0;
        bool same = r.cps == s.cps && r.heights.size() == s.heights.size();
        if (same) {
            for (std::size_t j = 0; j < s.heights.size(); ++j) {
                const double e = prop_detail::rel_err(r.heights[j], s.heights[j]);
                state_err = std::max(state_err, e);
                if (j != idx || v != Variant::posthoc) same = same && r.heights[j] == s.heights[j];
            }
        }
        ok = ok && same && state_err <= tol;
        res.record(ok, std::max(err, state_err), std::string(to_string(v)) + " n1=" + std::to_string(n1) +
                                                     " n2=" + std::to_string(n2));
    }
    return res;
}

/// Move probabilities sum to one and vanish for impossible moves.
inline PropertyResult check_schedule_normalization(std::uint64_t cases, std::uint64_t seed) {
    using namespace changepoint;
    PropertyResult res;
    res.name = "schedule_normalization";
    std::mt19937_64 rng(seed);
    for (std::uint64_t c = 0; c < cases; ++c) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 2000)(rng);
        std::size_t count = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        const int pick = std::uniform_int_distribution<int>(0, 9)(rng);
        if (pick == 0) count = 0;
        if (pick == 1) count = n - 1;
        const MoveSchedule m = move_schedule(count, n);
        const double sum = m.death + m.birth + m.shift + m.adjust;
        const double err = std::fabs(sum - 1.0);
        bool ok = err <= 1e-12;
        for (double b : {m.death, m.birth, m.shift, m.adjust}) ok = ok && b >= 0.0 && b <= 1.0;
        if (count == 0) ok = ok && m.death == 0.0 && m.shift == 0.0;
        if (count == n - 1) ok = ok && m.birth == 0.0;
        if (n >= 3 && count > 0 && count < n - 1) ok = ok && m.death == 0.25 && m.birth == 0.25;
        res.record(ok, err, "n=" + std::to_string(n) + " count=" + std::to_string(count));
    }
    return res;
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_PROPERTIES_HPP
