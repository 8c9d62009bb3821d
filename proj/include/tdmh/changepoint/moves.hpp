#ifndef TDMH_CHANGEPOINT_MOVES_HPP
#define TDMH_CHANGEPOINT_MOVES_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmh/acceptance.hpp"
#include "tdmh/chain.hpp"
#include "tdmh/changepoint/model.hpp"
#include "tdmh/log_math.hpp"
#include "tdmh/mixture.hpp"

namespace tdmh::changepoint {

/// How birth and death propose segment heights.
///
/// plain:   heights drawn from the N(0, 25) prior.
/// adhoc:   heights drawn from N(segment mean, tau^2).
/// posthoc: death merges deterministically to the length-weighted mean; birth
///          draws the right height u ~ N(right mean, tau^2) and solves for the
///          left one.
enum class Variant { plain, adhoc, posthoc };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::plain: return "plain";
        case Variant::adhoc: return "adhoc";
        case Variant::posthoc: return "posthoc";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "plain") return Variant::plain;
    if (s == "adhoc") return Variant::adhoc;
    if (s == "posthoc") return Variant::posthoc;
    throw std::invalid_argument("unknown variant '" + s + "' (expected plain, adhoc or posthoc)");
}

/// Move labels of the changepoint move set.
enum class MoveType : std::size_t { death = 0, birth = 1, shift = 2, adjust = 3 };
inline constexpr std::size_t move_count = 4;
inline constexpr const char* move_names[move_count] = {"death", "birth", "shift", "adjust"};

struct MoveSchedule {
    double death = 0.0;
    double birth = 0.0;
    double shift = 0.0;
    double adjust = 0.0;

    double operator[](MoveType t) const {
        switch (t) {
            case MoveType::death: return death;
            case MoveType::birth: return birth;
            case MoveType::shift: return shift;
            case MoveType::adjust: return adjust;
        }
        return 0.0;
    }
};

/// 0.25 for every move in interior states. With no changepoint: birth 0.75,
/// adjust 0.25. With every position taken: death 0.5, shift 0.25, adjust 0.25.
inline MoveSchedule move_schedule(std::size_t changepoints, std::size_t n) {
    const std::size_t positions = n >= 1 ? n - 1 : 0;
    if (positions == 0) return {0.0, 0.0, 0.0, 1.0};
    if (changepoints == 0) return {0.0, 0.75, 0.0, 0.25};
    if (changepoints >= positions) return {0.5, 0.0, 0.25, 0.25};
    return {0.25, 0.25, 0.25, 0.25};
}

inline MoveSchedule move_schedule(const ChangepointState& s, std::size_t n) { return move_schedule(s.count(), n); }

/// Where a changepoint sits relative to its neighbours: l < i < k with
/// heights h1 on [l, i) and h2 on [i, k).
struct Split {
    int l = 1, i = 2, k = 3;
    double h1 = 0.0, h2 = 0.0;
    int n1() const { return i - l; }
    int n2() const { return k - i; }
};

inline Split split_at(const ChangepointState& s, std::size_t cp_index, std::size_t n) {
    if (cp_index >= s.count()) throw std::out_of_range("no removable changepoint at this index");
    return Split{s.segment_begin(cp_index), s.cps[cp_index], s.segment_end(cp_index + 1, n), s.heights[cp_index],
                 s.heights[cp_index + 1]};
}

// ---------------------------------------------------------------------------
// Post-hoc height transform. (h1, h2) <-> (h, u) with h the length-weighted
// mean and u = h2; |d(h,u)/d(h1,h2)| = n1 / (n1 + n2).
// ---------------------------------------------------------------------------

struct HeightPair {
    double first = 0.0;
    double second = 0.0;
};

inline HeightPair merge_heights(double h1, double h2, int n1, int n2) {
    return {(n1 * h1 + n2 * h2) / static_cast<double>(n1 + n2), h2};
}

inline HeightPair split_heights(double h, double u, int n1, int n2) {
    return {(static_cast<double>(n1 + n2) * h - n2 * u) / static_cast<double>(n1), u};
}

inline double log_merge_jacobian(int n1, int n2) { return std::log(static_cast<double>(n1) / (n1 + n2)); }

// ---------------------------------------------------------------------------
// Closed-form log acceptance ratios.
// ---------------------------------------------------------------------------

/// Adjust of one segment's height from h_old to h_new. The random-walk
/// proposal is symmetric and the segment choice cancels.
inline double adjust_ratio(const ChangepointState& s, std::size_t segment, double h_old, double h_new,
                           const SegmentStats& stats, const ModelParams& p) {
    const std::size_t n = stats.n();
    if (segment >= s.heights.size()) throw std::out_of_range("adjust_ratio: segment index out of range");
    const int a = s.segment_begin(segment), b = s.segment_end(segment, n);
    return log_normal_pdf(h_new, 0.0, p.height_prior_var) - log_normal_pdf(h_old, 0.0, p.height_prior_var) +
           log_segment_fit(stats, a, b, h_new, p.obs_var) - log_segment_fit(stats, a, b, h_old, p.obs_var);
}

/// Shift of changepoint `cp_index` from i to j within its neighbours.
inline double shift_ratio(const ChangepointState& s, std::size_t cp_index, int i, int j, const SegmentStats& stats,
                          const ModelParams& p) {
    const Split sp = split_at(s, cp_index, stats.n());
    if (sp.i != i) throw std::invalid_argument("shift_ratio: i is not the changepoint at cp_index");
    if (!(sp.l < j && j < sp.k)) throw std::invalid_argument("shift_ratio: new position outside the neighbours");
    auto fit = [&](int b) {
        return log_segment_fit(stats, sp.l, b, sp.h1, p.obs_var) + log_segment_fit(stats, b, sp.k, sp.h2, p.obs_var);
    };
    return fit(j) - fit(i);
}

/// log of the death ratio from `from` (changepoint cp_index removed, merged
/// height h) derived from target ratio x reverse/forward proposal ratio x
/// move-probability ratio. Includes the prior odds (1-q)/q of one fewer
/// changepoint and the location-choice factor m / (n - m).
inline double death_log_ratio(Variant v, const ChangepointState& from, std::size_t cp_index, double h,
                              const SegmentStats& stats, const ModelParams& p) {
    const std::size_t n = stats.n();
    const std::size_t m = from.count();
    const Split sp = split_at(from, cp_index, n);
    const double beta_birth_to = move_schedule(m - 1, n).birth;
    const double beta_death_from = move_schedule(m, n).death;

    double r = log_L(stats, p, sp.l, sp.i, sp.k, h, sp.h1, sp.h2);
    r += std::log1p(-p.q) - std::log(p.q);
    r += std::log(static_cast<double>(m)) - std::log(static_cast<double>(n - m));
    r += std::log(beta_birth_to) - std::log(beta_death_from);

    const double v0 = p.height_prior_var;
    const double tau2 = p.adhoc_var;
    switch (v) {
        case Variant::plain:
            break;  // prior heights cancel against the prior-shaped proposals
        case Variant::adhoc:
            r += log_normal_pdf(h, 0.0, v0) - log_normal_pdf(sp.h1, 0.0, v0) - log_normal_pdf(sp.h2, 0.0, v0);
            r += log_normal_pdf(sp.h1, segment_mean(stats, sp.l, sp.i), tau2) +
                 log_normal_pdf(sp.h2, segment_mean(stats, sp.i, sp.k), tau2) -
                 log_normal_pdf(h, segment_mean(stats, sp.l, sp.k), tau2);
            break;
        case Variant::posthoc:
            r += log_normal_pdf(h, 0.0, v0) - log_normal_pdf(sp.h1, 0.0, v0) - log_normal_pdf(sp.h2, 0.0, v0);
            r += log_normal_pdf(sp.h2, segment_mean(stats, sp.i, sp.k), tau2);
            r += log_merge_jacobian(sp.n1(), sp.n2());
            break;
    }
    return r;
}

inline double plain_death_ratio(const ChangepointState& from, std::size_t cp_index, double h,
                                const SegmentStats& stats, const ModelParams& p) {
    return death_log_ratio(Variant::plain, from, cp_index, h, stats, p);
}

inline double adhoc_death_ratio(const ChangepointState& from, std::size_t cp_index, double h,
                                const SegmentStats& stats, const ModelParams& p) {
    return death_log_ratio(Variant::adhoc, from, cp_index, h, stats, p);
}

/// The post-hoc death is deterministic: h is the length-weighted mean.
inline double posthoc_death_ratio(const ChangepointState& from, std::size_t cp_index, const SegmentStats& stats,
                                  const ModelParams& p) {
    const Split sp = split_at(from, cp_index, stats.n());
    const double h = merge_heights(sp.h1, sp.h2, sp.n1(), sp.n2()).first;
    return death_log_ratio(Variant::posthoc, from, cp_index, h, stats, p);
}

/// Inserts a changepoint at `position` splitting the segment's height into
/// (h1, h2).
inline ChangepointState with_birth(const ChangepointState& s, int position, double h1, double h2) {
    const auto it = std::lower_bound(s.cps.begin(), s.cps.end(), position);
    if (it != s.cps.end() && *it == position) throw std::invalid_argument("with_birth: position already taken");
    const std::size_t seg = static_cast<std::size_t>(it - s.cps.begin());
    ChangepointState out;
    out.cps.reserve(s.cps.size() + 1);
    out.heights.reserve(s.heights.size() + 1);
    out.cps.assign(s.cps.begin(), it);
    out.cps.push_back(position);
    out.cps.insert(out.cps.end(), it, s.cps.end());
    out.heights.assign(s.heights.begin(), s.heights.begin() + static_cast<std::ptrdiff_t>(seg));
    out.heights.push_back(h1);
    out.heights.push_back(h2);
    out.heights.insert(out.heights.end(), s.heights.begin() + static_cast<std::ptrdiff_t>(seg) + 1, s.heights.end());
    return out;
}

/// Removes changepoint cp_index, giving the merged segment height h.
inline ChangepointState with_death(const ChangepointState& s, std::size_t cp_index, double h) {
    if (cp_index >= s.count()) throw std::out_of_range("with_death: no changepoint at this index");
    ChangepointState out = s;
    out.cps.erase(out.cps.begin() + static_cast<std::ptrdiff_t>(cp_index));
    out.heights.erase(out.heights.begin() + static_cast<std::ptrdiff_t>(cp_index) + 1);
    out.heights[cp_index] = h;
    return out;
}

/// Birth of a changepoint at `position` with heights (h1, h2) from `from`.
/// Equals minus the death ratio of the paired reverse transition.
inline double birth_log_ratio(Variant v, const ChangepointState& from, int position, double h1, double h2,
                              const SegmentStats& stats, const ModelParams& p) {
    const auto it = std::lower_bound(from.cps.begin(), from.cps.end(), position);
    const std::size_t seg = static_cast<std::size_t>(it - from.cps.begin());
    const double h = from.heights[seg];
    const ChangepointState born = with_birth(from, position, h1, h2);
    return -death_log_ratio(v, born, seg, h, stats, p);
}

/// Death ratio as printed with the benchmark, (n-c)/(c+1) * p_b/p_d * L * ...
/// with c+1 the current number of interior changepoints and no prior-odds
/// term. Kept for comparison against the derived ratio; the chain does not
/// use it.
inline double printed_death_log_ratio(Variant v, const ChangepointState& from, std::size_t cp_index, double h,
                                      const SegmentStats& stats, const ModelParams& p) {
    const std::size_t n = stats.n();
    const std::size_t m = from.count();
    const Split sp = split_at(from, cp_index, n);
    const double c = static_cast<double>(m) - 1.0;
    double r = std::log((static_cast<double>(n) - c) / (c + 1.0));
    r += std::log(move_schedule(m - 1, n).birth) - std::log(move_schedule(m, n).death);
    r += log_L(stats, p, sp.l, sp.i, sp.k, h, sp.h1, sp.h2);
    const double v0 = p.height_prior_var;
    const double tau2 = p.adhoc_var;
    switch (v) {
        case Variant::plain: break;
        case Variant::adhoc:
            r += log_normal_pdf(h, 0.0, v0) - log_normal_pdf(sp.h1, 0.0, v0) - log_normal_pdf(sp.h2, 0.0, v0);
            r += log_normal_pdf(sp.h1, segment_mean(stats, sp.l, sp.i), tau2) +
                 log_normal_pdf(sp.h2, segment_mean(stats, sp.i, sp.k), tau2) -
                 log_normal_pdf(h, segment_mean(stats, sp.l, sp.k), tau2);
            break;
        case Variant::posthoc:
            r += log_normal_pdf(h, 0.0, v0) - log_normal_pdf(sp.h1, 0.0, v0) - log_normal_pdf(sp.h2, 0.0, v0);
            r += log_normal_pdf(sp.h2, segment_mean(stats, sp.i, sp.k), tau2);
            r += log_merge_jacobian(sp.n1(), sp.n2());
            break;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Sampler-level moves.
// ---------------------------------------------------------------------------

/// Immutable data shared by all moves of one experiment.
struct ModelContext {
    SegmentStats stats;
    ModelParams params;
    Variant variant = Variant::plain;

    ModelContext(const Dataset& data, ModelParams p, Variant v) : stats(data), params(p), variant(v) {
        params.validate();
    }
};

namespace detail {

inline std::size_t uniform_index(std::size_t count, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

inline double normal(double mean, double variance, Rng& rng) {
    return std::normal_distribution<double>(mean, std::sqrt(variance))(rng);
}

/// r-th position of {2..n} not holding a changepoint (r is 0-based).
inline int free_position(const std::vector<int>& cps, std::size_t r) {
    int pos = 2 + static_cast<int>(r);
    for (int c : cps) {
        if (c <= pos) ++pos;
        else break;
    }
    return pos;
}

inline std::size_t first_difference(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t len = std::min(a.size(), b.size());
    std::size_t i = 0;
    while (i < len && a[i] == b[i]) ++i;
    return i;
}

}  // namespace detail

using CpMove = MoveSpec<ChangepointState, Rng>;

/// The four moves (death, birth, shift, adjust) for one birth/death variant.
inline MoveSet<ChangepointState, Rng> make_move_set(std::shared_ptr<const ModelContext> ctx) {
    const Variant variant = ctx->variant;
    const MoveKind bd_kind = variant == Variant::posthoc ? MoveKind::posthoc : MoveKind::adhoc;
    auto beta = [ctx](MoveType t) {
        return [ctx, t](const ChangepointState& s) { return move_schedule(s, ctx->stats.n())[t]; };
    };
    std::vector<CpMove> moves(move_count);

    CpMove& death = moves[0];
    death.label = MoveLabel{0};
    death.reverse = MoveLabel{1};
    death.kind = bd_kind;
    death.name = "death";
    death.move_prob = beta(MoveType::death);
    death.propose = [ctx](const ChangepointState& s, Rng& rng) {
        const std::size_t n = ctx->stats.n();
        const auto& p = ctx->params;
        const std::size_t idx = detail::uniform_index(s.count(), rng);
        const Split sp = split_at(s, idx, n);
        ProposalOutcome<ChangepointState> out;
        double h = 0.0;
        switch (ctx->variant) {
            case Variant::plain: h = detail::normal(0.0, p.height_prior_var, rng); break;
            case Variant::adhoc: h = detail::normal(segment_mean(ctx->stats, sp.l, sp.k), p.adhoc_var, rng); break;
            case Variant::posthoc:
                h = merge_heights(sp.h1, sp.h2, sp.n1(), sp.n2()).first;
                out.aux = std::vector<double>{};
                out.log_correction = log_merge_jacobian(sp.n1(), sp.n2());
                break;
        }
        out.proposed = with_death(s, idx, h);
        return out;
    };
    death.log_ratio = [ctx](const ChangepointState& s, const ProposalOutcome<ChangepointState>& o) {
        const std::size_t idx = detail::first_difference(s.cps, o.proposed.cps);
        return death_log_ratio(ctx->variant, s, idx, o.proposed.heights[idx], ctx->stats, ctx->params);
    };

    CpMove& birth = moves[1];
    birth.label = MoveLabel{1};
    birth.reverse = MoveLabel{0};
    birth.kind = bd_kind;
    birth.name = "birth";
    birth.move_prob = beta(MoveType::birth);
    birth.propose = [ctx](const ChangepointState& s, Rng& rng) {
        const std::size_t n = ctx->stats.n();
        const auto& p = ctx->params;
        const int pos = detail::free_position(s.cps, detail::uniform_index(n - 1 - s.count(), rng));
        const auto it = std::lower_bound(s.cps.begin(), s.cps.end(), pos);
        const std::size_t seg = static_cast<std::size_t>(it - s.cps.begin());
        const int l = s.segment_begin(seg), k = s.segment_end(seg, n);
        ProposalOutcome<ChangepointState> out;
        double h1 = 0.0, h2 = 0.0;
        switch (ctx->variant) {
            case Variant::plain:
                h1 = detail::normal(0.0, p.height_prior_var, rng);
                h2 = detail::normal(0.0, p.height_prior_var, rng);
                break;
            case Variant::adhoc:
                h1 = detail::normal(segment_mean(ctx->stats, l, pos), p.adhoc_var, rng);
                h2 = detail::normal(segment_mean(ctx->stats, pos, k), p.adhoc_var, rng);
                break;
            case Variant::posthoc: {
                const double u = detail::normal(segment_mean(ctx->stats, pos, k), p.adhoc_var, rng);
                const HeightPair hp = split_heights(s.heights[seg], u, pos - l, k - pos);
                h1 = hp.first;
                h2 = hp.second;
                out.aux = std::vector<double>{u};
                out.log_correction = -log_merge_jacobian(pos - l, k - pos);
                break;
            }
        }
        out.proposed = with_birth(s, pos, h1, h2);
        return out;
    };
    birth.log_ratio = [ctx](const ChangepointState& s, const ProposalOutcome<ChangepointState>& o) {
        const std::size_t idx = detail::first_difference(s.cps, o.proposed.cps);
        return birth_log_ratio(ctx->variant, s, o.proposed.cps[idx], o.proposed.heights[idx],
                               o.proposed.heights[idx + 1], ctx->stats, ctx->params);
    };

    CpMove& shift = moves[2];
    shift.label = MoveLabel{2};
    shift.reverse = MoveLabel{2};
    shift.kind = MoveKind::mwg;
    shift.name = "shift";
    shift.move_prob = beta(MoveType::shift);
    shift.propose = [ctx](const ChangepointState& s, Rng& rng) {
        const std::size_t n = ctx->stats.n();
        const std::size_t idx = detail::uniform_index(s.count(), rng);
        const Split sp = split_at(s, idx, n);
        const int j = sp.l + 1 + static_cast<int>(detail::uniform_index(static_cast<std::size_t>(sp.k - sp.l - 1), rng));
        ProposalOutcome<ChangepointState> out{s, std::nullopt, 0.0};
        out.proposed.cps[idx] = j;
        return out;
    };
    shift.log_ratio = [ctx](const ChangepointState& s, const ProposalOutcome<ChangepointState>& o) {
        const std::size_t idx = detail::first_difference(s.cps, o.proposed.cps);
        if (idx == s.count()) return 0.0;
        return shift_ratio(s, idx, s.cps[idx], o.proposed.cps[idx], ctx->stats, ctx->params);
    };
    // Fiber: same heights, same count, at most one changepoint moved.
    shift.same_fiber = [](const ChangepointState& a, const ChangepointState& b) {
        if (a.heights != b.heights || a.cps.size() != b.cps.size()) return false;
        std::size_t diffs = 0;
        for (std::size_t i = 0; i < a.cps.size(); ++i) diffs += a.cps[i] != b.cps[i];
        return diffs <= 1;
    };

    CpMove& adjust = moves[3];
    adjust.label = MoveLabel{3};
    adjust.reverse = MoveLabel{3};
    adjust.kind = MoveKind::mwg;
    adjust.name = "adjust";
    adjust.move_prob = beta(MoveType::adjust);
    adjust.propose = [ctx](const ChangepointState& s, Rng& rng) {
        const std::size_t seg = detail::uniform_index(s.heights.size(), rng);
        ProposalOutcome<ChangepointState> out{s, std::nullopt, 0.0};
        out.proposed.heights[seg] = detail::normal(s.heights[seg], ctx->params.adjust_var, rng);
        return out;
    };
    adjust.log_ratio = [ctx](const ChangepointState& s, const ProposalOutcome<ChangepointState>& o) {
        std::size_t seg = 0;
        while (seg < s.heights.size() && s.heights[seg] == o.proposed.heights[seg]) ++seg;
        if (seg == s.heights.size()) return 0.0;
        return adjust_ratio(s, seg, s.heights[seg], o.proposed.heights[seg], ctx->stats, ctx->params);
    };
    // Fiber: same changepoints, at most one height changed.
    adjust.same_fiber = [](const ChangepointState& a, const ChangepointState& b) {
        if (a.cps != b.cps || a.heights.size() != b.heights.size()) return false;
        std::size_t diffs = 0;
        for (std::size_t i = 0; i < a.heights.size(); ++i) diffs += a.heights[i] != b.heights[i];
        return diffs <= 1;
    };

    return MoveSet<ChangepointState, Rng>(std::move(moves));
}

/// Sampler for the changepoint posterior with the given variant.
inline Sampler<ChangepointState, Rng> make_sampler(std::shared_ptr<const ModelContext> ctx) {
    Sampler<ChangepointState, Rng> s{
        [ctx](const ChangepointState& st) { return log_posterior(st, ctx->stats, ctx->params); },
        make_move_set(ctx),
        [ctx](const ChangepointState& st) { return is_valid(st, ctx->stats.n()); },
    };
    return s;
}

/// The chain's starting point: no changepoints, height 0.
inline ChangepointState initial_state() { return ChangepointState{{}, {0.0}}; }

}  // namespace tdmh::changepoint

#endif  // TDMH_CHANGEPOINT_MOVES_HPP
