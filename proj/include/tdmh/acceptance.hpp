#ifndef TDMH_ACCEPTANCE_HPP
#define TDMH_ACCEPTANCE_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmh/log_math.hpp"
#include "tdmh/mixture.hpp"

namespace tdmh {

/// Unnormalized log target density; -inf outside the support.
template <class State>
using LogDensity = std::function<double(const State&)>;

/// Thrown when an mwg proposal leaves the fiber of its move.
struct FiberViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Components of a move whose proposal has a kernel density on the target
/// space. Used by the primal, mixture and ad-hoc constructions.
///
/// For ad-hoc translations `translate` maps the current state into the
/// destination space and `log_kernel(anchor, to)` is the proposal density
/// around that image. An empty `translate` is the identity.
template <class State>
struct KernelMove {
    MoveLabel reverse;
    std::function<double(const State&)> move_prob;
    std::function<State(const State&)> translate;
    std::function<double(const State& anchor, const State& to)> log_kernel;
};

template <class State>
struct AuxImage {
    State state;
    std::vector<double> aux;
};

/// Components of a post-hoc translation: an auxiliary draw u' ~ q(s', .),
/// the paired transform (s', u') -> (s, u) and the log density-correction
/// factor log f(s', u'). The transform of a move and that of its reverse must
/// be mutually inverse.
///
/// `aux_support` enumerates the auxiliary space; only the discrete
/// construction needs it.
template <class State>
struct AuxMove {
    MoveLabel reverse;
    std::function<double(const State&)> move_prob;
    std::function<double(const State&, std::span<const double>)> log_aux_density;
    std::function<AuxImage<State>(const State&, std::span<const double>)> transform;
    std::function<double(const State&, std::span<const double>)> log_correction;
    std::function<std::vector<std::vector<double>>(const State&)> aux_support;
};

namespace detail {

inline double log_prob(double p) { return p > 0.0 ? std::log(p) : neg_inf; }

template <class Move>
const Move& checked(std::span<const Move> moves, MoveLabel l) {
    if (l.value >= moves.size()) throw std::out_of_range("acceptance: unregistered move label");
    const auto& m = moves[l.value];
    if (m.reverse.value >= moves.size()) throw std::out_of_range("acceptance: unregistered reverse label");
    return m;
}

inline double sum3(double a, double b, double c) { return log_sum_saturating(log_sum_saturating(a, b), c); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Log acceptance ratios. Every evaluator returns -inf for transitions whose
// ratio is undefined; accept_prob_from_log_ratio then yields 0.
// ---------------------------------------------------------------------------

/// log [p(s) q(s,s')] / [p(s') q(s',s)] for a single proposal kernel.
template <class State, class Target, class Kernel>
double log_ratio_primal(const Target& log_p, const Kernel& log_q, const State& from, const State& to) {
    const double num = log_sum_saturating(log_p(to), log_q(to, from));
    const double den = log_sum_saturating(log_p(from), log_q(from, to));
    return log_diff_saturating(num, den);
}

template <class State, class Target, class Kernel>
double accept_prob_primal(const Target& log_p, const Kernel& log_q, const State& from, const State& to) {
    return accept_prob_from_log_ratio(log_ratio_primal(log_p, log_q, from, to));
}

/// Pairwise mixture ratio: the reverse move's kernel and move probability
/// enter the numerator.
template <class State, class Target>
double log_ratio_mixture(const Target& log_p, std::span<const KernelMove<State>> moves, MoveLabel l,
                         const State& from, const State& to) {
    const auto& fwd = detail::checked(moves, l);
    const auto& rev = moves[fwd.reverse.value];
    const double num = detail::sum3(log_p(to), rev.log_kernel(to, from), detail::log_prob(rev.move_prob(to)));
    const double den = detail::sum3(log_p(from), fwd.log_kernel(from, to), detail::log_prob(fwd.move_prob(from)));
    return log_diff_saturating(num, den);
}

template <class State, class Target>
double accept_prob_mixture(const Target& log_p, std::span<const KernelMove<State>> moves, MoveLabel l,
                           const State& from, const State& to) {
    return accept_prob_from_log_ratio(log_ratio_mixture(log_p, moves, l, from, to));
}

/// Ad-hoc translation ratio: each kernel is evaluated around the translated
/// image of its conditioning state.
template <class State, class Target>
double log_ratio_adhoc(const Target& log_p, std::span<const KernelMove<State>> moves, MoveLabel l,
                       const State& from, const State& to) {
    const auto& fwd = detail::checked(moves, l);
    const auto& rev = moves[fwd.reverse.value];
    auto anchor = [](const KernelMove<State>& m, const State& s) { return m.translate ? m.translate(s) : s; };
    const double num =
        detail::sum3(log_p(to), rev.log_kernel(anchor(rev, to), from), detail::log_prob(rev.move_prob(to)));
    const double den =
        detail::sum3(log_p(from), fwd.log_kernel(anchor(fwd, from), to), detail::log_prob(fwd.move_prob(from)));
    return log_diff_saturating(num, den);
}

template <class State, class Target>
double accept_prob_adhoc(const Target& log_p, std::span<const KernelMove<State>> moves, MoveLabel l,
                         const State& from, const State& to) {
    return accept_prob_from_log_ratio(log_ratio_adhoc(log_p, moves, l, from, to));
}

/// Post-hoc translation ratio, accepted in the auxiliary space:
/// p(s) q_r(s,u) beta_r(s) f(s',u') / [p(s') q(s',u') beta(s')] with
/// (s,u) = transform(s',u').
template <class State, class Target>
double log_ratio_posthoc(const Target& log_p, std::span<const AuxMove<State>> moves, MoveLabel l,
                         const State& from, std::span<const double> aux) {
    const auto& fwd = detail::checked(moves, l);
    const auto& rev = moves[fwd.reverse.value];
    const AuxImage<State> image = fwd.transform(from, aux);
    const double log_f = fwd.log_correction ? fwd.log_correction(from, aux) : 0.0;
    const double num = log_sum_saturating(
        detail::sum3(log_p(image.state), rev.log_aux_density(image.state, image.aux),
                     detail::log_prob(rev.move_prob(image.state))),
        log_f);
    const double den = detail::sum3(log_p(from), fwd.log_aux_density(from, aux), detail::log_prob(fwd.move_prob(from)));
    return log_diff_saturating(num, den);
}

template <class State, class Target>
double accept_prob_posthoc(const Target& log_p, std::span<const AuxMove<State>> moves, MoveLabel l,
                           const State& from, std::span<const double> aux) {
    return accept_prob_from_log_ratio(log_ratio_posthoc(log_p, moves, l, from, aux));
}

namespace detail {

/// log of the total auxiliary mass that move m sends from `from` to `to`.
template <class State>
double log_aux_mass_into(const AuxMove<State>& m, const State& from, const State& to) {
    if (!m.aux_support) throw std::invalid_argument("posthoc_discrete: auxiliary space is not enumerable");
    double acc = neg_inf;
    for (const auto& u : m.aux_support(from)) {
        if (m.transform(from, u).state == to) acc = log_add_exp(acc, m.log_aux_density(from, u));
    }
    return acc;
}

}  // namespace detail

/// Post-hoc translation between discrete spaces, accepted in the state space.
/// The proposal masses are summed over all auxiliary points that map onto the
/// transition, in both directions.
template <class State, class Target>
double log_ratio_posthoc_discrete(const Target& log_p, std::span<const AuxMove<State>> moves, MoveLabel l,
                                  const State& from, const State& to) {
    const auto& fwd = detail::checked(moves, l);
    const auto& rev = moves[fwd.reverse.value];
    const double num = detail::sum3(log_p(to), detail::log_aux_mass_into(rev, to, from),
                                    detail::log_prob(rev.move_prob(to)));
    const double den = detail::sum3(log_p(from), detail::log_aux_mass_into(fwd, from, to),
                                    detail::log_prob(fwd.move_prob(from)));
    return log_diff_saturating(num, den);
}

template <class State, class Target>
double accept_prob_posthoc_discrete(const Target& log_p, std::span<const AuxMove<State>> moves, MoveLabel l,
                                    const State& from, const State& to) {
    return accept_prob_from_log_ratio(log_ratio_posthoc_discrete(log_p, moves, l, from, to));
}

/// Metropolis-within-Gibbs ratio on the fiber of one move. The move is its
/// own reverse inside the fiber, so both move probabilities come from the
/// same move. Throws FiberViolation when `to` lies outside the fiber of
/// `from`.
template <class State, class Conditional, class Kernel, class MoveProb, class SameFiber>
double log_ratio_mwg(const Conditional& log_conditional, const Kernel& log_q, const MoveProb& move_prob,
                     const SameFiber& same_fiber, const State& from, const State& to) {
    if (!same_fiber(from, to)) throw FiberViolation("mwg: proposal left the fiber of the current state");
    const double num = detail::sum3(log_conditional(to), log_q(to, from), detail::log_prob(move_prob(to)));
    const double den = detail::sum3(log_conditional(from), log_q(from, to), detail::log_prob(move_prob(from)));
    return log_diff_saturating(num, den);
}

template <class State, class Conditional, class Kernel, class MoveProb, class SameFiber>
double accept_prob_mwg(const Conditional& log_conditional, const Kernel& log_q, const MoveProb& move_prob,
                       const SameFiber& same_fiber, const State& from, const State& to) {
    return accept_prob_from_log_ratio(log_ratio_mwg(log_conditional, log_q, move_prob, same_fiber, from, to));
}

// ---------------------------------------------------------------------------
// Sampler-level move builders. Each wires a component description to the
// matching ratio evaluator so the resulting MoveSpecs can drive a chain.
// ---------------------------------------------------------------------------

template <class State, class Rng>
using StateSampler = std::function<State(const State& anchor, Rng&)>;

template <class State, class Rng>
using AuxSampler = std::function<std::vector<double>(const State&, Rng&)>;

/// Builds MoveSpecs for kernel-density moves. `kind` selects the pairwise
/// mixture ratio (primal) or the ad-hoc ratio (adhoc). Each sampler draws
/// from log_kernel(anchor, .), where anchor is the translated current state.
template <class State, class Rng>
std::vector<MoveSpec<State, Rng>> make_kernel_moves(MoveKind kind, LogDensity<State> log_p,
                                                    std::vector<KernelMove<State>> components,
                                                    std::vector<StateSampler<State, Rng>> samplers,
                                                    std::vector<std::string> names = {}) {
    if (kind != MoveKind::primal && kind != MoveKind::adhoc)
        throw std::invalid_argument("make_kernel_moves: kind must be primal or adhoc");
    if (samplers.size() != components.size())
        throw std::invalid_argument("make_kernel_moves: one sampler per move is required");
    auto shared = std::make_shared<const std::vector<KernelMove<State>>>(std::move(components));
    std::vector<MoveSpec<State, Rng>> out;
    for (std::size_t i = 0; i < shared->size(); ++i) {
        MoveSpec<State, Rng> m;
        m.label = MoveLabel{i};
        m.reverse = (*shared)[i].reverse;
        m.kind = kind;
        m.name = i < names.size() ? names[i] : "move" + std::to_string(i);
        m.move_prob = (*shared)[i].move_prob;
        m.propose = [shared, i, sampler = samplers[i]](const State& s, Rng& rng) {
            const auto& c = (*shared)[i];
            return ProposalOutcome<State>{sampler(c.translate ? c.translate(s) : s, rng), std::nullopt, 0.0};
        };
        m.log_ratio = [shared, i, kind, log_p](const State& s, const ProposalOutcome<State>& o) {
            std::span<const KernelMove<State>> view(*shared);
            return kind == MoveKind::adhoc ? log_ratio_adhoc(log_p, view, MoveLabel{i}, s, o.proposed)
                                           : log_ratio_mixture(log_p, view, MoveLabel{i}, s, o.proposed);
        };
        out.push_back(std::move(m));
    }
    return out;
}

template <class State, class Rng>
std::vector<MoveSpec<State, Rng>> make_posthoc_moves(LogDensity<State> log_p, std::vector<AuxMove<State>> components,
                                                     std::vector<AuxSampler<State, Rng>> samplers,
                                                     std::vector<std::string> names = {}) {
    if (samplers.size() != components.size())
        throw std::invalid_argument("make_posthoc_moves: one sampler per move is required");
    auto shared = std::make_shared<const std::vector<AuxMove<State>>>(std::move(components));
    std::vector<MoveSpec<State, Rng>> out;
    for (std::size_t i = 0; i < shared->size(); ++i) {
        MoveSpec<State, Rng> m;
        m.label = MoveLabel{i};
        m.reverse = (*shared)[i].reverse;
        m.kind = MoveKind::posthoc;
        m.name = i < names.size() ? names[i] : "move" + std::to_string(i);
        m.move_prob = (*shared)[i].move_prob;
        m.propose = [shared, i, sampler = samplers[i]](const State& s, Rng& rng) {
            const auto& c = (*shared)[i];
            std::vector<double> u = sampler(s, rng);
            AuxImage<State> image = c.transform(s, u);
            const double log_f = c.log_correction ? c.log_correction(s, u) : 0.0;
            return ProposalOutcome<State>{std::move(image.state), std::move(u), log_f};
        };
        m.log_ratio = [shared, i, log_p](const State& s, const ProposalOutcome<State>& o) {
            if (!o.aux) throw std::logic_error("posthoc move produced no auxiliary point");
            return log_ratio_posthoc(log_p, std::span<const AuxMove<State>>(*shared), MoveLabel{i}, s,
                                     std::span<const double>(*o.aux));
        };
        out.push_back(std::move(m));
    }
    return out;
}

/// Components of one Metropolis-within-Gibbs move.
template <class State, class Rng>
struct MwgMove {
    LogDensity<State> log_conditional;
    std::function<double(const State&, const State&)> log_kernel;
    std::function<double(const State&)> move_prob;
    std::function<bool(const State&, const State&)> same_fiber;
    StateSampler<State, Rng> sampler;
};

template <class State, class Rng>
std::vector<MoveSpec<State, Rng>> make_mwg_moves(std::vector<MwgMove<State, Rng>> components,
                                                 std::vector<std::string> names = {}) {
    std::vector<MoveSpec<State, Rng>> out;
    for (std::size_t i = 0; i < components.size(); ++i) {
        auto c = std::make_shared<const MwgMove<State, Rng>>(std::move(components[i]));
        MoveSpec<State, Rng> m;
        m.label = MoveLabel{i};
        m.reverse = MoveLabel{i};
        m.kind = MoveKind::mwg;
        m.name = i < names.size() ? names[i] : "move" + std::to_string(i);
        m.move_prob = c->move_prob;
        m.same_fiber = c->same_fiber;
        m.propose = [c](const State& s, Rng& rng) {
            return ProposalOutcome<State>{c->sampler(s, rng), std::nullopt, 0.0};
        };
        m.log_ratio = [c](const State& s, const ProposalOutcome<State>& o) {
            return log_ratio_mwg(c->log_conditional, c->log_kernel, c->move_prob, c->same_fiber, s, o.proposed);
        };
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace tdmh

#endif  // TDMH_ACCEPTANCE_HPP
