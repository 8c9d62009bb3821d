#ifndef TDMH_CHAIN_HPP
#define TDMH_CHAIN_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmh/acceptance.hpp"
#include "tdmh/log_math.hpp"
#include "tdmh/mixture.hpp"

namespace tdmh {

/// Chain generator. Chain k of a run seeded with `seed` is seeded through
/// std::seed_seq{seed_lo, seed_hi, k}; see make_chain_rng.
using Rng = std::mt19937_64;

inline constexpr const char* rng_identity = "mt19937_64/seed_seq{seed_lo32,seed_hi32,chain}";

inline Rng make_chain_rng(std::uint64_t seed, std::uint32_t chain = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), chain};
    return Rng(seq);
}

/// Uniform draw in [0, 1) from the top 53 bits of one generator output.
template <class Engine>
double uniform01(Engine& rng) {
    static_assert(Engine::max() == 0xffffffffffffffffULL && Engine::min() == 0, "64-bit engine expected");
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class State>
struct AcceptanceDecision {
    MoveLabel move;
    State proposed;
    double log_ratio = neg_inf;
    double accept_prob = 0.0;
    bool accepted = false;
    double uniform_draw = 0.0;
};

struct ChainConfig {
    std::uint64_t iterations = 1;
    std::uint64_t burnin = 0;
    std::uint64_t thin = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations == 0) throw std::invalid_argument("ChainConfig: iterations must be positive");
        if (thin == 0) throw std::invalid_argument("ChainConfig: thin must be positive");
        if (burnin >= iterations) throw std::invalid_argument("ChainConfig: burnin must be smaller than iterations");
    }
};

template <class State>
struct ChainReport {
    std::vector<std::string> move_names;
    std::vector<std::uint64_t> per_move_proposed;
    std::vector<std::uint64_t> per_move_accepted;
    std::uint64_t iterations = 0;
    double wall_time_seconds = 0.0;
    std::string rng = rng_identity;
    State final_state;

    double acceptance_rate(std::size_t move) const {
        const auto p = per_move_proposed.at(move);
        return p == 0 ? 0.0 : static_cast<double>(per_move_accepted.at(move)) / static_cast<double>(p);
    }
};

/// Target, moves and state validator of one sampler. Immutable once built;
/// several chains may share it.
template <class State, class R = Rng>
struct Sampler {
    LogDensity<State> target;
    MoveSet<State, R> moves;
    std::function<bool(const State&)> is_valid;
};

inline constexpr double move_prob_tolerance = 1e-12;

namespace detail {

template <class State, class R>
MoveLabel select_move(const MoveSet<State, R>& moves, const State& s, double u) {
    double total = 0.0;
    thread_local std::vector<double> beta;
    beta.resize(moves.size());
    for (std::size_t i = 0; i < moves.size(); ++i) {
        beta[i] = moves[i].move_prob(s);
        if (!(beta[i] >= 0.0 && beta[i] <= 1.0)) throw std::logic_error("move probability outside [0,1]");
        total += beta[i];
    }
    if (std::fabs(total - 1.0) > move_prob_tolerance)
        throw std::logic_error("move probabilities do not sum to one (sum = " + std::to_string(total) + ")");
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        if (beta[i] <= 0.0) continue;
        last_positive = i;
        acc += beta[i];
        if (u < acc) return MoveLabel{i};
    }
    return MoveLabel{last_positive};  // u within rounding of the total
}

/// One accept/reject decision; leaves the current state untouched.
template <class State, class R>
AcceptanceDecision<State> decide(const Sampler<State, R>& sampler, const State& current, R& rng) {
    const MoveLabel l = select_move(sampler.moves, current, uniform01(rng));
    const auto& move = sampler.moves[l];
    ProposalOutcome<State> outcome = move.propose(current, rng);

    if (sampler.is_valid && !sampler.is_valid(outcome.proposed))
        throw std::logic_error("move '" + move.name + "' proposed an invalid state");
    switch (move.kind) {
        case MoveKind::posthoc:
            if (!outcome.aux) throw std::logic_error("posthoc move '" + move.name + "' returned no auxiliary point");
            break;
        case MoveKind::mwg:
            if (move.same_fiber && !move.same_fiber(current, outcome.proposed))
                throw FiberViolation("mwg move '" + move.name + "' left the fiber of the current state");
            [[fallthrough]];
        case MoveKind::primal:
        case MoveKind::adhoc:
            if (outcome.aux) throw std::logic_error("move '" + move.name + "' returned an auxiliary point");
            break;
    }

    AcceptanceDecision<State> d;
    d.move = l;
    d.log_ratio = move.log_ratio(current, outcome);
    d.accept_prob = accept_prob_from_log_ratio(d.log_ratio);
    d.uniform_draw = uniform01(rng);
    d.accepted = d.uniform_draw < d.accept_prob;
    d.proposed = std::move(outcome.proposed);
    return d;
}

}  // namespace detail

/// One Metropolis-Hastings transition: choose a move by its probability at
/// the current state, propose, evaluate the move's ratio and accept or
/// reject. On rejection the returned state is a copy of `current`.
template <class State, class R>
std::pair<State, AcceptanceDecision<State>> step(const Sampler<State, R>& sampler, const State& current, R& rng) {
    AcceptanceDecision<State> d = detail::decide(sampler, current, rng);
    State next = d.accepted ? d.proposed : current;
    return {std::move(next), std::move(d)};
}

template <class State>
using TraceSink = std::function<void(std::uint64_t iteration, const State&)>;

/// Runs a chain from `init`. States after burn-in are passed to `sink` every
/// `thin` iterations (iteration numbers are 1-based).
template <class State, class R = Rng>
ChainReport<State> run_chain(const Sampler<State, R>& sampler, State init, const ChainConfig& cfg,
                             const TraceSink<State>& sink = {}, R rng = R{}) {
    cfg.validate();
    if (sampler.is_valid && !sampler.is_valid(init)) throw std::invalid_argument("run_chain: invalid initial state");
    const double lp = sampler.target(init);
    if (!(lp > neg_inf) || std::isnan(lp)) throw std::invalid_argument("run_chain: initial state outside the support");

    ChainReport<State> report;
    const std::size_t n_moves = sampler.moves.size();
    report.per_move_proposed.assign(n_moves, 0);
    report.per_move_accepted.assign(n_moves, 0);
    for (const auto& m : sampler.moves) report.move_names.push_back(m.name);

    const auto t0 = std::chrono::steady_clock::now();
    State current = std::move(init);
    for (std::uint64_t it = 1; it <= cfg.iterations; ++it) {
        AcceptanceDecision<State> d = detail::decide(sampler, current, rng);
        ++report.per_move_proposed[d.move.value];
        if (d.accepted) {
            ++report.per_move_accepted[d.move.value];
            current = std::move(d.proposed);
        }
        if (sink && it > cfg.burnin && (it - cfg.burnin) % cfg.thin == 0) sink(it, current);
    }
    report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.iterations = cfg.iterations;
    report.final_state = std::move(current);
    return report;
}

/// Same as above with the generator derived from cfg.seed and `chain`.
template <class State>
ChainReport<State> run_chain_seeded(const Sampler<State, Rng>& sampler, State init, const ChainConfig& cfg,
                                    const TraceSink<State>& sink = {}, std::uint32_t chain = 0) {
    return run_chain(sampler, std::move(init), cfg, sink, make_chain_rng(cfg.seed, chain));
}

}  // namespace tdmh

#endif  // TDMH_CHAIN_HPP
