#ifndef TDMH_VALIDATION_ENUMERATION_HPP
#define TDMH_VALIDATION_ENUMERATION_HPP

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdmh/chain.hpp"
#include "tdmh/changepoint/model.hpp"
#include "tdmh/changepoint/moves.hpp"
#include "tdmh/log_math.hpp"
#include "tdmh/validation/fixture.hpp"

namespace tdmh::validation {

using changepoint::ChangepointState;
using changepoint::Dataset;
using changepoint::ModelParams;
using changepoint::SegmentStats;
using changepoint::Variant;

inline constexpr std::size_t max_enumeration_n = 12;

/// log of the integral over h of prod_{a<=t<b} phi(y_t; h, obs_var) phi(h; 0, prior_var).
inline double log_segment_evidence(const SegmentStats& stats, int a, int b, const ModelParams& p) {
    const double len = static_cast<double>(b - a);
    const double s1 = stats.sum(a, b), s2 = stats.sumsq(a, b);
    const double prec = len / p.obs_var + 1.0 / p.height_prior_var;
    const double lin = s1 / p.obs_var;
    return -0.5 * len * std::log(2.0 * std::numbers::pi * p.obs_var) - s2 / (2.0 * p.obs_var) +
           lin * lin / (2.0 * prec) - 0.5 * std::log(p.height_prior_var * prec);
}

struct ConfigurationPosterior {
    std::vector<std::vector<int>> configs;
    std::vector<double> log_weight;      // unnormalized log marginal posterior
    std::vector<double> prob;            // normalized
    std::vector<double> count_prob;      // P(number of changepoints = c), c = 0..n-1
    double log_normalizer = 0.0;
};

/// Exact posterior over changepoint configurations by enumerating all
/// 2^(n-1) subsets of {2..n}, heights integrated out in closed form.
inline ConfigurationPosterior enumerate_changepoint_posterior(const Dataset& data, const ModelParams& p) {
    data.validate();
    p.validate();
    const std::size_t n = data.n();
    if (n > max_enumeration_n) throw std::invalid_argument("enumerate_changepoint_posterior: n too large (max 12)");
    const SegmentStats stats(data);
    ConfigurationPosterior out;
    const std::uint32_t subsets = 1u << (n - 1);
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        std::vector<int> cps;
        for (std::size_t bit = 0; bit + 1 < n; ++bit)
            if (mask & (1u << bit)) cps.push_back(static_cast<int>(bit) + 2);
        const double c = static_cast<double>(cps.size());
        double lw = c * std::log(p.q) + (static_cast<double>(n) - 1.0 - c) * std::log1p(-p.q);
        int a = 1;
        for (int cp : cps) {
            lw += log_segment_evidence(stats, a, cp, p);
            a = cp;
        }
        lw += log_segment_evidence(stats, a, static_cast<int>(n) + 1, p);
        out.configs.push_back(std::move(cps));
        out.log_weight.push_back(lw);
    }
    double z = neg_inf;
    for (double lw : out.log_weight) z = log_add_exp(z, lw);
    out.log_normalizer = z;
    out.count_prob.assign(n, 0.0);
    for (std::size_t i = 0; i < out.configs.size(); ++i) {
        out.prob.push_back(std::exp(out.log_weight[i] - z));
        out.count_prob[out.configs[i].size()] += out.prob.back();
    }
    return out;
}

/// Total prior mass over configurations with heights integrated against the
/// prior alone; equals 1 for a proper prior.
inline double prior_configuration_mass(std::size_t n, const ModelParams& p) {
    if (n == 0 || n > max_enumeration_n) throw std::invalid_argument("prior_configuration_mass: bad n");
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        const double c = static_cast<double>(std::popcount(mask));
        total += std::exp(c * std::log(p.q) + (static_cast<double>(n) - 1.0 - c) * std::log1p(-p.q));
    }
    return total;
}

// ---------------------------------------------------------------------------
// MCMC estimate of the changepoint-count posterior with batch-means errors.
// ---------------------------------------------------------------------------

struct CountEstimate {
    std::vector<double> mean;      // per count
    std::vector<double> mcse;      // batch-means Monte Carlo standard error
    std::uint64_t samples = 0;
    double seconds = 0.0;
};

inline CountEstimate estimate_count_posterior(const Dataset& data, const ModelParams& p, Variant v,
                                              std::uint64_t samples, std::uint64_t thin, std::uint64_t burnin,
                                              std::uint64_t seed, std::size_t batches = 50) {
    if (samples == 0 || batches == 0 || samples % batches != 0)
        throw std::invalid_argument("estimate_count_posterior: samples must be a positive multiple of batches");
    const std::size_t n = data.n();
    auto ctx = std::make_shared<const changepoint::ModelContext>(data, p, v);
    const auto sampler = changepoint::make_sampler(ctx);
    ChainConfig cfg{burnin + samples * thin, burnin, thin, seed};

    const std::uint64_t per_batch = samples / batches;
    std::vector<std::vector<double>> batch_hits(batches, std::vector<double>(n, 0.0));
    std::uint64_t taken = 0;
    TraceSink<ChangepointState> sink = [&](std::uint64_t, const ChangepointState& s) {
        batch_hits[taken / per_batch][s.count()] += 1.0;
        ++taken;
    };
    const auto t0 = std::chrono::steady_clock::now();
    run_chain_seeded(sampler, changepoint::initial_state(), cfg, sink);
    CountEstimate est;
    est.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    est.samples = taken;
    est.mean.assign(n, 0.0);
    est.mcse.assign(n, 0.0);
    const double b = static_cast<double>(batches);
    for (std::size_t c = 0; c < n; ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (const auto& hits : batch_hits) {
            const double m = hits[c] / static_cast<double>(per_batch);
            sum += m;
            sumsq += m * m;
        }
        est.mean[c] = sum / b;
        const double var = std::max(0.0, (sumsq - b * est.mean[c] * est.mean[c]) / (b - 1.0));
        est.mcse[c] = std::sqrt(var / b);
    }
    return est;
}

struct CountComparison {
    std::vector<double> exact;
    CountEstimate estimate;
    std::vector<double> z;  // |estimate - exact| / standard error
    double max_z = 0.0;
};

/// Compares the MCMC estimate with the exact count posterior. The standard
/// error is the batch-means estimate, floored by the iid binomial error under
/// the exact probability so that never-visited counts of negligible mass are
/// judged against a nonzero scale.
inline CountComparison compare_count_posterior(const Dataset& data, const ModelParams& p, Variant v,
                                               std::uint64_t samples, std::uint64_t thin, std::uint64_t burnin,
                                               std::uint64_t seed) {
    CountComparison out;
    out.exact = enumerate_changepoint_posterior(data, p).count_prob;
    out.estimate = estimate_count_posterior(data, p, v, samples, thin, burnin, seed);
    for (std::size_t c = 0; c < out.exact.size(); ++c) {
        const double pe = out.exact[c];
        const double floor = std::sqrt(pe * (1.0 - pe) / static_cast<double>(out.estimate.samples));
        const double se = std::max(out.estimate.mcse[c], floor);
        const double diff = std::fabs(out.estimate.mean[c] - pe);
        const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
        out.z.push_back(z);
        out.max_z = std::max(out.max_z, z);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discretized changepoint kernel: all configurations times a height grid.
// ---------------------------------------------------------------------------

/// Which birth/death ratio drives the grid kernel.
enum class DeathRatioForm { derived, printed };

struct ChangepointGrid {
    Dataset data;
    ModelParams params;
    std::vector<double> grid;
    std::vector<ChangepointState> states;
    FiniteFixture fixture;  // moves: death, birth, shift, adjust
};

namespace grid_detail {

inline bool state_less(const ChangepointState& a, const ChangepointState& b) {
    if (a.cps != b.cps) return a.cps < b.cps;
    return a.heights < b.heights;
}

}  // namespace grid_detail

/// Plain-variant kernel on a finite grid. The height prior and the birth and
/// death height proposals are N(0, height_prior_var) renormalized on the
/// grid; adjust proposes uniformly over the grid. All ratios cancel the grid
/// normalizer, so the continuous closed forms apply unchanged.
inline ChangepointGrid changepoint_grid_fixture(const Dataset& data, const ModelParams& p, std::vector<double> grid) {
    data.validate();
    p.validate();
    const std::size_t n = data.n();
    if (n < 2 || n > max_enumeration_n) throw std::invalid_argument("changepoint_grid_fixture: n must lie in 2..12");
    if (grid.empty()) throw std::invalid_argument("changepoint_grid_fixture: empty grid");
    // G (G + 1)^(n-1) states; the dense kernel must stay small.
    if (static_cast<double>(grid.size()) * std::pow(static_cast<double>(grid.size() + 1), static_cast<double>(n - 1)) > 4096.0)
        throw std::invalid_argument("changepoint_grid_fixture: grid too large for a dense kernel");
    const SegmentStats stats(data);

    ChangepointGrid g{data, p, std::move(grid), {}, {}};
    const std::size_t G = g.grid.size();
    std::vector<double> w(G);
    double wz = 0.0;
    for (std::size_t i = 0; i < G; ++i) wz += (w[i] = std::exp(log_normal_pdf(g.grid[i], 0.0, p.height_prior_var)));
    for (double& x : w) x /= wz;
    const double log_wz = std::log(wz);

    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> cps;
        for (std::size_t bit = 0; bit + 1 < n; ++bit)
            if (mask & (1u << bit)) cps.push_back(static_cast<int>(bit) + 2);
        const std::size_t segs = cps.size() + 1;
        std::vector<std::size_t> digit(segs, 0);
        for (;;) {
            ChangepointState s{cps, {}};
            for (auto d : digit) s.heights.push_back(g.grid[d]);
            g.states.push_back(std::move(s));
            std::size_t pos = 0;
            while (pos < segs && ++digit[pos] == G) digit[pos++] = 0;
            if (pos == segs) break;
        }
    }
    std::sort(g.states.begin(), g.states.end(), grid_detail::state_less);
    std::map<ChangepointState, std::size_t, decltype(&grid_detail::state_less)> index(grid_detail::state_less);
    for (std::size_t i = 0; i < g.states.size(); ++i) index.emplace(g.states[i], i);
    const std::size_t N = g.states.size();

    auto& f = g.fixture;
    f.name = "changepoint_grid_n" + std::to_string(n);
    std::vector<double> lw(N);
    double z = neg_inf;
    for (std::size_t i = 0; i < N; ++i) {
        const auto& s = g.states[i];
        lw[i] = changepoint::log_posterior(s, stats, p) - static_cast<double>(s.heights.size()) * log_wz;
        z = log_add_exp(z, lw[i]);
        f.states.push_back(changepoint::to_mixture_state(s));
    }
    for (double x : lw) f.target.push_back(std::exp(x - z));

    auto make = [N](const char* name, std::size_t rev) {
        FixtureMove m;
        m.name = name;
        m.reverse = MoveLabel{rev};
        m.kind = MoveKind::primal;
        m.move_prob.assign(N, 0.0);
        m.branches.assign(N, {});
        return m;
    };
    FixtureMove death = make("death", 1), birth = make("birth", 0), shift = make("shift", 2), adjust = make("adjust", 3);
    auto add = [](FixtureMove& m, std::size_t from, std::size_t to, double prob) {
        for (auto& b : m.branches[from])
            if (b.to == to) {
                b.prob += prob;
                return;
            }
        m.branches[from].push_back(Branch{to, prob, to, from});
    };

    for (std::size_t i = 0; i < N; ++i) {
        const auto& s = g.states[i];
        const auto sched = changepoint::move_schedule(s, n);
        death.move_prob[i] = sched.death;
        birth.move_prob[i] = sched.birth;
        shift.move_prob[i] = sched.shift;
        adjust.move_prob[i] = sched.adjust;
        const std::size_t m = s.count();
        if (sched.death > 0.0)
            for (std::size_t idx = 0; idx < m; ++idx)
                for (std::size_t gi = 0; gi < G; ++gi)
                    add(death, i, index.at(changepoint::with_death(s, idx, g.grid[gi])),
                        w[gi] / static_cast<double>(m));
        if (sched.birth > 0.0) {
            const std::size_t free = n - 1 - m;
            for (std::size_t r = 0; r < free; ++r) {
                const int pos = changepoint::detail::free_position(s.cps, r);
                for (std::size_t a = 0; a < G; ++a)
                    for (std::size_t b = 0; b < G; ++b)
                        add(birth, i, index.at(changepoint::with_birth(s, pos, g.grid[a], g.grid[b])),
                            w[a] * w[b] / static_cast<double>(free));
            }
        }
        if (sched.shift > 0.0)
            for (std::size_t idx = 0; idx < m; ++idx) {
                const auto sp = changepoint::split_at(s, idx, n);
                const double choices = static_cast<double>(sp.k - sp.l - 1);
                for (int j = sp.l + 1; j < sp.k; ++j) {
                    ChangepointState t = s;
                    t.cps[idx] = j;
                    add(shift, i, index.at(t), 1.0 / (static_cast<double>(m) * choices));
                }
            }
        for (std::size_t seg = 0; seg < s.heights.size(); ++seg)
            for (std::size_t gi = 0; gi < G; ++gi) {
                ChangepointState t = s;
                t.heights[seg] = g.grid[gi];
                add(adjust, i, index.at(t), 1.0 / (static_cast<double>(s.heights.size()) * static_cast<double>(G)));
            }
    }
    f.moves = {death, birth, shift, adjust};
    return g;
}

/// Acceptance rule evaluating the changepoint closed forms on grid states.
inline AcceptanceRule changepoint_grid_rule(std::shared_ptr<const ChangepointGrid> g, DeathRatioForm form) {
    auto stats = std::make_shared<const SegmentStats>(g->data);
    return [g, stats, form](const FiniteFixture&, std::size_t move, std::size_t from, const Branch& b) {
        const auto& s = g->states[from];
        const auto& t = g->states[b.to];
        const auto& p = g->params;
        auto death = [&](const ChangepointState& x, std::size_t idx, double h) {
            return form == DeathRatioForm::derived
                       ? changepoint::death_log_ratio(Variant::plain, x, idx, h, *stats, p)
                       : changepoint::printed_death_log_ratio(Variant::plain, x, idx, h, *stats, p);
        };
        double r = neg_inf;
        switch (static_cast<changepoint::MoveType>(move)) {
            case changepoint::MoveType::death: {
                const std::size_t idx = changepoint::detail::first_difference(s.cps, t.cps);
                r = death(s, idx, t.heights[idx]);
                break;
            }
            case changepoint::MoveType::birth: {
                const std::size_t idx = changepoint::detail::first_difference(s.cps, t.cps);
                r = -death(t, idx, s.heights[idx]);
                break;
            }
            case changepoint::MoveType::shift: {
                const std::size_t idx = changepoint::detail::first_difference(s.cps, t.cps);
                r = changepoint::shift_ratio(s, idx, s.cps[idx], t.cps[idx], *stats, p);
                break;
            }
            case changepoint::MoveType::adjust: {
                std::size_t seg = 0;
                while (s.heights[seg] == t.heights[seg]) ++seg;
                r = changepoint::adjust_ratio(s, seg, s.heights[seg], t.heights[seg], *stats, p);
                break;
            }
        }
        return accept_prob_from_log_ratio(r);
    };
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_ENUMERATION_HPP
