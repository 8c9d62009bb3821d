#ifndef TDMH_VALIDATION_FIXTURE_HPP
#define TDMH_VALIDATION_FIXTURE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmh/acceptance.hpp"
#include "tdmh/log_math.hpp"
#include "tdmh/mixture.hpp"

namespace tdmh::validation {

/// One auxiliary outcome of a move at a given state. `aux` identifies the
/// auxiliary point u', `to` the resulting state and `reverse_aux` the point
/// u of the reverse move that maps back. Kernel moves use aux = to and
/// reverse_aux = from.
struct Branch {
    std::size_t aux = 0;
    double prob = 0.0;
    std::size_t to = 0;
    std::size_t reverse_aux = 0;
};

struct FixtureMove {
    std::string name;
    MoveLabel reverse;
    MoveKind kind = MoveKind::primal;
    std::vector<double> move_prob;                  // per state
    std::vector<std::vector<Branch>> branches;      // per state
    std::vector<std::size_t> translation;           // adhoc: anchor state per state
    std::vector<std::vector<double>> kernel;        // adhoc: kernel rows indexed by anchor
    std::vector<std::size_t> fiber;                 // mwg: fiber key per state
};

/// A finite mixture target with explicit proposal tables.
struct FiniteFixture {
    std::string name;
    std::vector<MixtureState> states;
    std::vector<double> target;
    std::vector<FixtureMove> moves;

    std::size_t size() const { return states.size(); }

    const Branch* find_branch(std::size_t move, std::size_t from, std::size_t aux) const {
        for (const auto& b : moves[move].branches[from])
            if (b.aux == aux) return &b;
        return nullptr;
    }

    /// Total proposal mass that move `move` sends from `from` to `to`.
    double kernel_mass(std::size_t move, std::size_t from, std::size_t to) const {
        double acc = 0.0;
        for (const auto& b : moves[move].branches[from])
            if (b.to == to) acc += b.prob;
        return acc;
    }

    /// Throws std::invalid_argument describing the first broken invariant.
    void validate() const {
        const std::size_t n = states.size();
        auto fail = [this](const std::string& what) {
            throw std::invalid_argument("fixture '" + name + "': " + what);
        };
        if (n == 0) fail("no states");
        if (target.size() != n) fail("target size differs from state count");
        double total = 0.0;
        for (double p : target) {
            if (!(p >= 0.0)) fail("negative target weight");
            total += p;
        }
        if (std::fabs(total - 1.0) > 1e-12) fail("target does not sum to one");
        if (moves.empty()) fail("no moves");

        for (std::size_t l = 0; l < moves.size(); ++l) {
            const auto& m = moves[l];
            if (m.reverse.value >= moves.size()) fail("move '" + m.name + "' has an unregistered reverse");
            if (moves[m.reverse.value].reverse.value != l) fail("reverse map is not an involution at '" + m.name + "'");
            if (moves[m.reverse.value].kind != m.kind) fail("move '" + m.name + "' and its reverse differ in kind");
            if (m.move_prob.size() != n || m.branches.size() != n) fail("move '" + m.name + "' tables have wrong size");
            if (m.kind == MoveKind::mwg && (m.fiber.size() != n || m.reverse.value != l))
                fail("mwg move '" + m.name + "' needs a fiber key per state and must be its own reverse");
            if (m.kind == MoveKind::adhoc) {
                if (m.translation.size() != n || m.kernel.size() != n)
                    fail("adhoc move '" + m.name + "' needs a translation and kernel table");
            }
            for (std::size_t s = 0; s < n; ++s) {
                if (!(m.move_prob[s] >= 0.0 && m.move_prob[s] <= 1.0)) fail("move probability outside [0,1]");
                if (m.move_prob[s] == 0.0) continue;
                double row = 0.0;
                for (const auto& b : m.branches[s]) {
                    if (b.to >= n) fail("branch destination out of range in '" + m.name + "'");
                    if (!(b.prob >= 0.0)) fail("negative proposal probability in '" + m.name + "'");
                    row += b.prob;
                }
                if (std::fabs(row - 1.0) > 1e-12)
                    fail("proposal row of '" + m.name + "' at state " + std::to_string(s) + " is not stochastic");
                if (m.kind == MoveKind::adhoc) {
                    const std::size_t anchor = m.translation[s];
                    if (anchor >= n || m.kernel[anchor].size() != n) fail("adhoc move '" + m.name + "' has a bad anchor");
                    for (std::size_t t = 0; t < n; ++t)
                        if (std::fabs(kernel_mass(l, s, t) - m.kernel[anchor][t]) > 1e-15)
                            fail("adhoc move '" + m.name + "' branches disagree with its translated kernel");
                }
                for (std::size_t i = 0; i < m.branches[s].size(); ++i)
                    for (std::size_t j = i + 1; j < m.branches[s].size(); ++j)
                        if (m.branches[s][i].aux == m.branches[s][j].aux) fail("duplicate auxiliary id in '" + m.name + "'");
            }
        }
        for (std::size_t s = 0; s < n; ++s) {
            double beta = 0.0;
            for (const auto& m : moves) beta += m.move_prob[s];
            if (std::fabs(beta - 1.0) > 1e-12) fail("move probabilities at state " + std::to_string(s) + " do not sum to one");
        }
        // Inverse pairing: a reverse branch, when it exists, maps back.
        for (std::size_t l = 0; l < moves.size(); ++l) {
            const std::size_t r = moves[l].reverse.value;
            for (std::size_t s = 0; s < n; ++s) {
                for (const auto& b : moves[l].branches[s]) {
                    const Branch* back = find_branch(r, b.to, b.reverse_aux);
                    if (back && (back->to != s || back->reverse_aux != b.aux))
                        fail("transform of '" + moves[l].name + "' is not inverted by its reverse");
                }
            }
        }
    }
};

/// Acceptance probability of one branch of move `move` at state `from`.
using AcceptanceRule = std::function<double(const FiniteFixture&, std::size_t move, std::size_t from, const Branch&)>;

// ---------------------------------------------------------------------------
// Adapters from fixture tables to the generic components, so that every rule
// below runs the library's ratio evaluators rather than a re-derivation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::function<double(const std::size_t&)> log_target(const FiniteFixture& f) {
    return [&f](const std::size_t& s) { return f.target[s] > 0.0 ? std::log(f.target[s]) : neg_inf; };
}

inline double log_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : neg_inf; }

inline std::vector<KernelMove<std::size_t>> kernel_moves(const FiniteFixture& f, bool with_move_prob = true) {
    std::vector<KernelMove<std::size_t>> out;
    for (std::size_t l = 0; l < f.moves.size(); ++l) {
        KernelMove<std::size_t> k;
        k.reverse = f.moves[l].reverse;
        if (with_move_prob)
            k.move_prob = [&f, l](const std::size_t& s) { return f.moves[l].move_prob[s]; };
        else
            k.move_prob = [](const std::size_t&) { return 1.0; };
        k.log_kernel = [&f, l](const std::size_t& a, const std::size_t& b) {
            return log_or_neg_inf(f.kernel_mass(l, a, b));
        };
        out.push_back(std::move(k));
    }
    return out;
}

inline std::vector<KernelMove<std::size_t>> adhoc_moves(const FiniteFixture& f) {
    std::vector<KernelMove<std::size_t>> out;
    for (std::size_t l = 0; l < f.moves.size(); ++l) {
        KernelMove<std::size_t> k;
        k.reverse = f.moves[l].reverse;
        k.move_prob = [&f, l](const std::size_t& s) { return f.moves[l].move_prob[s]; };
        k.translate = [&f, l](const std::size_t& s) { return f.moves[l].translation[s]; };
        k.log_kernel = [&f, l](const std::size_t& anchor, const std::size_t& to) {
            return log_or_neg_inf(f.moves[l].kernel[anchor][to]);
        };
        out.push_back(std::move(k));
    }
    return out;
}

inline std::size_t aux_id(std::span<const double> u) { return static_cast<std::size_t>(u[0]); }

inline std::vector<AuxMove<std::size_t>> aux_moves(const FiniteFixture& f) {
    std::vector<AuxMove<std::size_t>> out;
    for (std::size_t l = 0; l < f.moves.size(); ++l) {
        AuxMove<std::size_t> a;
        a.reverse = f.moves[l].reverse;
        a.move_prob = [&f, l](const std::size_t& s) { return f.moves[l].move_prob[s]; };
        a.log_aux_density = [&f, l](const std::size_t& s, std::span<const double> u) {
            const Branch* b = f.find_branch(l, s, aux_id(u));
            return b ? log_or_neg_inf(b->prob) : neg_inf;
        };
        a.transform = [&f, l](const std::size_t& s, std::span<const double> u) {
            const Branch* b = f.find_branch(l, s, aux_id(u));
            if (!b) throw std::logic_error("fixture: transform evaluated outside the auxiliary support");
            return AuxImage<std::size_t>{b->to, {static_cast<double>(b->reverse_aux)}};
        };
        a.aux_support = [&f, l](const std::size_t& s) {
            std::vector<std::vector<double>> us;
            for (const auto& b : f.moves[l].branches[s]) us.push_back({static_cast<double>(b.aux)});
            return us;
        };
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace detail

/// Pairwise mixture acceptance with the marginal kernels of each move.
inline double mixture_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto moves = detail::kernel_moves(f);
    return accept_prob_mixture(detail::log_target(f), std::span<const KernelMove<std::size_t>>(moves), MoveLabel{move},
                               from, b.to);
}

/// Ad-hoc acceptance using the move's translation and kernel tables.
inline double adhoc_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto moves = detail::adhoc_moves(f);
    return accept_prob_adhoc(detail::log_target(f), std::span<const KernelMove<std::size_t>>(moves), MoveLabel{move},
                             from, b.to);
}

/// Post-hoc acceptance evaluated in the auxiliary space (counting measures,
/// so the correction factor is 1).
inline double aux_space_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto moves = detail::aux_moves(f);
    const double u[1] = {static_cast<double>(b.aux)};
    return accept_prob_posthoc(detail::log_target(f), std::span<const AuxMove<std::size_t>>(moves), MoveLabel{move},
                               from, std::span<const double>(u));
}

/// Post-hoc acceptance for discrete spaces evaluated in the state space, with
/// the proposal masses summed over the auxiliary points.
inline double posthoc_discrete_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto moves = detail::aux_moves(f);
    return accept_prob_posthoc_discrete(detail::log_target(f), std::span<const AuxMove<std::size_t>>(moves),
                                        MoveLabel{move}, from, b.to);
}

/// Metropolis-within-Gibbs acceptance with the conditional target on the
/// move's fiber.
inline double mwg_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto& m = f.moves[move];
    auto log_conditional = [&f, &m](const std::size_t& s) {
        double z = 0.0;
        for (std::size_t t = 0; t < f.size(); ++t)
            if (m.fiber[t] == m.fiber[s]) z += f.target[t];
        return detail::log_or_neg_inf(f.target[s]) - std::log(z);
    };
    auto log_q = [&f, move](const std::size_t& a, const std::size_t& c) {
        return detail::log_or_neg_inf(f.kernel_mass(move, a, c));
    };
    auto beta = [&m](const std::size_t& s) { return m.move_prob[s]; };
    auto same_fiber = [&m](const std::size_t& a, const std::size_t& c) { return m.fiber[a] == m.fiber[c]; };
    return accept_prob_mwg(log_conditional, log_q, beta, same_fiber, from, b.to);
}

/// Mwg acceptance with the full joint target in place of the conditional.
inline double mwg_joint_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto& m = f.moves[move];
    auto log_q = [&f, move](const std::size_t& a, const std::size_t& c) {
        return detail::log_or_neg_inf(f.kernel_mass(move, a, c));
    };
    auto beta = [&m](const std::size_t& s) { return m.move_prob[s]; };
    auto same_fiber = [&m](const std::size_t& a, const std::size_t& c) { return m.fiber[a] == m.fiber[c]; };
    return accept_prob_mwg(detail::log_target(f), log_q, beta, same_fiber, from, b.to);
}

/// Rule selected by each move's kind.
inline double kind_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    switch (f.moves[move].kind) {
        case MoveKind::primal: return mixture_acceptance(f, move, from, b);
        case MoveKind::adhoc: return adhoc_acceptance(f, move, from, b);
        case MoveKind::posthoc: return aux_space_acceptance(f, move, from, b);
        case MoveKind::mwg: return mwg_acceptance(f, move, from, b);
    }
    return 0.0;
}

/// Total proposal mass Q(s', s) of the whole mixture proposal.
inline double mixture_mass(const FiniteFixture& f, std::size_t from, std::size_t to) {
    double q = 0.0;
    for (std::size_t l = 0; l < f.moves.size(); ++l) q += f.moves[l].move_prob[from] * f.kernel_mass(l, from, to);
    return q;
}

/// Acceptance of the maximal algorithm: the primal ratio applied to the
/// mixture proposal as a whole.
inline double maximal_acceptance(const FiniteFixture& f, std::size_t from, std::size_t to) {
    auto log_q = [&f](const std::size_t& a, const std::size_t& c) { return detail::log_or_neg_inf(mixture_mass(f, a, c)); };
    return accept_prob_primal(detail::log_target(f), log_q, from, to);
}

inline double maximal_rule(const FiniteFixture& f, std::size_t, std::size_t from, const Branch& b) {
    return maximal_acceptance(f, from, b.to);
}

/// Negative control: the pairwise mixture ratio with the move probabilities
/// dropped.
inline double corrupted_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, const Branch& b) {
    const auto moves = detail::kernel_moves(f, false);
    return accept_prob_mixture(detail::log_target(f), std::span<const KernelMove<std::size_t>>(moves), MoveLabel{move},
                               from, b.to);
}

/// Conditional-expectation form of the post-hoc acceptance for move `move`:
/// min{1, E[r(s', U) | transform(s', U) = s]} with U ~ q(s', .).
inline double expectation_acceptance(const FiniteFixture& f, std::size_t move, std::size_t from, std::size_t to) {
    const auto& m = f.moves[move];
    const auto& rev = f.moves[m.reverse.value];
    double weighted = 0.0, mass = 0.0;
    for (const auto& b : m.branches[from]) {
        if (b.to != to || b.prob <= 0.0) continue;
        const Branch* back = f.find_branch(m.reverse.value, to, b.reverse_aux);
        const double back_prob = back ? back->prob : 0.0;
        const double r = f.target[to] * back_prob * rev.move_prob[to] / (f.target[from] * b.prob * m.move_prob[from]);
        weighted += b.prob * r;
        mass += b.prob;
    }
    if (mass <= 0.0) return 0.0;
    return std::min(1.0, weighted / mass);
}

// ---------------------------------------------------------------------------
// Transition matrices and balance checks.
// ---------------------------------------------------------------------------

/// Full Metropolis-Hastings transition matrix, rejection mass on the
/// diagonal. Validates the fixture first.
inline Eigen::MatrixXd assemble_kernel(const FiniteFixture& f, const AcceptanceRule& rule) {
    f.validate();
    const auto n = static_cast<Eigen::Index>(f.size());
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t l = 0; l < f.moves.size(); ++l) {
        const auto& m = f.moves[l];
        for (std::size_t s = 0; s < f.size(); ++s) {
            if (m.move_prob[s] == 0.0) continue;
            for (const auto& b : m.branches[s]) {
                if (b.to == s || b.prob == 0.0) continue;
                const double a = rule(f, l, s, b);
                if (!(a >= 0.0 && a <= 1.0)) throw std::logic_error("acceptance outside [0,1] in '" + m.name + "'");
                mu(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(b.to)) += m.move_prob[s] * b.prob * a;
            }
        }
    }
    for (Eigen::Index s = 0; s < n; ++s) {
        const double off = mu.row(s).sum() - mu(s, s);
        mu(s, s) = 1.0 - off;
    }
    return mu;
}

struct BalanceReport {
    double max_residual = 0.0;
    std::pair<std::size_t, std::size_t> worst_pair{0, 0};
    double stationary_check = 0.0;  // sup-norm of pi * mu - pi
};

inline BalanceReport check_detailed_balance(const FiniteFixture& f, const Eigen::MatrixXd& mu) {
    const auto n = static_cast<Eigen::Index>(f.size());
    if (mu.rows() != n || mu.cols() != n) throw std::invalid_argument("check_detailed_balance: matrix size mismatch");
    BalanceReport rep;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double r = std::fabs(f.target[static_cast<std::size_t>(a)] * mu(a, b) -
                                       f.target[static_cast<std::size_t>(b)] * mu(b, a));
            if (r > rep.max_residual) {
                rep.max_residual = r;
                rep.worst_pair = {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
            }
        }
    }
    const Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(f.target.data(), n);
    rep.stationary_check = (mu.transpose() * pi - pi).cwiseAbs().maxCoeff();
    return rep;
}

inline BalanceReport check_detailed_balance(const FiniteFixture& f, const AcceptanceRule& rule) {
    return check_detailed_balance(f, assemble_kernel(f, rule));
}

/// Per-transition acceptance of a pairwise rule, averaged over moves and
/// auxiliary points, next to the maximal acceptance.
struct AcceptanceComparison {
    std::size_t from = 0;
    std::size_t to = 0;
    double pairwise = 0.0;
    double maximal = 0.0;
};

struct ComparisonSummary {
    std::vector<AcceptanceComparison> transitions;
    double max_excess = 0.0;     // max(pairwise - maximal)
    double max_abs_diff = 0.0;

    bool dominated(double tol = 1e-12) const { return max_excess <= tol; }
    bool equal(double tol = 1e-12) const { return max_abs_diff <= tol; }
};

inline ComparisonSummary compare_pairwise_vs_maximal(const FiniteFixture& f,
                                                     const AcceptanceRule& rule = kind_acceptance) {
    const Eigen::MatrixXd mu = assemble_kernel(f, rule);
    ComparisonSummary out;
    for (std::size_t s = 0; s < f.size(); ++s) {
        for (std::size_t t = 0; t < f.size(); ++t) {
            if (s == t) continue;
            const double q = mixture_mass(f, s, t);
            if (q <= 0.0) continue;
            AcceptanceComparison c{s, t, mu(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) / q,
                                   maximal_acceptance(f, s, t)};
            out.max_excess = std::max(out.max_excess, c.pairwise - c.maximal);
            out.max_abs_diff = std::max(out.max_abs_diff, std::fabs(c.pairwise - c.maximal));
            out.transitions.push_back(c);
        }
    }
    return out;
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_FIXTURE_HPP
