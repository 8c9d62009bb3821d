#ifndef TDMH_VALIDATION_FIXTURES_HPP
#define TDMH_VALIDATION_FIXTURES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "tdmh/validation/fixture.hpp"

namespace tdmh::validation {

namespace build {

inline std::vector<double> normalized(std::vector<double> w) {
    double z = 0.0;
    for (double v : w) z += v;
    for (double& v : w) v /= z;
    return w;
}

inline MixtureState point(std::size_t space, std::vector<double> coords) {
    return MixtureState{SpaceId{space}, std::move(coords)};
}

inline FixtureMove move(std::string name, std::size_t reverse, MoveKind kind, std::size_t n) {
    FixtureMove m;
    m.name = std::move(name);
    m.reverse = MoveLabel{reverse};
    m.kind = kind;
    m.move_prob.assign(n, 0.0);
    m.branches.assign(n, {});
    return m;
}

/// Kernel-style branches: one per destination with positive mass.
inline void kernel_row(FixtureMove& m, std::size_t from, const std::vector<double>& row) {
    m.branches[from].clear();
    for (std::size_t t = 0; t < row.size(); ++t)
        if (row[t] > 0.0) m.branches[from].push_back(Branch{t, row[t], t, from});
}

inline void single(FixtureMove& m, std::size_t from, std::size_t to) {
    m.branches[from] = {Branch{to, 1.0, to, from}};
}

/// Ad-hoc move whose branches are the translated kernel rows.
inline void adhoc_tables(FixtureMove& m, std::vector<std::size_t> translation, std::vector<std::vector<double>> kernel) {
    m.translation = std::move(translation);
    m.kernel = std::move(kernel);
    for (std::size_t s = 0; s < m.translation.size(); ++s) kernel_row(m, s, m.kernel[m.translation[s]]);
}

}  // namespace build

/// p = (0.5, 0.3, 0.2) with a uniform proposal over all three states.
inline FiniteFixture primal_three_state() {
    FiniteFixture f;
    f.name = "primal_three_state";
    for (std::size_t i = 0; i < 3; ++i) f.states.push_back(build::point(0, {static_cast<double>(i)}));
    f.target = {0.5, 0.3, 0.2};
    auto m = build::move("uniform", 0, MoveKind::primal, 3);
    for (std::size_t s = 0; s < 3; ++s) {
        m.move_prob[s] = 1.0;
        build::kernel_row(m, s, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    }
    f.moves = {m};
    return f;
}

/// Space A = {a}, space B = {b}, p = (0.7, 0.3), deterministic jumps.
inline FiniteFixture two_space_toy() {
    FiniteFixture f;
    f.name = "two_space_toy";
    f.states = {build::point(0, {}), build::point(1, {})};
    f.target = {0.7, 0.3};
    auto ab = build::move("jump_ab", 1, MoveKind::primal, 2);
    auto ba = build::move("jump_ba", 0, MoveKind::primal, 2);
    ab.move_prob = {1.0, 0.0};
    ba.move_prob = {0.0, 1.0};
    build::single(ab, 0, 1);
    build::single(ba, 1, 0);
    f.moves = {ab, ba};
    return f;
}

/// Four states over two spaces, p = (0.1, 0.2, 0.3, 0.4), with up/down moves
/// under state-dependent move probabilities plus an overlapping local move.
inline FiniteFixture mixture_four_state() {
    FiniteFixture f;
    f.name = "mixture_four_state";
    f.states = {build::point(0, {0.0}), build::point(0, {1.0}), build::point(1, {0.0, 0.0}),
                build::point(1, {1.0, 0.0})};
    f.target = {0.1, 0.2, 0.3, 0.4};
    auto up = build::move("up", 1, MoveKind::primal, 4);
    auto down = build::move("down", 0, MoveKind::primal, 4);
    auto local = build::move("local", 2, MoveKind::primal, 4);
    up.move_prob = {0.5, 0.2, 0.4, 0.3};
    down.move_prob = {0.2, 0.5, 0.1, 0.4};
    local.move_prob = {0.3, 0.3, 0.5, 0.3};
    const std::vector<std::vector<double>> local_rows = {
        {0.1, 0.4, 0.3, 0.2}, {0.25, 0.25, 0.25, 0.25}, {0.6, 0.1, 0.1, 0.2}, {0.05, 0.15, 0.5, 0.3}};
    for (std::size_t s = 0; s < 4; ++s) {
        std::vector<double> u(4, 0.0), d(4, 0.0);
        u[(s + 1) % 4] = 0.7;
        u[(s + 2) % 4] = 0.3;
        d[(s + 3) % 4] = 0.7;
        d[(s + 2) % 4] = 0.3;
        build::kernel_row(up, s, u);
        build::kernel_row(down, s, d);
        build::kernel_row(local, s, local_rows[s]);
    }
    f.moves = {up, down, local};
    return f;
}

/// Three states in space 0 and four in space 1. Between-space moves propose
/// around a translated image of the current state.
inline FiniteFixture adhoc_translation() {
    constexpr std::size_t n = 7;
    FiniteFixture f;
    f.name = "adhoc_translation";
    for (std::size_t i = 0; i < 3; ++i) f.states.push_back(build::point(0, {static_cast<double>(i)}));
    for (std::size_t j = 0; j < 4; ++j) f.states.push_back(build::point(1, {static_cast<double>(j), 1.0}));
    f.target = build::normalized({3.0, 1.0, 2.0, 1.5, 0.5, 2.5, 1.0});

    std::vector<std::vector<double>> kernel(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < 3; ++a)  // anchors in space 0
        for (std::size_t t = 0; t < 3; ++t) kernel[a][t] = t == a ? 0.6 : 0.2;
    for (std::size_t a = 0; a < 4; ++a) {  // anchors in space 1: ring of four
        kernel[3 + a][3 + a] = 0.5;
        kernel[3 + a][3 + (a + 1) % 4] = 0.3;
        kernel[3 + a][3 + (a + 3) % 4] = 0.2;
    }
    auto lift = build::move("lift", 1, MoveKind::adhoc, n);
    auto drop = build::move("drop", 0, MoveKind::adhoc, n);
    auto wander0 = build::move("wander0", 2, MoveKind::adhoc, n);
    auto wander1 = build::move("wander1", 3, MoveKind::adhoc, n);
    std::vector<std::size_t> lift_t(n), drop_t(n), id(n);
    for (std::size_t s = 0; s < n; ++s) {
        id[s] = s;
        lift_t[s] = s < 3 ? 3 + s : s;
        drop_t[s] = s < 3 ? s : std::min<std::size_t>(s - 3, 2);
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (s < 3) {
            lift.move_prob[s] = 0.6;
            wander0.move_prob[s] = 0.4;
        } else {
            drop.move_prob[s] = s == 4 ? 0.3 : 0.5;
            wander1.move_prob[s] = 1.0 - drop.move_prob[s];
        }
    }
    build::adhoc_tables(lift, lift_t, kernel);
    build::adhoc_tables(drop, drop_t, kernel);
    build::adhoc_tables(wander0, id, kernel);
    build::adhoc_tables(wander1, id, kernel);
    // Rows where the move is never chosen stay empty.
    for (auto* m : {&lift, &drop, &wander0, &wander1})
        for (std::size_t s = 0; s < n; ++s)
            if (m->move_prob[s] == 0.0) m->branches[s].clear();
    f.moves = {lift, drop, wander0, wander1};
    return f;
}

/// Post-hoc moves on four discrete states with a two-valued auxiliary draw:
/// fwd maps (s, u) to s+1+u, bwd maps (s, u) to s-1-u (mod 4).
inline FiniteFixture posthoc_discrete_four() {
    FiniteFixture f;
    f.name = "posthoc_discrete_four";
    for (std::size_t i = 0; i < 4; ++i) f.states.push_back(build::point(0, {static_cast<double>(i)}));
    f.target = {0.1, 0.2, 0.3, 0.4};
    auto fwd = build::move("fwd", 1, MoveKind::posthoc, 4);
    auto bwd = build::move("bwd", 0, MoveKind::posthoc, 4);
    fwd.move_prob = {0.5, 0.6, 0.4, 0.5};
    for (std::size_t s = 0; s < 4; ++s) {
        bwd.move_prob[s] = 1.0 - fwd.move_prob[s];
        const double qf = 0.3 + 0.1 * static_cast<double>(s);
        const double qb = s % 2 == 0 ? 0.6 : 0.25;
        fwd.branches[s] = {Branch{0, qf, (s + 1) % 4, 0}, Branch{1, 1.0 - qf, (s + 2) % 4, 1}};
        bwd.branches[s] = {Branch{0, qb, (s + 3) % 4, 0}, Branch{1, 1.0 - qb, (s + 2) % 4, 1}};
    }
    f.moves = {fwd, bwd};
    return f;
}

/// 3x3 grid with coordinate-wise Metropolis-within-Gibbs updates.
inline FiniteFixture mwg_grid() {
    FiniteFixture f;
    f.name = "mwg_grid";
    std::vector<double> w;
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = 0; y < 3; ++y) {
            f.states.push_back(build::point(0, {static_cast<double>(x), static_cast<double>(y)}));
            w.push_back(1.0 + static_cast<double>(x) + 2.0 * static_cast<double>(y) + static_cast<double>((x * y) % 2));
        }
    f.target = build::normalized(w);
    auto xu = build::move("x_update", 0, MoveKind::mwg, 9);
    auto yu = build::move("y_update", 1, MoveKind::mwg, 9);
    xu.fiber.resize(9);
    yu.fiber.resize(9);
    const std::vector<double> base = {0.2, 0.5, 0.3};
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = 0; y < 3; ++y) {
            const std::size_t s = 3 * x + y;
            xu.fiber[s] = y;
            yu.fiber[s] = x;
            xu.move_prob[s] = 0.4 + 0.1 * static_cast<double>(x);
            yu.move_prob[s] = 1.0 - xu.move_prob[s];
            std::vector<double> rx(9, 0.0), ry(9, 0.0);
            for (std::size_t k = 0; k < 3; ++k) {
                rx[3 * ((x + k) % 3) + y] = base[k];
                ry[3 * x + (y + k) % 3] = base[(k + y) % 3];
            }
            build::kernel_row(xu, s, rx);
            build::kernel_row(yu, s, ry);
        }
    f.moves = {xu, yu};
    return f;
}

namespace detail {

inline constexpr std::size_t sdt_pairs = 9;  // (a, b) in {0,1,2}^2, index 3a+b
inline std::size_t sdt_pair(std::size_t a, std::size_t b) { return 3 * a + b; }
inline std::size_t sdt_sum(std::size_t t) { return sdt_pairs + t; }  // t in 0..4

inline std::vector<double> sdt_target() {
    std::vector<double> w;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) w.push_back(1.0 + static_cast<double>((2 * a + 5 * b) % 4));
    for (double v : {2.0, 3.5, 1.0, 4.0, 2.5}) w.push_back(v);
    return build::normalized(w);
}

inline std::vector<MixtureState> sdt_states() {
    std::vector<MixtureState> s;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) s.push_back(build::point(1, {static_cast<double>(a), static_cast<double>(b)}));
    for (std::size_t t = 0; t < 5; ++t) s.push_back(build::point(0, {static_cast<double>(t)}));
    return s;
}

/// Split probabilities over the admissible first components a of t = a + b.
inline std::vector<std::pair<std::size_t, double>> sdt_split(std::size_t t) {
    const std::size_t lo = t > 2 ? t - 2 : 0, hi = std::min<std::size_t>(t, 2);
    std::vector<std::pair<std::size_t, double>> out;
    double z = 0.0;
    for (std::size_t a = lo; a <= hi; ++a) z += 1.0 + static_cast<double>(a);
    for (std::size_t a = lo; a <= hi; ++a) out.emplace_back(a, (1.0 + static_cast<double>(a)) / z);
    return out;
}

}  // namespace detail

/// Semi-deterministic translation between S' = {(a,b)} and S = {a+b}: merge
/// is deterministic, split draws the first component. With `extra_moves` the
/// chain also swaps pairs and steps around the sums, so every move has
/// state-dependent probabilities.
inline FiniteFixture sdt_injective(bool extra_moves = true) {
    constexpr std::size_t n = 14;
    FiniteFixture f;
    f.name = extra_moves ? "sdt_injective" : "sdt_injective_bare";
    f.states = detail::sdt_states();
    f.target = detail::sdt_target();
    auto merge = build::move("merge", 1, MoveKind::posthoc, n);
    auto split = build::move("split", 0, MoveKind::posthoc, n);
    auto swap = build::move("swap", 2, MoveKind::posthoc, n);
    auto stepm = build::move("step", 3, MoveKind::posthoc, n);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            const std::size_t s = detail::sdt_pair(a, b);
            merge.move_prob[s] = extra_moves ? 0.6 : 1.0;
            swap.move_prob[s] = 1.0 - merge.move_prob[s];
            merge.branches[s] = {Branch{0, 1.0, detail::sdt_sum(a + b), a}};
            if (extra_moves) swap.branches[s] = {Branch{0, 1.0, detail::sdt_pair(b, a), 0}};
        }
    for (std::size_t t = 0; t < 5; ++t) {
        const std::size_t s = detail::sdt_sum(t);
        split.move_prob[s] = extra_moves ? 0.7 : 1.0;
        stepm.move_prob[s] = 1.0 - split.move_prob[s];
        for (auto [a, q] : detail::sdt_split(t)) split.branches[s].push_back(Branch{a, q, detail::sdt_pair(a, t - a), 0});
        if (extra_moves)
            stepm.branches[s] = {Branch{0, 0.35, detail::sdt_sum((t + 1) % 5), 1},
                                 Branch{1, 0.65, detail::sdt_sum((t + 4) % 5), 0}};
    }
    f.moves = {merge, split};
    if (extra_moves) {
        f.moves.push_back(swap);
        f.moves.push_back(stepm);
    }
    return f;
}

/// The bare SDT written as one Metropolis-within-Gibbs move on the fibers
/// {t} u {(a,b) : a + b = t}.
inline FiniteFixture sdt_mwg() {
    constexpr std::size_t n = 14;
    FiniteFixture f;
    f.name = "sdt_mwg";
    f.states = detail::sdt_states();
    f.target = detail::sdt_target();
    auto m = build::move("sdt", 0, MoveKind::mwg, n);
    m.fiber.resize(n);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            const std::size_t s = detail::sdt_pair(a, b);
            m.move_prob[s] = 1.0;
            m.fiber[s] = a + b;
            build::single(m, s, detail::sdt_sum(a + b));
        }
    for (std::size_t t = 0; t < 5; ++t) {
        const std::size_t s = detail::sdt_sum(t);
        m.move_prob[s] = 1.0;
        m.fiber[s] = t;
        std::vector<double> row(n, 0.0);
        for (auto [a, q] : detail::sdt_split(t)) row[detail::sdt_pair(a, t - a)] = q;
        build::kernel_row(m, s, row);
    }
    f.moves = {m};
    return f;
}

/// Ring Z_5 with one self-reverse post-hoc move. Auxiliary u in {0,1,2,3}
/// shifts by (+1, +1, -1, -1) and pairs with u^ = (2, 3, 0, 1), so the map
/// u -> transform(s, u) is two-to-one.
inline FiniteFixture posthoc_non_injective() {
    FiniteFixture f;
    f.name = "posthoc_non_injective";
    for (std::size_t i = 0; i < 5; ++i) f.states.push_back(build::point(0, {static_cast<double>(i)}));
    f.target = build::normalized({1.0, 2.0, 3.0, 4.0, 5.0});
    auto m = build::move("jiggle", 0, MoveKind::posthoc, 5);
    const std::size_t shift[4] = {1, 1, 4, 4};
    const std::size_t pair[4] = {2, 3, 0, 1};
    const double q[4] = {0.1, 0.2, 0.3, 0.4};
    for (std::size_t s = 0; s < 5; ++s) {
        m.move_prob[s] = 1.0;
        for (std::size_t u = 0; u < 4; ++u) m.branches[s].push_back(Branch{u, q[(u + s) % 4], (s + shift[u]) % 5, pair[u]});
    }
    f.moves = {m};
    return f;
}

/// Ring of six with clockwise and counter-clockwise moves whose supports are
/// disjoint.
inline FiniteFixture disjoint_ring() {
    FiniteFixture f;
    f.name = "disjoint_ring";
    for (std::size_t i = 0; i < 6; ++i) f.states.push_back(build::point(0, {static_cast<double>(i)}));
    f.target = build::normalized({1.0, 4.0, 2.0, 5.0, 3.0, 1.5});
    auto cw = build::move("cw", 1, MoveKind::primal, 6);
    auto ccw = build::move("ccw", 0, MoveKind::primal, 6);
    for (std::size_t s = 0; s < 6; ++s) {
        cw.move_prob[s] = 0.3 + 0.08 * static_cast<double>(s);
        ccw.move_prob[s] = 1.0 - cw.move_prob[s];
        std::vector<double> a(6, 0.0), b(6, 0.0);
        a[(s + 1) % 6] = 0.8;
        a[(s + 2) % 6] = 0.2;
        b[(s + 5) % 6] = 0.6;
        b[(s + 4) % 6] = 0.4;
        build::kernel_row(cw, s, a);
        build::kernel_row(ccw, s, b);
    }
    f.moves = {cw, ccw};
    return f;
}

/// Two self-reverse moves that propose the same transitions with different
/// densities.
inline FiniteFixture overlap_two_moves() {
    FiniteFixture f;
    f.name = "overlap_two_moves";
    for (std::size_t i = 0; i < 3; ++i) f.states.push_back(build::point(0, {static_cast<double>(i)}));
    f.target = {0.2, 0.5, 0.3};
    auto a = build::move("a", 0, MoveKind::primal, 3);
    auto b = build::move("b", 1, MoveKind::primal, 3);
    const std::vector<std::vector<double>> ra = {{0.1, 0.6, 0.3}, {0.2, 0.2, 0.6}, {0.5, 0.4, 0.1}};
    const std::vector<std::vector<double>> rb = {{0.4, 0.1, 0.5}, {0.7, 0.1, 0.2}, {0.1, 0.1, 0.8}};
    for (std::size_t s = 0; s < 3; ++s) {
        a.move_prob[s] = 0.5;
        b.move_prob[s] = 0.5;
        build::kernel_row(a, s, ra[s]);
        build::kernel_row(b, s, rb[s]);
    }
    f.moves = {a, b};
    return f;
}

/// All shipped finite fixtures.
inline std::vector<FiniteFixture> shipped_fixtures() {
    return {primal_three_state(), two_space_toy(),      mixture_four_state(),    adhoc_translation(),
            posthoc_discrete_four(), mwg_grid(),       sdt_injective(),         sdt_mwg(),
            posthoc_non_injective(), disjoint_ring(),  overlap_two_moves()};
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_FIXTURES_HPP
