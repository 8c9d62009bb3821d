// Two single-point spaces {a} and {b} with p(a) = 0.7, joined by a pair of
// deterministic jump moves. The chain should spend 70% of its time in a.

#include <cmath>
#include <cstdio>

#include "tdmh/acceptance.hpp"
#include "tdmh/chain.hpp"

int main() {
    using namespace tdmh;
    using State = int;  // 0 = a, 1 = b

    LogDensity<State> log_p = [](const State& s) { return std::log(s == 0 ? 0.7 : 0.3); };
    auto jump_prob = [](int from_space) { return [from_space](const State& s) { return s == from_space ? 1.0 : 0.0; }; };
    auto point_mass = [](int target) {
        return [target](const State&, const State& to) { return to == target ? 0.0 : neg_inf; };
    };
    std::vector<KernelMove<State>> components{
        {MoveLabel{1}, jump_prob(0), {}, point_mass(1)},
        {MoveLabel{0}, jump_prob(1), {}, point_mass(0)},
    };
    std::vector<StateSampler<State, Rng>> samplers{[](const State&, Rng&) { return 1; },
                                                   [](const State&, Rng&) { return 0; }};

    Sampler<State> sampler{log_p,
                           MoveSet<State, Rng>(make_kernel_moves<State, Rng>(MoveKind::primal, log_p, components,
                                                                            samplers, {"jump_ab", "jump_ba"})),
                           [](const State& s) { return s == 0 || s == 1; }};

    std::printf("accept(a->b) = %.6f (3/7 = %.6f)\n",
                accept_prob_mixture<State>(log_p, components, MoveLabel{0}, 0, 1), 3.0 / 7.0);

    std::uint64_t in_a = 0, kept = 0;
    ChainConfig cfg{1'000'000, 0, 1, 7};
    const auto report = run_chain_seeded<State>(sampler, 0, cfg, [&](std::uint64_t, const State& s) {
        in_a += s == 0;
        ++kept;
    });
    std::printf("frequency of a = %.4f over %llu steps\n", static_cast<double>(in_a) / kept,
                static_cast<unsigned long long>(kept));
    for (std::size_t i = 0; i < report.move_names.size(); ++i)
        std::printf("%s rate = %.4f\n", report.move_names[i].c_str(), report.acceptance_rate(i));
}
