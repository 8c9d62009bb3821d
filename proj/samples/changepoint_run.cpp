// Short runs of the three birth/death variants on a small synthetic dataset.

#include <cstdio>
#include <memory>

#include "tdmh/changepoint/model.hpp"
#include "tdmh/changepoint/moves.hpp"

int main() {
    using namespace tdmh;
    using namespace tdmh::changepoint;

    const Dataset data = generate_dataset(120, {41, 81}, {0.0, 3.0, -1.0}, 1.0, 11);
    ModelParams params;
    params.q = 2.0 / 120.0;

    for (Variant v : {Variant::plain, Variant::adhoc, Variant::posthoc}) {
        auto ctx = std::make_shared<const ModelContext>(data, params, v);
        const auto sampler = make_sampler(ctx);
        ChainConfig cfg{200'000, 20'000, 1, 3};
        double count_sum = 0.0;
        std::uint64_t kept = 0;
        const auto report = run_chain_seeded<ChangepointState>(
            sampler, initial_state(), cfg, [&](std::uint64_t, const ChangepointState& s) {
                count_sum += static_cast<double>(s.count());
                ++kept;
            });
        std::printf("%-8s mean changepoints %.3f ", to_string(v), count_sum / kept);
        for (std::size_t i = 0; i < report.move_names.size(); ++i)
            std::printf(" %s=%.4f", report.move_names[i].c_str(), report.acceptance_rate(i));
        std::printf("\n");
    }
}
