// Batch runner for the changepoint benchmark and the validation oracles.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tdmh/changepoint/model.hpp"
#include "tdmh/harness/experiment.hpp"
#include "tdmh/validation/fixture_io.hpp"
#include "tdmh/validation/fixtures.hpp"
#include "tdmh/validation/suite.hpp"

namespace {

using namespace tdmh;

std::vector<changepoint::Variant> parse_variants(const std::string& s) {
    if (s == "all") return {changepoint::Variant::plain, changepoint::Variant::adhoc, changepoint::Variant::posthoc};
    return {changepoint::parse_variant(s)};
}

int check_fixture_file(const std::string& path) {
    const auto f = validation::read_fixture(path);
    const auto r = validation::check_detailed_balance(f, validation::kind_acceptance);
    const bool ok = r.max_residual <= validation::balance_tolerance;
    std::cout << "fixture=" << f.name << " states=" << f.size() << " moves=" << f.moves.size()
              << " max_residual=" << validation::format_number(r.max_residual) << " worst_pair=" << r.worst_pair.first
              << ',' << r.worst_pair.second << " stationary_check=" << validation::format_number(r.stationary_check)
              << " status=" << (ok ? "pass" : "fail") << '\n';
    return ok ? 0 : 1;
}

int dump_fixtures(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& f : validation::shipped_fixtures()) {
        const auto path = std::filesystem::path(dir) / (f.name + ".fixture");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        validation::write_fixture(out, f);
        std::cout << "wrote " << path.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trans-dimensional Metropolis-Hastings changepoint sampler"};
    app.set_version_flag("--version", "tdmh 1.0.0");

    harness::ExperimentConfig cfg;
    std::string data_path, generate, variant = "plain", write_data, dump_dir, fixture_file;
    bool validate = false;
    std::uint64_t property_cases = 10000;

    app.add_option("--data", data_path, "Dataset file: one observation per line, optional '#' header")
        ->check(CLI::ExistingFile);
    app.add_option("--generate", generate,
                   "Synthetic dataset: 'canonical' or 'n=<int>;cps=<i,..>;means=<x,..>;seed=<int>'");
    app.add_option("--variant", variant, "Birth/death variant")
        ->check(CLI::IsMember({"plain", "adhoc", "posthoc", "all"}));
    app.add_option("--iterations", cfg.chain.iterations, "Chain length")->capture_default_str();
    app.add_option("--burnin", cfg.chain.burnin, "Iterations discarded before tracing")->capture_default_str();
    app.add_option("--thin", cfg.chain.thin, "Trace every k-th post-burn-in state")->capture_default_str();
    app.add_option("--seed", cfg.chain.seed, "64-bit seed")->capture_default_str();
    app.add_option("--chains", cfg.chains, "Independent chains, one thread each")->capture_default_str();
    app.add_option("--trace", cfg.trace_path, "CSV trace path (suffixed per variant/chain when several run)");
    app.add_option("--report", cfg.report_path, "key=value report path (default: stdout)");
    app.add_flag("--omit-timing", cfg.omit_timing, "Leave wall times out of the report");
    app.add_option("--q", cfg.params.q, "Changepoint probability per position")->capture_default_str();
    app.add_flag("--validate", validate, "Run the oracle suite instead of a chain");
    app.add_option("--property-cases", property_cases, "Randomized cases per property in --validate")
        ->capture_default_str();
    app.add_option("--write-data", write_data, "Write the selected dataset to a file and exit");
    app.add_option("--dump-fixtures", dump_dir, "Write the shipped finite fixtures into a directory and exit");
    app.add_option("--check-fixture", fixture_file, "Check detailed balance of a fixture file and exit")
        ->check(CLI::ExistingFile);
    app.get_option("--data")->excludes(app.get_option("--generate"));

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate) {
            validation::SuiteOptions opt;
            opt.property_cases = property_cases;
            opt.seed = cfg.chain.seed;
            const auto r = validation::run_validation_suite(opt);
            validation::write_suite_report(std::cout, r);
            return r.passed() ? 0 : 1;
        }
        if (!dump_dir.empty()) return dump_fixtures(dump_dir);
        if (!fixture_file.empty()) return check_fixture_file(fixture_file);

        if (!data_path.empty()) cfg.data_path = data_path;
        if (!generate.empty()) cfg.generator = harness::parse_generator_spec(generate);
        cfg.variants = parse_variants(variant);

        if (!write_data.empty()) {
            const auto d = harness::load_dataset(cfg);
            std::ofstream out(write_data);
            if (!out) throw std::runtime_error("cannot write " + write_data);
            const auto& g = cfg.generator;
            std::string header = "n=" + std::to_string(d.n());
            if (!cfg.data_path) header += " seed=" + std::to_string(g.seed) + " obs_var=1";
            changepoint::write_dataset(out, d, header);
            std::cout << "wrote " << write_data << " n=" << d.n() << " checksum=fnv1a64:"
                      << harness::hex64(changepoint::dataset_checksum(d)) << '\n';
            return 0;
        }

        const auto table = harness::run_experiment(cfg);
        if (cfg.report_path.empty()) harness::write_report(std::cout, cfg, table);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
