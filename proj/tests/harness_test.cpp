#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tdmh/harness/experiment.hpp"

namespace {

using namespace tdmh;
using namespace tdmh::harness;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tdmh_harness_test";
    fs::create_directories(dir);
    return dir / name;
}

TEST(GeneratorSpec, ParsesKeyValueForm) {
    const auto g = parse_generator_spec("n=20;cps=5,12;means=0,1.5,-2;seed=9");
    EXPECT_EQ(g.n, 20u);
    EXPECT_EQ(g.cps, (std::vector<int>{5, 12}));
    EXPECT_EQ(g.means, (std::vector<double>{0.0, 1.5, -2.0}));
    EXPECT_EQ(g.seed, 9u);
    const auto c = parse_generator_spec("canonical");
    EXPECT_EQ(c.n, 550u);
    EXPECT_THROW(parse_generator_spec("n=20;means=0"), std::invalid_argument);
    EXPECT_THROW(parse_generator_spec("n=20;means=0;seed=1;color=red"), std::invalid_argument);
    EXPECT_THROW(parse_generator_spec("n=x;means=0;seed=1"), std::invalid_argument);
}

TEST(OutputPath, Suffixes) {
    EXPECT_EQ(output_path("out.csv", changepoint::Variant::plain, 0, false, false), "out.csv");
    EXPECT_EQ(output_path("out.csv", changepoint::Variant::adhoc, 1, true, true), "out.adhoc.chain1.csv");
    EXPECT_EQ(output_path("dir.d/out", changepoint::Variant::plain, 2, false, true), "dir.d/out.chain2");
}

TEST(CanonicalData, ShippedFileMatchesGenerator) {
    const auto shipped = changepoint::read_dataset(std::string(TDMH_SOURCE_DIR "/data/canonical.txt"));
    const auto generated = changepoint::canonical_dataset();
    EXPECT_EQ(shipped.y, generated.y);
    EXPECT_EQ(changepoint::dataset_checksum(shipped), changepoint::dataset_checksum(generated));
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.generator = parse_generator_spec("n=30;cps=11,21;means=-1,2,0;seed=4");
    cfg.variants = {changepoint::Variant::plain, changepoint::Variant::posthoc};
    cfg.chain = ChainConfig{10, 0, 1, 123};
    cfg.omit_timing = true;
    return cfg;
}

TEST(RunExperiment, ReportIsByteIdenticalAcrossRuns) {
    auto cfg = small_config();
    cfg.report_path = scratch("r1.txt").string();
    run_experiment(cfg);
    cfg.report_path = scratch("r2.txt").string();
    run_experiment(cfg);
    const auto a = slurp(scratch("r1.txt")), b = slurp(scratch("r2.txt"));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("rng=mt19937_64"), std::string::npos);
    EXPECT_NE(a.find("dataset_checksum=fnv1a64:"), std::string::npos);
    EXPECT_EQ(a.find("wall_time_seconds"), std::string::npos);
}

TEST(RunExperiment, ReportCarriesTimingByDefault) {
    auto cfg = small_config();
    cfg.omit_timing = false;
    std::stringstream ss;
    write_report(ss, cfg, run_experiment(cfg));
    EXPECT_NE(ss.str().find("wall_time_seconds="), std::string::npos);
}

TEST(RunExperiment, CountsAndRates) {
    auto cfg = small_config();
    cfg.chain.iterations = 20000;
    cfg.chains = 3;
    const auto t = run_experiment(cfg);
    ASSERT_EQ(t.rows.size(), 6u);
    for (const auto& r : t.rows) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < r.moves.size(); ++i) {
            total += r.proposed[i];
            EXPECT_LE(r.accepted[i], r.proposed[i]);
            EXPECT_GE(r.rate(i), 0.0);
            EXPECT_LE(r.rate(i), 1.0);
        }
        EXPECT_EQ(total, cfg.chain.iterations);
    }
    EXPECT_NE(t.rows[0].proposed, t.rows[1].proposed);  // split streams
    EXPECT_GE(t.rate(changepoint::Variant::plain, "adjust"), 0.0);
    EXPECT_THROW(t.rate(changepoint::Variant::adhoc, "adjust"), std::out_of_range);
}

TEST(RunExperiment, ThreadedChainsMatchSequentialRuns) {
    auto cfg = small_config();
    cfg.chain.iterations = 5000;
    cfg.chains = 2;
    const auto both = run_experiment(cfg);
    auto ctx = std::make_shared<const changepoint::ModelContext>(load_dataset(cfg), cfg.params, changepoint::Variant::plain);
    const auto rep = run_chain_seeded(changepoint::make_sampler(ctx), changepoint::initial_state(), cfg.chain, {}, 1);
    EXPECT_EQ(both.rows[1].accepted, rep.per_move_accepted);
}

TEST(RunExperiment, TraceFiles) {
    auto cfg = small_config();
    cfg.chain = ChainConfig{100, 10, 30, 5};
    cfg.trace_path = scratch("trace.csv").string();
    const auto t = run_experiment(cfg);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0].trace_file, scratch("trace.plain.csv").string());
    std::ifstream in(t.rows[1].trace_file);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iteration,count,positions...,heights...");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const std::size_t count = std::stoul(cells.at(1));
        EXPECT_EQ(cells.size(), 2 + count + count + 1);
    }
    EXPECT_EQ(rows, 3);  // iterations 40, 70, 100
}

TEST(RunExperiment, UnwritableOutputFails) {
    auto cfg = small_config();
    cfg.report_path = "/nonexistent-dir/report.txt";
    EXPECT_THROW(run_experiment(cfg), std::runtime_error);
    cfg.report_path.clear();
    cfg.data_path = "/nonexistent-dir/data.txt";
    EXPECT_THROW(run_experiment(cfg), std::runtime_error);
}

int run_cli(const std::string& args, const fs::path& out) {
    const std::string cmd = std::string(TDMH_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, DeterministicReport) {
    const std::string args = "--data " TDMH_SOURCE_DIR "/data/canonical.txt --variant all --iterations 10 --seed 7 --omit-timing";
    ASSERT_EQ(run_cli(args, scratch("cli1.txt")), 0);
    ASSERT_EQ(run_cli(args, scratch("cli2.txt")), 0);
    EXPECT_EQ(slurp(scratch("cli1.txt")), slurp(scratch("cli2.txt")));
    EXPECT_NE(slurp(scratch("cli1.txt")).find("variant=posthoc chain=0 move=death"), std::string::npos);
}

TEST(Cli, RejectsBadArguments) {
    EXPECT_NE(run_cli("--variant bogus", scratch("bad1.txt")), 0);
    EXPECT_NE(run_cli("--iterations 0", scratch("bad2.txt")), 0);
    EXPECT_NE(run_cli("--data /nonexistent-file", scratch("bad3.txt")), 0);
    EXPECT_NE(run_cli("--burnin 20 --iterations 10", scratch("bad4.txt")), 0);
}

TEST(Cli, FixtureCheck) {
    EXPECT_EQ(run_cli("--check-fixture " TDMH_SOURCE_DIR "/data/fixtures/mixture_four_state.fixture", scratch("fx.txt")), 0);
    EXPECT_NE(slurp(scratch("fx.txt")).find("status=pass"), std::string::npos);
}

TEST(Cli, WriteDataReproducesShippedFile) {
    ASSERT_EQ(run_cli("--generate canonical --write-data " + scratch("canon.txt").string(), scratch("wd.txt")), 0);
    EXPECT_EQ(slurp(scratch("canon.txt")), slurp(TDMH_SOURCE_DIR "/data/canonical.txt"));
}

}  // namespace
