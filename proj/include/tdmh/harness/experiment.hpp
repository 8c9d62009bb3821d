#ifndef TDMH_HARNESS_EXPERIMENT_HPP
#define TDMH_HARNESS_EXPERIMENT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tdmh/chain.hpp"
#include "tdmh/changepoint/model.hpp"
#include "tdmh/changepoint/moves.hpp"

namespace tdmh::harness {

using changepoint::ChangepointState;
using changepoint::Dataset;
using changepoint::Variant;

/// Parameters of a synthetic dataset.
struct GeneratorSpec {
    std::size_t n = 0;
    std::vector<int> cps;
    std::vector<double> means;
    std::uint64_t seed = 0;
    double obs_var = 1.0;

    static GeneratorSpec canonical() {
        using C = changepoint::CanonicalInstance;
        return {C::n, C::cps(), C::means(), C::seed, 1.0};
    }
};

namespace detail {

template <class T>
std::vector<T> parse_list(const std::string& s, const std::string& key) {
    std::vector<T> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        std::string rest;
        if (!(is >> v) || (is >> rest)) throw std::invalid_argument("--generate: bad value '" + item + "' for " + key);
        out.push_back(v);
    }
    return out;
}

}  // namespace detail

/// Parses "canonical" or "n=<int>;cps=<i,...>;means=<x,...>;seed=<int>".
inline GeneratorSpec parse_generator_spec(const std::string& text) {
    if (text == "canonical") return GeneratorSpec::canonical();
    GeneratorSpec g;
    bool have_n = false, have_means = false, have_seed = false;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ';')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--generate: expected key=value, got '" + field + "'");
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "n") {
            const auto v = detail::parse_list<long long>(value, key);
            if (v.size() != 1 || v[0] <= 0) throw std::invalid_argument("--generate: n must be a positive integer");
            g.n = static_cast<std::size_t>(v[0]);
            have_n = true;
        } else if (key == "cps") {
            g.cps = detail::parse_list<int>(value, key);
        } else if (key == "means") {
            g.means = detail::parse_list<double>(value, key);
            have_means = true;
        } else if (key == "seed") {
            const auto v = detail::parse_list<unsigned long long>(value, key);
            if (v.size() != 1) throw std::invalid_argument("--generate: seed must be a single integer");
            g.seed = v[0];
            have_seed = true;
        } else {
            throw std::invalid_argument("--generate: unknown key '" + key + "'");
        }
    }
    if (!have_n || !have_means || !have_seed) throw std::invalid_argument("--generate: n, means and seed are required");
    return g;
}

struct ExperimentConfig {
    std::optional<std::string> data_path;       // takes precedence over generator
    GeneratorSpec generator = GeneratorSpec::canonical();
    std::vector<Variant> variants{Variant::plain};
    ChainConfig chain{10'000'000, 0, 100, 1};
    unsigned chains = 1;
    std::string trace_path;                     // empty: no trace
    std::string report_path;                    // empty: no report file
    bool omit_timing = false;                   // drop wall times for byte-stable reports
    changepoint::ModelParams params;

    void validate() const {
        chain.validate();
        params.validate();
        if (variants.empty()) throw std::invalid_argument("ExperimentConfig: no variant selected");
        if (chains == 0) throw std::invalid_argument("ExperimentConfig: chains must be positive");
    }
};

/// Per-move counts of one chain.
struct RateRow {
    Variant variant = Variant::plain;
    unsigned chain = 0;
    std::vector<std::string> moves;
    std::vector<std::uint64_t> proposed;
    std::vector<std::uint64_t> accepted;
    double wall_time_seconds = 0.0;
    std::size_t final_count = 0;
    std::string trace_file;

    double rate(std::size_t move) const {
        return proposed.at(move) == 0 ? 0.0
                                      : static_cast<double>(accepted.at(move)) / static_cast<double>(proposed.at(move));
    }
};

struct RateTable {
    std::vector<RateRow> rows;
    std::uint64_t iterations = 0;
    std::string dataset_label;
    std::size_t dataset_n = 0;
    std::uint64_t dataset_checksum = 0;

    /// Pooled rate over all chains of `variant`.
    double rate(Variant variant, const std::string& move) const {
        std::uint64_t prop = 0, acc = 0;
        bool found = false;
        for (const auto& r : rows) {
            if (r.variant != variant) continue;
            for (std::size_t i = 0; i < r.moves.size(); ++i)
                if (r.moves[i] == move) {
                    prop += r.proposed[i];
                    acc += r.accepted[i];
                    found = true;
                }
        }
        if (!found) throw std::out_of_range("RateTable: no rate for move '" + move + "'");
        return prop == 0 ? 0.0 : static_cast<double>(acc) / static_cast<double>(prop);
    }

    double wall_time(Variant variant) const {
        double t = 0.0;
        for (const auto& r : rows)
            if (r.variant == variant) t = std::max(t, r.wall_time_seconds);
        return t;
    }
};

/// The dataset an experiment runs on.
inline Dataset load_dataset(const ExperimentConfig& cfg, std::string* label = nullptr) {
    if (cfg.data_path) {
        if (label) *label = *cfg.data_path;
        return changepoint::read_dataset(*cfg.data_path);
    }
    const auto& g = cfg.generator;
    if (label) *label = "generated";
    return changepoint::generate_dataset(g.n, g.cps, g.means, g.obs_var, g.seed);
}

/// "out.csv" -> "out.plain.chain1.csv"; parts are only added when several
/// variants or chains share one path.
inline std::string output_path(const std::string& base, Variant v, unsigned chain, bool tag_variant, bool tag_chain) {
    std::string suffix;
    if (tag_variant) suffix += std::string(".") + changepoint::to_string(v);
    if (tag_chain) suffix += ".chain" + std::to_string(chain);
    if (suffix.empty()) return base;
    const auto slash = base.find_last_of('/');
    const auto dot = base.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return base + suffix;
    return base.substr(0, dot) + suffix + base.substr(dot);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV trace: iteration,count,positions...,heights... (count positions and
/// count + 1 heights per row).
class TraceWriter {
public:
    explicit TraceWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open trace file for writing: " + path);
        out_ << "iteration,count,positions...,heights...\n";
    }

    void write(std::uint64_t iteration, const ChangepointState& s) {
        out_ << iteration << ',' << s.count();
        for (int c : s.cps) out_ << ',' << c;
        for (double h : s.heights) out_ << ',' << format_double(h);
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (out_.fail()) throw std::runtime_error("error while writing trace file");
    }

private:
    std::ofstream out_;
};

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_report(std::ostream& os, const ExperimentConfig& cfg, const RateTable& t) {
    os << "rng=" << rng_identity << '\n';
    os << "seed=" << cfg.chain.seed << '\n';
    os << "dataset=" << t.dataset_label << '\n';
    os << "dataset_n=" << t.dataset_n << '\n';
    os << "dataset_checksum=fnv1a64:" << hex64(t.dataset_checksum) << '\n';
    os << "iterations=" << cfg.chain.iterations << '\n';
    os << "burnin=" << cfg.chain.burnin << '\n';
    os << "thin=" << cfg.chain.thin << '\n';
    os << "chains=" << cfg.chains << '\n';
    os << "q=" << format_double(cfg.params.q) << '\n';
    for (const auto& r : t.rows) {
        const std::string prefix =
            std::string("variant=") + changepoint::to_string(r.variant) + " chain=" + std::to_string(r.chain);
        for (std::size_t i = 0; i < r.moves.size(); ++i) {
            char rate[32];
            std::snprintf(rate, sizeof rate, "%.6f", r.rate(i));
            os << prefix << " move=" << r.moves[i] << " proposed=" << r.proposed[i] << " accepted=" << r.accepted[i]
               << " rate=" << rate << '\n';
        }
        os << prefix << " final_count=" << r.final_count << '\n';
        if (!r.trace_file.empty()) os << prefix << " trace=" << r.trace_file << '\n';
        if (!cfg.omit_timing) {
            char wall[32];
            std::snprintf(wall, sizeof wall, "%.3f", r.wall_time_seconds);
            os << prefix << " wall_time_seconds=" << wall << '\n';
        }
    }
}

/// Runs every (variant, chain) pair. Chains of one variant run on separate
/// threads with generators split by chain index; variants run in sequence.
inline RateTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    RateTable table;
    const Dataset data = load_dataset(cfg, &table.dataset_label);
    table.dataset_n = data.n();
    table.dataset_checksum = changepoint::dataset_checksum(data);
    table.iterations = cfg.chain.iterations;

    std::unique_ptr<std::ofstream> report;
    if (!cfg.report_path.empty()) {
        report = std::make_unique<std::ofstream>(cfg.report_path);
        if (!*report) throw std::runtime_error("cannot open report file for writing: " + cfg.report_path);
    }
    const bool tag_variant = cfg.variants.size() > 1, tag_chain = cfg.chains > 1;

    for (Variant v : cfg.variants) {
        auto ctx = std::make_shared<const changepoint::ModelContext>(data, cfg.params, v);
        const auto sampler = changepoint::make_sampler(ctx);
        std::vector<RateRow> rows(cfg.chains);
        std::vector<std::unique_ptr<TraceWriter>> traces(cfg.chains);
        for (unsigned k = 0; k < cfg.chains; ++k) {
            rows[k].variant = v;
            rows[k].chain = k;
            if (!cfg.trace_path.empty()) {
                rows[k].trace_file = output_path(cfg.trace_path, v, k, tag_variant, tag_chain);
                traces[k] = std::make_unique<TraceWriter>(rows[k].trace_file);
            }
        }
        std::vector<std::exception_ptr> errors(cfg.chains);
        auto run = [&](unsigned k) {
            try {
                TraceSink<ChangepointState> sink;
                if (traces[k]) sink = [w = traces[k].get()](std::uint64_t it, const ChangepointState& s) { w->write(it, s); };
                const auto rep = run_chain_seeded(sampler, changepoint::initial_state(), cfg.chain, sink, k);
                rows[k].moves = rep.move_names;
                rows[k].proposed = rep.per_move_proposed;
                rows[k].accepted = rep.per_move_accepted;
                rows[k].wall_time_seconds = rep.wall_time_seconds;
                rows[k].final_count = rep.final_state.count();
                if (traces[k]) traces[k]->close();
            } catch (...) {
                errors[k] = std::current_exception();
            }
        };
        if (cfg.chains == 1) {
            run(0);
        } else {
            std::vector<std::thread> workers;
            for (unsigned k = 0; k < cfg.chains; ++k) workers.emplace_back(run, k);
            for (auto& w : workers) w.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    }
    if (report) {
        write_report(*report, cfg, table);
        report->close();
        if (report->fail()) throw std::runtime_error("error while writing report file: " + cfg.report_path);
    }
    return table;
}

}  // namespace tdmh::harness

#endif  // TDMH_HARNESS_EXPERIMENT_HPP
