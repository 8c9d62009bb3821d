#ifndef TDMH_CHANGEPOINT_MODEL_HPP
#define TDMH_CHANGEPOINT_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdmh/log_math.hpp"
#include "tdmh/mixture.hpp"

namespace tdmh::changepoint {

/// Observations y_1..y_n. Positions in this namespace are 1-based.
struct Dataset {
    std::vector<double> y;

    std::size_t n() const { return y.size(); }

    void validate() const {
        if (y.empty()) throw std::invalid_argument("Dataset: at least one observation is required");
        for (double v : y)
            if (!std::isfinite(v)) throw std::invalid_argument("Dataset: observations must be finite");
    }
};

/// Interior changepoints and segment heights.
///
/// `cps` holds strictly increasing positions in {2, ..., n}; a changepoint at
/// i starts a new segment at y_i. The boundaries 1 and n+1 are implicit.
/// Segment j covers [cps[j-1], cps[j]) with the boundaries filled in.
struct ChangepointState {
    std::vector<int> cps;
    std::vector<double> heights;

    std::size_t count() const { return cps.size(); }
    int segment_begin(std::size_t seg) const { return seg == 0 ? 1 : cps[seg - 1]; }
    int segment_end(std::size_t seg, std::size_t n) const {
        return seg == cps.size() ? static_cast<int>(n) + 1 : cps[seg];
    }

    friend bool operator==(const ChangepointState&, const ChangepointState&) = default;
};

inline bool is_valid(const ChangepointState& s, std::size_t n) {
    if (s.heights.size() != s.cps.size() + 1) return false;
    int prev = 1;
    for (int c : s.cps) {
        if (c <= prev || c > static_cast<int>(n)) return false;
        prev = c;
    }
    for (double h : s.heights)
        if (!std::isfinite(h)) return false;
    return true;
}

struct ModelParams {
    double q = 3.0 / 550.0;        // changepoint probability per interior position
    double height_prior_var = 25.0;
    double obs_var = 1.0;
    double adjust_var = 0.5;       // random-walk variance of the adjust move
    double adhoc_var = 0.01;       // tau^2 of the data-driven height proposals

    void validate() const {
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("ModelParams: q must lie in (0,1)");
        if (!(height_prior_var > 0.0 && obs_var > 0.0 && adjust_var > 0.0 && adhoc_var > 0.0))
            throw std::invalid_argument("ModelParams: variances must be positive");
    }
};

/// Prefix sums of y and y^2 with a leading zero.
class SegmentStats {
public:
    explicit SegmentStats(const Dataset& data) {
        data.validate();
        prefix_sum_.assign(data.n() + 1, 0.0);
        prefix_sumsq_.assign(data.n() + 1, 0.0);
        for (std::size_t t = 0; t < data.n(); ++t) {
            prefix_sum_[t + 1] = prefix_sum_[t] + data.y[t];
            prefix_sumsq_[t + 1] = prefix_sumsq_[t] + data.y[t] * data.y[t];
        }
    }

    std::size_t n() const { return prefix_sum_.size() - 1; }
    const std::vector<double>& prefix_sum() const { return prefix_sum_; }
    const std::vector<double>& prefix_sumsq() const { return prefix_sumsq_; }

    /// Sum of y_a..y_{b-1}.
    double sum(int a, int b) const { return prefix_sum_[b - 1] - prefix_sum_[a - 1]; }
    double sumsq(int a, int b) const { return prefix_sumsq_[b - 1] - prefix_sumsq_[a - 1]; }

private:
    std::vector<double> prefix_sum_;
    std::vector<double> prefix_sumsq_;
};

/// Mean of y_l..y_{k-1}.
inline double segment_mean(const SegmentStats& stats, int l, int k) {
    if (l >= k) throw std::invalid_argument("segment_mean: empty segment");
    if (l < 1 || k > static_cast<int>(stats.n()) + 1) throw std::out_of_range("segment_mean: segment out of range");
    return stats.sum(l, k) / static_cast<double>(k - l);
}

/// Independent Bernoulli(q) changepoint indicators at positions 2..n (the
/// product form of geometric gaps) and iid N(0, height_prior_var) heights.
inline double log_prior(const ChangepointState& s, std::size_t n, const ModelParams& p) {
    const double c = static_cast<double>(s.count());
    const double free_positions = static_cast<double>(n) - 1.0 - c;
    double lp = c * std::log(p.q) + free_positions * std::log1p(-p.q);
    for (double h : s.heights) lp += log_normal_pdf(h, 0.0, p.height_prior_var);
    return lp;
}

/// Gaussian log-likelihood of segment [a, b) at height h.
inline double log_segment_likelihood(const SegmentStats& stats, int a, int b, double h, double obs_var) {
    const double len = static_cast<double>(b - a);
    const double quad = stats.sumsq(a, b) - 2.0 * h * stats.sum(a, b) + len * h * h;
    return -0.5 * len * std::log(2.0 * std::numbers::pi * obs_var) - 0.5 * quad / obs_var;
}

inline double log_likelihood(const ChangepointState& s, const SegmentStats& stats, const ModelParams& p) {
    const std::size_t n = stats.n();
    double ll = 0.0;
    for (std::size_t seg = 0; seg < s.heights.size(); ++seg)
        ll += log_segment_likelihood(stats, s.segment_begin(seg), s.segment_end(seg, n), s.heights[seg], p.obs_var);
    return ll;
}

inline double log_posterior(const ChangepointState& s, const SegmentStats& stats, const ModelParams& p) {
    return log_prior(s, stats.n(), p) + log_likelihood(s, stats, p);
}

/// Height-dependent part of the segment log-likelihood: the y^2 and
/// normalizing terms are dropped so that differences between heights over a
/// common range stay accurate.
inline double log_segment_fit(const SegmentStats& stats, int a, int b, double h, double obs_var) {
    return (2.0 * h * stats.sum(a, b) - static_cast<double>(b - a) * h * h) / (2.0 * obs_var);
}

/// log of prod_{l..k-1} phi(y; h) / [prod_{l..i-1} phi(y; h1) prod_{i..k-1} phi(y; h2)]:
/// the likelihood of the merged segment relative to the split one.
inline double log_L(const SegmentStats& stats, const ModelParams& p, int l, int i, int k, double h, double h1,
                    double h2) {
    if (!(l < i && i < k)) throw std::invalid_argument("log_L: degenerate split");
    return log_segment_fit(stats, l, k, h, p.obs_var) - log_segment_fit(stats, l, i, h1, p.obs_var) -
           log_segment_fit(stats, i, k, h2, p.obs_var);
}

/// Draws y_i ~ N(mean of the segment containing i, obs_var) independently.
inline Dataset generate_dataset(std::size_t n, const std::vector<int>& true_cps, const std::vector<double>& true_means,
                                double obs_var, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("generate_dataset: n must be positive");
    if (true_means.size() != true_cps.size() + 1)
        throw std::invalid_argument("generate_dataset: need exactly one mean per segment");
    if (!(obs_var > 0.0)) throw std::invalid_argument("generate_dataset: obs_var must be positive");
    ChangepointState truth{true_cps, true_means};
    if (!is_valid(truth, n)) throw std::invalid_argument("generate_dataset: changepoints must be increasing in 2..n");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(obs_var));
    Dataset d;
    d.y.resize(n);
    std::size_t seg = 0;
    for (std::size_t t = 1; t <= n; ++t) {
        while (seg < true_cps.size() && static_cast<int>(t) >= true_cps[seg]) ++seg;
        d.y[t - 1] = true_means[seg] + noise(rng);
    }
    return d;
}

/// The benchmark instance: n = 550, nine evenly spread changepoints and ten
/// means alternating in sign within [-3, 3].
struct CanonicalInstance {
    static constexpr std::size_t n = 550;
    static constexpr std::uint64_t seed = 20180515;
    static std::vector<int> cps() { return {56, 111, 166, 221, 276, 331, 386, 441, 496}; }
    static std::vector<double> means() { return {0.5, -1.0, 1.5, -2.0, 2.5, -3.0, 2.0, -1.5, 1.0, -0.5}; }
};

inline Dataset canonical_dataset() {
    return generate_dataset(CanonicalInstance::n, CanonicalInstance::cps(), CanonicalInstance::means(), 1.0,
                            CanonicalInstance::seed);
}

/// Text format: one observation per line in decimal notation; an optional
/// first line starting with '#' is a header.
inline Dataset read_dataset(std::istream& in) {
    Dataset d;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && !line.empty() && line[0] == '#') continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream ls(line);
        double v = 0.0;
        std::string rest;
        if (!(ls >> v) || (ls >> rest))
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": not a single number");
        d.y.push_back(v);
    }
    d.validate();
    return d;
}

inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return read_dataset(in);
}

inline std::string format_observation(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_dataset(std::ostream& out, const Dataset& d, const std::string& header = {}) {
    if (!header.empty()) out << "# " << header << '\n';
    for (double v : d.y) out << format_observation(v) << '\n';
}

/// FNV-1a over the text serialization of the observations.
inline std::uint64_t dataset_checksum(const Dataset& d) {
    std::uint64_t h = 14695981039346656037ULL;
    for (double v : d.y) {
        for (char c : format_observation(v) + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

/// Mixture registration of the model: space c holds c integer positions and
/// c+1 real heights, c = 0..n-1.
inline MixtureSpace changepoint_mixture_space(std::size_t n) {
    std::vector<SpaceSchema> schemas;
    schemas.reserve(n);
    for (std::size_t c = 0; c < n; ++c) schemas.push_back(SpaceSchema::integers_then_reals(c, c + 1));
    return register_mixture(std::move(schemas));
}

inline MixtureState to_mixture_state(const ChangepointState& s) {
    MixtureState m{SpaceId{s.count()}, {}};
    m.coords.reserve(s.cps.size() + s.heights.size());
    for (int c : s.cps) m.coords.push_back(static_cast<double>(c));
    m.coords.insert(m.coords.end(), s.heights.begin(), s.heights.end());
    return m;
}

inline ChangepointState from_mixture_state(const MixtureState& m) {
    const std::size_t c = m.space.value;
    if (m.coords.size() != 2 * c + 1) throw std::invalid_argument("from_mixture_state: coordinate count mismatch");
    ChangepointState s;
    for (std::size_t j = 0; j < c; ++j) s.cps.push_back(static_cast<int>(m.coords[j]));
    s.heights.assign(m.coords.begin() + static_cast<std::ptrdiff_t>(c), m.coords.end());
    return s;
}

}  // namespace tdmh::changepoint

#endif  // TDMH_CHANGEPOINT_MODEL_HPP
