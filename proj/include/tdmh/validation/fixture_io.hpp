#ifndef TDMH_VALIDATION_FIXTURE_IO_HPP
#define TDMH_VALIDATION_FIXTURE_IO_HPP

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdmh/validation/fixture.hpp"

namespace tdmh::validation {

// Fixture text format (one record per line, '#' starts a comment line):
//
//   fixture <name>
//   state <space> <k> <c_1> ... <c_k>           one line per state, in order
//   target <p_0> ... <p_{N-1}>
//   move <name> <primal|adhoc|posthoc|mwg> <reverse index>
//   beta <b_0> ... <b_{N-1}>
//   branch <from> <aux> <prob> <to> <reverse aux>
//   translation <t_0> ... <t_{N-1}>              adhoc moves only
//   kernel <anchor> <to> <prob>                  adhoc moves only
//   fiber <g_0> ... <g_{N-1}>                    mwg moves only
//   end
//
// Lines after `move` up to the next `move` or `end` belong to that move.
// Numbers are written with 17 significant digits so a round trip is exact.

namespace io_detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline MoveKind parse_kind(const std::string& s) {
    if (s == "primal") return MoveKind::primal;
    if (s == "adhoc") return MoveKind::adhoc;
    if (s == "posthoc") return MoveKind::posthoc;
    if (s == "mwg") return MoveKind::mwg;
    throw std::runtime_error("unknown move kind '" + s + "'");
}

template <class T>
std::vector<T> read_all(std::istringstream& in) {
    std::vector<T> out;
    T v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::runtime_error("malformed number list");
    return out;
}

}  // namespace io_detail

inline void write_fixture(std::ostream& out, const FiniteFixture& f) {
    using io_detail::num;
    out << "fixture " << f.name << '\n';
    for (const auto& s : f.states) {
        out << "state " << s.space.value << ' ' << s.coords.size();
        for (double c : s.coords) out << ' ' << num(c);
        out << '\n';
    }
    out << "target";
    for (double p : f.target) out << ' ' << num(p);
    out << '\n';
    for (const auto& m : f.moves) {
        out << "move " << m.name << ' ' << to_string(m.kind) << ' ' << m.reverse.value << '\n';
        out << "beta";
        for (double b : m.move_prob) out << ' ' << num(b);
        out << '\n';
        for (std::size_t s = 0; s < m.branches.size(); ++s)
            for (const auto& b : m.branches[s])
                out << "branch " << s << ' ' << b.aux << ' ' << num(b.prob) << ' ' << b.to << ' ' << b.reverse_aux << '\n';
        if (!m.translation.empty()) {
            out << "translation";
            for (auto t : m.translation) out << ' ' << t;
            out << '\n';
            for (std::size_t a = 0; a < m.kernel.size(); ++a)
                for (std::size_t t = 0; t < m.kernel[a].size(); ++t)
                    if (m.kernel[a][t] != 0.0) out << "kernel " << a << ' ' << t << ' ' << num(m.kernel[a][t]) << '\n';
        }
        if (!m.fiber.empty()) {
            out << "fiber";
            for (auto g : m.fiber) out << ' ' << g;
            out << '\n';
        }
    }
    out << "end\n";
}

/// Parses one fixture and validates it.
inline FiniteFixture read_fixture(std::istream& in) {
    FiniteFixture f;
    std::string line;
    std::size_t line_no = 0;
    bool started = false, finished = false;
    auto fail = [&line_no](const std::string& what) {
        throw std::runtime_error("fixture line " + std::to_string(line_no) + ": " + what);
    };
    auto current = [&]() -> FixtureMove& {
        if (f.moves.empty()) fail("record outside a move");
        return f.moves.back();
    };
    auto sized = [&](FixtureMove& m) {
        if (m.move_prob.empty()) m.move_prob.assign(f.states.size(), 0.0);
        if (m.branches.empty()) m.branches.assign(f.states.size(), {});
    };

    while (!finished && std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        try {
            if (key == "fixture") {
                if (started) fail("second fixture header");
                if (!(ls >> f.name)) fail("missing fixture name");
                started = true;
            } else if (!started) {
                fail("expected 'fixture' header");
            } else if (key == "state") {
                if (!f.moves.empty()) fail("state after the first move");
                std::size_t space = 0, k = 0;
                if (!(ls >> space >> k)) fail("malformed state");
                MixtureState s{SpaceId{space}, {}};
                for (std::size_t i = 0; i < k; ++i) {
                    double c = 0.0;
                    if (!(ls >> c)) fail("missing state coordinate");
                    s.coords.push_back(c);
                }
                f.states.push_back(std::move(s));
            } else if (key == "target") {
                f.target = io_detail::read_all<double>(ls);
            } else if (key == "move") {
                FixtureMove m;
                std::string kind;
                std::size_t rev = 0;
                if (!(ls >> m.name >> kind >> rev)) fail("malformed move");
                m.kind = io_detail::parse_kind(kind);
                m.reverse = MoveLabel{rev};
                f.moves.push_back(std::move(m));
                sized(f.moves.back());
            } else if (key == "beta") {
                current().move_prob = io_detail::read_all<double>(ls);
            } else if (key == "branch") {
                std::size_t from = 0;
                Branch b;
                if (!(ls >> from >> b.aux >> b.prob >> b.to >> b.reverse_aux)) fail("malformed branch");
                auto& m = current();
                if (from >= m.branches.size()) fail("branch source out of range");
                m.branches[from].push_back(b);
            } else if (key == "translation") {
                auto& m = current();
                m.translation = io_detail::read_all<std::size_t>(ls);
                m.kernel.assign(f.states.size(), std::vector<double>(f.states.size(), 0.0));
            } else if (key == "kernel") {
                std::size_t a = 0, t = 0;
                double p = 0.0;
                if (!(ls >> a >> t >> p)) fail("malformed kernel entry");
                auto& m = current();
                if (m.kernel.empty()) fail("kernel entry before translation");
                if (a >= m.kernel.size() || t >= m.kernel.size()) fail("kernel index out of range");
                m.kernel[a][t] = p;
            } else if (key == "fiber") {
                current().fiber = io_detail::read_all<std::size_t>(ls);
            } else if (key == "end") {
                finished = true;
            } else {
                fail("unknown record '" + key + "'");
            }
        } catch (const std::runtime_error& e) {
            const std::string what = e.what();
            if (what.rfind("fixture line", 0) == 0) throw;
            fail(what);
        }
    }
    if (!started) throw std::runtime_error("fixture: empty input");
    if (!finished) throw std::runtime_error("fixture: missing 'end'");
    f.validate();
    return f;
}

inline FiniteFixture read_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file: " + path);
    return read_fixture(in);
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_FIXTURE_IO_HPP
