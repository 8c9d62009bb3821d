#ifndef TDMH_MIXTURE_HPP
#define TDMH_MIXTURE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdmh {

/// Index of one component space of a mixture. Registered spaces are 0..D-1.
struct SpaceId {
    std::size_t value = 0;
    friend auto operator<=>(const SpaceId&, const SpaceId&) = default;
};

/// Index into a registered move set. Labels are 0..|M|-1.
struct MoveLabel {
    std::size_t value = 0;
    friend auto operator<=>(const MoveLabel&, const MoveLabel&) = default;
};

/// Coordinate type. Real coordinates carry Lebesgue reference measure,
/// integer coordinates carry counting measure.
enum class CoordKind { real, integer };

struct SpaceSchema {
    std::vector<CoordKind> coords;

    static SpaceSchema reals(std::size_t n) { return {std::vector<CoordKind>(n, CoordKind::real)}; }
    static SpaceSchema integers_then_reals(std::size_t n_int, std::size_t n_real) {
        SpaceSchema s;
        s.coords.assign(n_int, CoordKind::integer);
        s.coords.insert(s.coords.end(), n_real, CoordKind::real);
        return s;
    }
    friend bool operator==(const SpaceSchema&, const SpaceSchema&) = default;
};

/// A point in the disjoint union of the registered spaces.
///
/// Integer coordinates are stored as doubles holding exact integral values.
/// States in different spaces never compare equal.
struct MixtureState {
    SpaceId space;
    std::vector<double> coords;

    friend bool operator==(const MixtureState&, const MixtureState&) = default;
    friend auto operator<=>(const MixtureState&, const MixtureState&) = default;
};

class MixtureSpace {
public:
    explicit MixtureSpace(std::vector<SpaceSchema> schemas) : schemas_(std::move(schemas)) {
        if (schemas_.empty()) throw std::invalid_argument("MixtureSpace: at least one space schema is required");
    }

    std::size_t size() const { return schemas_.size(); }
    const SpaceSchema& schema(SpaceId id) const { return schemas_.at(id.value); }

    bool contains(const MixtureState& s) const {
        if (s.space.value >= schemas_.size()) return false;
        const auto& kinds = schemas_[s.space.value].coords;
        if (kinds.size() != s.coords.size()) return false;
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            const double x = s.coords[i];
            if (kinds[i] == CoordKind::integer) {
                if (!(x == static_cast<double>(static_cast<std::int64_t>(x)))) return false;
            } else if (x != x) {
                return false;  // NaN is never a valid real coordinate
            }
        }
        return true;
    }

private:
    std::vector<SpaceSchema> schemas_;
};

inline MixtureSpace register_mixture(std::vector<SpaceSchema> schemas) { return MixtureSpace(std::move(schemas)); }

inline bool validate_state(const MixtureSpace& space, const MixtureState& s) { return space.contains(s); }

/// Which acceptance construction a move's ratio follows.
enum class MoveKind { primal, adhoc, posthoc, mwg };

inline const char* to_string(MoveKind k) {
    switch (k) {
        case MoveKind::primal: return "primal";
        case MoveKind::adhoc: return "adhoc";
        case MoveKind::posthoc: return "posthoc";
        case MoveKind::mwg: return "mwg";
    }
    return "?";
}

/// Result of a move's proposal step.
///
/// `aux` is the auxiliary point drawn by a post-hoc move (possibly of zero
/// length when the auxiliary space is a single point); other kinds leave it
/// empty. `log_correction` is the log density-correction factor of the
/// auxiliary transform (log |J| for diffeomorphisms).
template <class State>
struct ProposalOutcome {
    State proposed;
    std::optional<std::vector<double>> aux;
    double log_correction = 0.0;
};

/// One mixture component of a proposal together with its acceptance ratio.
///
/// `log_ratio(current, outcome)` returns the full log acceptance ratio,
/// including move-probability and reverse-move terms. `same_fiber` is only
/// consulted for mwg moves; when set, it must hold for every proposal.
template <class State, class Rng>
struct MoveSpec {
    MoveLabel label;
    MoveLabel reverse;
    MoveKind kind = MoveKind::primal;
    std::string name;
    std::function<double(const State&)> move_prob;
    std::function<ProposalOutcome<State>(const State&, Rng&)> propose;
    std::function<double(const State&, const ProposalOutcome<State>&)> log_ratio;
    std::function<bool(const State&, const State&)> same_fiber;
};

/// A registered move set. Checks the label range and that the reverse map is
/// an involution.
template <class State, class Rng>
class MoveSet {
public:
    using Move = MoveSpec<State, Rng>;

    explicit MoveSet(std::vector<Move> moves) : moves_(std::move(moves)) {
        if (moves_.empty()) throw std::invalid_argument("MoveSet: empty move set");
        for (std::size_t i = 0; i < moves_.size(); ++i) {
            const auto& m = moves_[i];
            if (m.label.value != i) throw std::invalid_argument("MoveSet: labels must be contiguous 0..|M|-1");
            if (m.reverse.value >= moves_.size())
                throw std::invalid_argument("MoveSet: reverse label of move '" + m.name + "' is not registered");
            if (!m.move_prob || !m.propose || !m.log_ratio)
                throw std::invalid_argument("MoveSet: move '" + m.name + "' is missing a callable");
        }
        for (const auto& m : moves_) {
            if (moves_[m.reverse.value].reverse != m.label)
                throw std::invalid_argument("MoveSet: reverse map is not an involution at '" + m.name + "'");
            if (moves_[m.reverse.value].kind != m.kind)
                throw std::invalid_argument("MoveSet: move '" + m.name + "' and its reverse differ in kind");
        }
    }

    std::size_t size() const { return moves_.size(); }
    const Move& operator[](MoveLabel l) const { return moves_.at(l.value); }
    const Move& operator[](std::size_t i) const { return moves_.at(i); }
    auto begin() const { return moves_.begin(); }
    auto end() const { return moves_.end(); }

    MoveLabel reverse_move(MoveLabel l) const {
        if (l.value >= moves_.size()) throw std::out_of_range("reverse_move: unregistered move label");
        return moves_[l.value].reverse;
    }

private:
    std::vector<Move> moves_;
};

/// r_l for a bare reverse table, where entry l holds the label of r_l.
inline MoveLabel reverse_move(const std::vector<MoveLabel>& reverse_of, MoveLabel l) {
    if (l.value >= reverse_of.size()) throw std::out_of_range("reverse_move: unregistered move label");
    return reverse_of[l.value];
}

template <class State, class Rng>
MoveLabel reverse_move(const MoveSet<State, Rng>& moves, MoveLabel l) {
    return moves.reverse_move(l);
}

}  // namespace tdmh

#endif  // TDMH_MIXTURE_HPP
