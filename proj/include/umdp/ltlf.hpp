#pragma once

#include "umdp/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace umdp {

/// Label = subset of atomic propositions, encoded as a bitmask over the
/// AP order fixed at arena construction.
using Label = std::uint32_t;

enum class FormulaKind : std::uint8_t { True, False, Atom, Not, And, Or, Next, Until };

/// Hash-consed LTL_f formulas.  Nodes are canonicalized on construction
/// (double negation, and/or flattening with sorted deduplicated children,
/// constant absorption), so structurally equal formulas share one id.
/// Eventually/globally/implies are rewritten at construction:
///   F p = true U p,  G p = !(true U !p),  a -> b = !a | b.
class FormulaArena {
public:
    explicit FormulaArena(std::vector<std::string> atoms);

    using Id = std::int32_t;

    Id tru() const { return true_id_; }
    Id fls() const { return false_id_; }
    Id atom(int atom_index) const;
    Id atom(const std::string& name) const;
    Id negate(Id a);
    Id conj(Id a, Id b);
    Id disj(Id a, Id b);
    Id conj(const std::vector<Id>& xs);
    Id disj(const std::vector<Id>& xs);
    Id next(Id a);
    Id until(Id a, Id b);
    Id eventually(Id a) { return until(tru(), a); }
    Id globally(Id a) { return negate(until(tru(), negate(a))); }
    Id implies(Id a, Id b) { return disj(negate(a), b); }

    /// One-step residual against label l.
    Id progress(Id phi, Label l);
    /// Empty-suffix evaluation of a residual.
    bool accepts_empty(Id phi) const;

    /// Direct recursive LTL_f satisfaction at position 0 (test oracle,
    /// independent of progression).  Errors with EmptyTrace.
    bool trace_sat(Id phi, const std::vector<Label>& trace) const;

    FormulaKind kind(Id id) const { return nodes_[id].kind; }
    int atom_of(Id id) const { return nodes_[id].atom; }
    const std::vector<Id>& children(Id id) const { return nodes_[id].children; }
    const std::vector<std::string>& atoms() const { return atoms_; }
    std::string to_string(Id id) const;

private:
    struct Node {
        FormulaKind kind;
        int atom = -1;
        std::vector<Id> children;
    };

    Id intern(Node node);
    bool sat_at(Id phi, const std::vector<Label>& trace, std::size_t pos,
                std::unordered_map<std::uint64_t, bool>& memo) const;

    std::vector<std::string> atoms_;
    std::vector<Id> atom_ids_;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, Id> cons_;
    Id true_id_ = 0;
    Id false_id_ = 0;
    Id nonempty_id_ = 0; // true U true: holds iff the remaining suffix is nonempty
};

/// Parse the documented grammar.  Atoms are identifiers and must appear in
/// the arena's AP set; operators ! & | -> X U F G with precedence
/// ! > X,F,G > U > & > | > ->.
FormulaArena::Id parse_formula(FormulaArena& arena, const std::string& text);

/// Deterministic automaton over 2^AP built by progression closure.  After
/// the prefix transformation every accepting state is the canonical true
/// sink, which is absorbing; the canonical false state is the absorbing
/// rejecting sink.
struct Dfa {
    int num_states = 0;
    int init = 0;
    int accepting = -1; // canonical true sink, or -1 when unreachable
    int rejecting = -1; // canonical false sink, or -1 when unreachable
    int num_atoms = 0;
    std::vector<int> delta; // delta[state * (1<<num_atoms) + label]
    std::vector<std::string> state_names;

    int step(int state, Label l) const { return delta[static_cast<std::size_t>(state) * (std::size_t{1} << num_atoms) + l]; }
    bool is_accepting(int state) const { return state == accepting; }
};

Dfa build_dfa(FormulaArena& arena, FormulaArena::Id phi, std::size_t state_cap = 100000);

/// True iff some nonempty prefix of the trace drives the DFA into the
/// accepting sink.
bool prefix_accepts(const Dfa& dfa, const std::vector<Label>& trace);

std::string dfa_to_dot(const Dfa& dfa);
nlohmann::json dfa_to_json(const Dfa& dfa);

} // namespace umdp
