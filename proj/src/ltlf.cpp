#include "umdp/ltlf.hpp"

#include "umdp/errors.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace umdp {

FormulaArena::FormulaArena(std::vector<std::string> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.size() > 16) throw Error(ErrorCode::ConfigInvalid, "at most 16 atomic propositions");
    true_id_ = intern({FormulaKind::True, -1, {}});
    false_id_ = intern({FormulaKind::False, -1, {}});
    nonempty_id_ = intern({FormulaKind::Until, -1, {true_id_, true_id_}});
    atom_ids_.reserve(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        atom_ids_.push_back(intern({FormulaKind::Atom, static_cast<int>(i), {}}));
}

FormulaArena::Id FormulaArena::intern(Node node) {
    std::string key;
    key.reserve(2 + node.children.size() * 4);
    key.push_back(static_cast<char>(node.kind));
    key.append(reinterpret_cast<const char*>(&node.atom), sizeof(node.atom));
    for (Id c : node.children) key.append(reinterpret_cast<const char*>(&c), sizeof(c));
    auto it = cons_.find(key);
    if (it != cons_.end()) return it->second;
    const Id id = static_cast<Id>(nodes_.size());
    nodes_.push_back(std::move(node));
    cons_.emplace(std::move(key), id);
    return id;
}

FormulaArena::Id FormulaArena::atom(int atom_index) const {
    if (atom_index < 0 || atom_index >= static_cast<int>(atoms_.size()))
        throw Error(ErrorCode::UnknownAtom, "atom index out of range");
    return atom_ids_[static_cast<std::size_t>(atom_index)];
}

FormulaArena::Id FormulaArena::atom(const std::string& name) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i] == name) return atom(static_cast<int>(i));
    throw Error(ErrorCode::UnknownAtom, "atom '" + name + "' not declared");
}

FormulaArena::Id FormulaArena::negate(Id a) {
    if (a == true_id_) return false_id_;
    if (a == false_id_) return true_id_;
    if (nodes_[a].kind == FormulaKind::Not) return nodes_[a].children[0];
    return intern({FormulaKind::Not, -1, {a}});
}

namespace {
// children sorted by id; a complementary pair collapses the connective.
bool has_complement(const std::vector<FormulaArena::Id>& xs, const FormulaArena& arena) {
    for (auto x : xs) {
        if (arena.kind(x) == FormulaKind::Not &&
            std::binary_search(xs.begin(), xs.end(), arena.children(x)[0]))
            return true;
    }
    return false;
}
} // namespace

FormulaArena::Id FormulaArena::conj(const std::vector<Id>& xs) {
    std::vector<Id> flat;
    for (Id x : xs) {
        if (x == false_id_) return false_id_;
        if (x == true_id_) continue;
        if (nodes_[x].kind == FormulaKind::And)
            flat.insert(flat.end(), nodes_[x].children.begin(), nodes_[x].children.end());
        else
            flat.push_back(x);
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return true_id_;
    if (flat.size() == 1) return flat[0];
    if (has_complement(flat, *this)) return false_id_;
    return intern({FormulaKind::And, -1, std::move(flat)});
}

FormulaArena::Id FormulaArena::disj(const std::vector<Id>& xs) {
    std::vector<Id> flat;
    for (Id x : xs) {
        if (x == true_id_) return true_id_;
        if (x == false_id_) continue;
        if (nodes_[x].kind == FormulaKind::Or)
            flat.insert(flat.end(), nodes_[x].children.begin(), nodes_[x].children.end());
        else
            flat.push_back(x);
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return false_id_;
    if (flat.size() == 1) return flat[0];
    if (has_complement(flat, *this)) return true_id_;
    return intern({FormulaKind::Or, -1, std::move(flat)});
}

FormulaArena::Id FormulaArena::conj(Id a, Id b) { return conj(std::vector<Id>{a, b}); }
FormulaArena::Id FormulaArena::disj(Id a, Id b) { return disj(std::vector<Id>{a, b}); }

FormulaArena::Id FormulaArena::next(Id a) {
    if (a == false_id_) return false_id_;
    return intern({FormulaKind::Next, -1, {a}});
}

FormulaArena::Id FormulaArena::until(Id a, Id b) {
    if (b == false_id_) return false_id_;
    if (b == true_id_) return nonempty_id_;
    if (a == false_id_) return b;
    return intern({FormulaKind::Until, -1, {a, b}});
}

FormulaArena::Id FormulaArena::progress(Id phi, Label l) {
    const Node& n = nodes_[phi];
    switch (n.kind) {
    case FormulaKind::True: return true_id_;
    case FormulaKind::False: return false_id_;
    case FormulaKind::Atom: return (l >> n.atom) & 1u ? true_id_ : false_id_;
    case FormulaKind::Not: return negate(progress(n.children[0], l));
    case FormulaKind::And: {
        std::vector<Id> out;
        out.reserve(n.children.size());
        for (Id c : n.children) out.push_back(progress(c, l));
        return conj(out);
    }
    case FormulaKind::Or: {
        std::vector<Id> out;
        out.reserve(n.children.size());
        for (Id c : n.children) out.push_back(progress(c, l));
        return disj(out);
    }
    case FormulaKind::Next:
        // Strong next: the residual additionally demands a nonempty suffix,
        // otherwise X true would hold at the last trace position.
        return conj(n.children[0], nonempty_id_);
    case FormulaKind::Until: {
        const Id pb = progress(n.children[1], l);
        const Id pa = progress(n.children[0], l);
        return disj(pb, conj(pa, phi));
    }
    }
    return false_id_;
}

bool FormulaArena::accepts_empty(Id phi) const {
    const Node& n = nodes_[phi];
    switch (n.kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Atom: return false;
    case FormulaKind::Not: return !accepts_empty(n.children[0]);
    case FormulaKind::And:
        for (Id c : n.children)
            if (!accepts_empty(c)) return false;
        return true;
    case FormulaKind::Or:
        for (Id c : n.children)
            if (accepts_empty(c)) return true;
        return false;
    case FormulaKind::Next: return false;
    case FormulaKind::Until: return false;
    }
    return false;
}

bool FormulaArena::trace_sat(Id phi, const std::vector<Label>& trace) const {
    if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "trace_sat requires a nonempty trace");
    std::unordered_map<std::uint64_t, bool> memo;
    return sat_at(phi, trace, 0, memo);
}

bool FormulaArena::sat_at(Id phi, const std::vector<Label>& trace, std::size_t pos,
                          std::unordered_map<std::uint64_t, bool>& memo) const {
    const std::uint64_t key = (static_cast<std::uint64_t>(phi) << 16) | pos;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Node& n = nodes_[phi];
    bool result = false;
    switch (n.kind) {
    case FormulaKind::True: result = true; break;
    case FormulaKind::False: result = false; break;
    case FormulaKind::Atom: result = (trace[pos] >> n.atom) & 1u; break;
    case FormulaKind::Not: result = !sat_at(n.children[0], trace, pos, memo); break;
    case FormulaKind::And:
        result = true;
        for (Id c : n.children)
            if (!sat_at(c, trace, pos, memo)) {
                result = false;
                break;
            }
        break;
    case FormulaKind::Or:
        result = false;
        for (Id c : n.children)
            if (sat_at(c, trace, pos, memo)) {
                result = true;
                break;
            }
        break;
    case FormulaKind::Next:
        result = pos + 1 < trace.size() && sat_at(n.children[0], trace, pos + 1, memo);
        break;
    case FormulaKind::Until:
        result = false;
        for (std::size_t j = pos; j < trace.size(); ++j) {
            if (sat_at(n.children[1], trace, j, memo)) {
                result = true;
                break;
            }
            if (!sat_at(n.children[0], trace, j, memo)) break;
        }
        break;
    }
    memo.emplace(key, result);
    return result;
}

std::string FormulaArena::to_string(Id id) const {
    const Node& n = nodes_[id];
    auto joined = [&](const char* op) {
        std::string s = "(";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i) s += op;
            s += to_string(n.children[i]);
        }
        return s + ")";
    };
    switch (n.kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Atom: return atoms_[n.atom];
    case FormulaKind::Not: return "!" + to_string(n.children[0]);
    case FormulaKind::And: return joined(" & ");
    case FormulaKind::Or: return joined(" | ");
    case FormulaKind::Next: return "X " + to_string(n.children[0]);
    case FormulaKind::Until: return "(" + to_string(n.children[0]) + " U " + to_string(n.children[1]) + ")";
    }
    return "?";
}

namespace {

struct Parser {
    FormulaArena& arena;
    const std::string& text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::SyntaxError, msg + " at position " + std::to_string(pos));
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(const char* tok) {
        skip_ws();
        const std::size_t len = std::char_traits<char>::length(tok);
        if (text.compare(pos, len, tok) == 0) {
            // Word tokens must not swallow identifier prefixes.
            if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
                const std::size_t end = pos + len;
                if (end < text.size() &&
                    (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
                    return false;
            }
            pos += len;
            return true;
        }
        return false;
    }

    std::string peek_word() {
        skip_ws();
        std::size_t end = pos;
        while (end < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
            ++end;
        return text.substr(pos, end - pos);
    }

    FormulaArena::Id expr() { return impl(); }

    FormulaArena::Id impl() {
        FormulaArena::Id lhs = disjunct();
        skip_ws();
        if (eat("->")) return arena.implies(lhs, impl());
        return lhs;
    }

    FormulaArena::Id disjunct() {
        FormulaArena::Id lhs = conjunct();
        while (true) {
            skip_ws();
            if (pos < text.size() && text[pos] == '|') {
                ++pos;
                lhs = arena.disj(lhs, conjunct());
            } else {
                return lhs;
            }
        }
    }

    FormulaArena::Id conjunct() {
        FormulaArena::Id lhs = until_chain();
        while (true) {
            skip_ws();
            if (pos < text.size() && text[pos] == '&') {
                ++pos;
                lhs = arena.conj(lhs, until_chain());
            } else {
                return lhs;
            }
        }
    }

    FormulaArena::Id until_chain() {
        FormulaArena::Id lhs = unary();
        skip_ws();
        if (eat("U")) return arena.until(lhs, until_chain());
        return lhs;
    }

    FormulaArena::Id unary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of formula");
        if (eat("!")) return arena.negate(unary());
        if (eat("X")) return arena.next(unary());
        if (eat("F")) return arena.eventually(unary());
        if (eat("G")) return arena.globally(unary());
        if (eat("(")) {
            FormulaArena::Id inner = expr();
            if (!eat(")")) fail("expected ')'");
            return inner;
        }
        if (eat("true")) return arena.tru();
        if (eat("false")) return arena.fls();
        const std::string word = peek_word();
        if (word.empty()) fail(std::string("unexpected character '") + text[pos] + "'");
        if (word == "U") fail("'U' is a binary operator");
        pos += word.size();
        return arena.atom(word); // throws UnknownAtom for undeclared names
    }
};

} // namespace

FormulaArena::Id parse_formula(FormulaArena& arena, const std::string& text) {
    Parser p{arena, text};
    FormulaArena::Id id = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return id;
}

Dfa build_dfa(FormulaArena& arena, FormulaArena::Id phi, std::size_t state_cap) {
    Dfa dfa;
    dfa.num_atoms = static_cast<int>(arena.atoms().size());
    const std::size_t alphabet = std::size_t{1} << dfa.num_atoms;

    std::unordered_map<FormulaArena::Id, int> state_of;
    std::vector<FormulaArena::Id> formulas;
    auto state_for = [&](FormulaArena::Id f) {
        auto it = state_of.find(f);
        if (it != state_of.end()) return it->second;
        if (formulas.size() >= state_cap)
            throw Error(ErrorCode::StateExplosion, "DFA exceeds the configured state cap");
        const int s = static_cast<int>(formulas.size());
        state_of.emplace(f, s);
        formulas.push_back(f);
        return s;
    };

    state_for(phi);
    dfa.init = 0;
    for (std::size_t s = 0; s < formulas.size(); ++s) {
        dfa.delta.resize((s + 1) * alphabet, 0);
        for (std::size_t l = 0; l < alphabet; ++l) {
            FormulaArena::Id residual = arena.progress(formulas[s], static_cast<Label>(l));
            // Prefix semantics: an accepting residual is absorbed into the
            // canonical true sink, freezing acceptance.
            if (arena.accepts_empty(residual)) residual = arena.tru();
            dfa.delta[s * alphabet + l] = state_for(residual);
        }
    }
    dfa.num_states = static_cast<int>(formulas.size());
    for (int s = 0; s < dfa.num_states; ++s) {
        if (formulas[static_cast<std::size_t>(s)] == arena.tru()) dfa.accepting = s;
        if (formulas[static_cast<std::size_t>(s)] == arena.fls()) dfa.rejecting = s;
        dfa.state_names.push_back(arena.to_string(formulas[static_cast<std::size_t>(s)]));
    }
    return dfa;
}

bool prefix_accepts(const Dfa& dfa, const std::vector<Label>& trace) {
    int z = dfa.init;
    for (Label l : trace) {
        z = dfa.step(z, l);
        if (dfa.is_accepting(z)) return true;
    }
    return false;
}

std::string dfa_to_dot(const Dfa& dfa) {
    std::ostringstream out;
    out << "digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n";
    out << "  __init [shape=point];\n  __init -> s" << dfa.init << ";\n";
    for (int s = 0; s < dfa.num_states; ++s) {
        out << "  s" << s << " [label=\"" << s << "\"";
        if (dfa.is_accepting(s)) out << ", shape=doublecircle";
        out << "];\n";
    }
    const std::size_t alphabet = std::size_t{1} << dfa.num_atoms;
    for (int s = 0; s < dfa.num_states; ++s)
        for (std::size_t l = 0; l < alphabet; ++l)
            out << "  s" << s << " -> s" << dfa.delta[static_cast<std::size_t>(s) * alphabet + l]
                << " [label=\"" << l << "\"];\n";
    out << "}\n";
    return out.str();
}

nlohmann::json dfa_to_json(const Dfa& dfa) {
    nlohmann::json j;
    j["num_states"] = dfa.num_states;
    j["init"] = dfa.init;
    j["accepting"] = dfa.accepting >= 0 ? nlohmann::json::array({dfa.accepting}) : nlohmann::json::array();
    j["rejecting"] = dfa.rejecting;
    j["num_atoms"] = dfa.num_atoms;
    j["states"] = dfa.state_names;
    const std::size_t alphabet = std::size_t{1} << dfa.num_atoms;
    nlohmann::json delta = nlohmann::json::array();
    for (int s = 0; s < dfa.num_states; ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t l = 0; l < alphabet; ++l)
            row.push_back(dfa.delta[static_cast<std::size_t>(s) * alphabet + l]);
        delta.push_back(std::move(row));
    }
    j["delta"] = std::move(delta);
    return j;
}

} // namespace umdp
