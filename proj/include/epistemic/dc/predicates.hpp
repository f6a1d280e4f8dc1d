#pragma once

// Candidate predicates in the local-expression grammar.
//
//   e    := e "||" e | e "&&" e | e ("==" | "!=") e | "!" e | "(" e ")" | "true" | "false"
//         | "rr[" idx "]" | "kc[" idx "]" | "rcvd0[" idx "]" | "rcvd1[" idx "]" | "msg" | "dlvrd"
//         | "slot_request" ("==" | "!=") term | "slot_request in" set
//         | "any t in" INT ".." INT "except" term ":" "rr[t]"
//         | NAME | NAME "(" INT ")"            reference to another predicate
//   idx  := INT | "s" | "s+" INT | "slot_request"   (the last only inside rr[..])
//   term := INT | "s"
//   set  := "{" INT {"," INT} "}" | INT ".." INT ["except" term]
//
// Expressions are slot-parameterized: "s" is bound when the predicate is
// instantiated for a slot. A bare reference uses the current slot.

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace epi::dc {

struct PredicateDef {
    std::string name;
    std::string target;  // kc, conflict_free, rcvd0, rcvd1, dlvrd
    std::string expr;
};

inline const std::vector<std::string>& predicate_targets() {
    static const std::vector<std::string> t{"kc", "conflict_free", "rcvd0", "rcvd1", "dlvrd"};
    return t;
}

inline bool is_target(std::string_view t) {
    for (const auto& x : predicate_targets())
        if (x == t) return true;
    return false;
}

// Named predicates available to references.
using PredicateLibrary = std::map<std::string, PredicateDef, std::less<>>;

namespace detail {

class PredicateParser {
public:
    PredicateParser(std::string_view text, const DcParams& p, std::size_t slot, const PredicateLibrary& lib,
                    int depth)
        : text_(text), p_(p), slot_(slot), lib_(lib), depth_(depth) {}

    ExprPtr parse() {
        auto e = parse_or();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected input '" + std::string(text_.substr(pos_, 12)) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) != tok) return false;
        // keywords must not run into an identifier
        if (std::isalpha(static_cast<unsigned char>(tok.back())) && pos_ + tok.size() < text_.size() &&
            ident_char(text_[pos_ + tok.size()]))
            return false;
        pos_ += tok.size();
        return true;
    }

    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }

    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string ident() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size() || !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            fail("expected identifier");
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    bool peek_digit() {
        skip_ws();
        return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]));
    }

    std::size_t integer() {
        if (!peek_digit()) fail("expected integer");
        std::size_t v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(text_[pos_++] - '0');
            if (v > 1000) fail("integer out of range");
        }
        return v;
    }

    std::size_t slot_param() {
        if (slot_ == 0) fail("slot parameter s is not bound for this predicate");
        return slot_;
    }

    // INT | "s"
    std::size_t term() {
        if (peek_digit()) return integer();
        std::size_t at = pos_;
        if (ident() != "s") {
            pos_ = at;
            fail("expected integer or s");
        }
        return slot_param();
    }

    std::size_t index(std::size_t hi) {
        std::size_t v;
        if (peek_digit()) {
            v = integer();
        } else {
            std::size_t at = pos_;
            if (ident() != "s") {
                pos_ = at;
                fail("expected index");
            }
            v = slot_param();
            if (accept("+")) v += integer();
        }
        if (v < 1 || v > hi) fail("index " + std::to_string(v) + " outside 1.." + std::to_string(hi));
        return v;
    }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (accept("||")) lhs = e_or(lhs, parse_and());
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_cmp();
        while (accept("&&")) lhs = e_and(lhs, parse_cmp());
        return lhs;
    }

    ExprPtr parse_cmp() {
        auto lhs = parse_unary();
        if (accept("==")) return e_eq(lhs, parse_unary());
        if (accept("!=")) return e_ne(lhs, parse_unary());
        return lhs;
    }

    ExprPtr parse_unary() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '!' && text_.substr(pos_, 2) != "!=") {
            ++pos_;
            return e_not(parse_unary());
        }
        return parse_primary();
    }

    ExprPtr any_of(const std::set<std::size_t>& slots, const std::string& base) {
        ExprPtr out = e_false();
        bool first = true;
        for (std::size_t t : slots) {
            auto v = e_var(indexed(base, t));
            out = first ? v : e_or(out, v);
            first = false;
        }
        return out;
    }

    std::set<std::size_t> range_set() {
        std::set<std::size_t> out;
        if (accept("{")) {
            do out.insert(integer());
            while (accept(","));
            expect("}");
        } else {
            std::size_t lo = integer();
            expect("..");
            std::size_t hi = integer();
            if (hi < lo) fail("empty range");
            for (std::size_t t = lo; t <= hi; ++t) out.insert(t);
            if (accept("except")) out.erase(term());
        }
        return out;
    }

    ExprPtr slot_request_set(const std::set<std::size_t>& values) {
        ExprPtr out = e_false();
        bool first = true;
        for (std::size_t v : values) {
            if (v > p_.slots) fail("slot value " + std::to_string(v) + " outside 0.." + std::to_string(p_.slots));
            auto eq = e_eq("slot_request", static_cast<Value>(v));
            out = first ? eq : e_or(out, eq);
            first = false;
        }
        return out;
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (accept("(")) {
            auto e = parse_or();
            expect(")");
            return e;
        }
        std::size_t at = pos_;
        std::string word = ident();
        if (word == "true") return e_true();
        if (word == "false") return e_false();
        if (word == "msg" || word == "dlvrd") return e_var(word);
        if (word == "any") {
            expect("t");
            expect("in");
            std::size_t lo = integer();
            expect("..");
            std::size_t hi = integer();
            std::set<std::size_t> slots;
            for (std::size_t t = lo; t <= hi; ++t) slots.insert(t);
            if (accept("except")) slots.erase(term());
            expect(":");
            expect("rr");
            expect("[");
            expect("t");
            expect("]");
            for (std::size_t t : slots)
                if (t < 1 || t > p_.horizon()) fail("round " + std::to_string(t) + " out of range");
            return any_of(slots, "rr");
        }
        if (word == "slot_request") {
            if (accept("==")) return slot_request_set({term()});
            if (accept("!=")) return e_not(slot_request_set({term()}));
            if (accept("in")) return slot_request_set(range_set());
            fail("expected comparison after slot_request");
        }
        if (word == "rr" || word == "kc" || word == "rcvd0" || word == "rcvd1") {
            expect("[");
            if (word == "rr" && accept("slot_request")) {
                // rr indexed by the agent's own request: true iff it requests
                // some slot t and rr[t] holds.
                expect("]");
                ExprPtr out = e_false();
                for (std::size_t t = 1; t <= p_.slots; ++t)
                    out = t == 1 ? e_and(e_eq("slot_request", 1), e_var(indexed("rr", 1)))
                                 : e_or(out, e_and(e_eq("slot_request", static_cast<Value>(t)), e_var(indexed("rr", t))));
                return out;
            }
            std::size_t k = index(word == "rr" ? p_.horizon() : p_.slots);
            expect("]");
            return e_var(indexed(word, k));
        }
        // Reference to a named predicate.
        auto it = lib_.find(word);
        if (it == lib_.end()) throw ParseError("unknown name " + word, at);
        std::size_t s = slot_;
        if (accept("(")) {
            s = integer();
            expect(")");
            if (s < 1 || s > p_.slots) fail("slot " + std::to_string(s) + " out of range");
        }
        if (depth_ > 16) throw ParseError("predicate references nest too deeply at " + word, at);
        try {
            return PredicateParser(it->second.expr, p_, s, lib_, depth_ + 1).parse();
        } catch (const ParseError& e) {
            throw ParseError("in " + word + ": " + e.what(), at);
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    const DcParams& p_;
    std::size_t slot_;
    const PredicateLibrary& lib_;
    int depth_;
};

}  // namespace detail

// Parses `text` with s bound to `slot` (0: unbound).
inline ExprPtr parse_predicate(std::string_view text, const DcParams& p, std::size_t slot,
                               const PredicateLibrary& lib = {}) {
    return detail::PredicateParser(text, p, slot, lib, 0).parse();
}

// The built-in predicates, written out for S slots. "_literal" variants keep
// the published expressions as closely as they type-check; "_final" variants
// add the corrections the checker needs.
inline PredicateDef builtin_predicate(std::string_view name, const DcParams& p) {
    const std::string S = std::to_string(p.slots);
    const std::string others = "(any t in 1.." + S + " except s: rr[t])";
    const std::string tx = "rr[s+" + S + "]";
    const std::string n(name);
    if (n == "kc_guess") return {n, "kc", "!(slot_request == s && !rr[s])"};
    if (n == "cf1") return {n, "conflict_free", "rr[s] && " + others};
    if (n == "cf2") return {n, "conflict_free", "cf1 || (rr[s] && slot_request in 1.." + S + " except s && !rr[slot_request])"};
    if (n == "cf3") return {n, "conflict_free", "cf2 || (rr[s] && slot_request != s)"};
    auto rcvd = [&](const std::string& bit, bool with_rr_s) {
        std::string first = "(rr[s] && cf3 && slot_request != s && " + (bit == "1" ? tx : "!" + tx) + ")";
        std::string second = "(slot_request == s && " + std::string(with_rr_s ? "rr[s] && " : "") + tx +
                             " != msg && !" + others + ")";
        return first + " || " + second;
    };
    if (n == "rcvd1_g1") return {n, "rcvd1", "rr[s] && cf3 && slot_request != s && " + tx};
    if (n == "rcvd0_g1") return {n, "rcvd0", "rr[s] && cf3 && slot_request != s && !" + tx};
    if (n == "rcvd1_final") return {n, "rcvd1", rcvd("1", true)};
    if (n == "rcvd0_final") return {n, "rcvd0", rcvd("0", true)};
    if (n == "rcvd1_literal") return {n, "rcvd1", rcvd("1", false)};
    if (n == "rcvd0_literal") return {n, "rcvd0", rcvd("0", false)};
    if (n == "dlvrd_final") {
        std::string e = "slot_request == 0";
        for (std::size_t t = 1; t <= p.slots; ++t)
            e += " || (slot_request == " + std::to_string(t) + " && cf3(" + std::to_string(t) + "))";
        return {n, "dlvrd", e};
    }
    throw UsageError("unknown predicate " + n);
}

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"kc_guess",    "cf1",         "cf2",           "cf3",
                                                "rcvd1_g1",    "rcvd0_g1",    "rcvd1_final",   "rcvd0_final",
                                                "rcvd1_literal", "rcvd0_literal", "dlvrd_final"};
    return names;
}

inline PredicateLibrary builtin_library(const DcParams& p) {
    PredicateLibrary lib;
    for (const auto& n : builtin_names()) lib.emplace(n, builtin_predicate(n, p));
    return lib;
}

// Expression for one agent and slot (the slot is ignored by slot-free
// targets). Predicates read only the agent's own locals; the agent parameter
// lets synthesized tables differ between agents.
using SlotPredicate = std::function<ExprPtr(AgentId agent, std::size_t slot)>;

inline SlotPredicate compile_predicate(const PredicateDef& def, const DcParams& p, PredicateLibrary lib = {}) {
    if (!is_target(def.target)) throw UsageError("unknown predicate target " + def.target);
    if (lib.empty()) lib = builtin_library(p);
    auto shared = std::make_shared<const PredicateLibrary>(std::move(lib));
    std::string expr = def.expr;
    bool slotted = def.target != "dlvrd";
    // Parse once for every slot up front so errors surface at load time.
    std::vector<ExprPtr> per_slot;
    for (std::size_t s = 1; s <= p.slots; ++s) per_slot.push_back(parse_predicate(expr, p, slotted ? s : 0, *shared));
    return [per_slot, p](AgentId, std::size_t s) { return per_slot.at(p.check_slot(s) - 1); };
}

inline SlotPredicate builtin_slot_predicate(std::string_view name, const DcParams& p) {
    return compile_predicate(builtin_predicate(name, p), p);
}

// One expression per (slot, agent), e.g. synthesized truth tables.
inline SlotPredicate per_agent_slot(std::vector<std::vector<ExprPtr>> exprs, const DcParams& p) {
    if (exprs.size() != p.slots) throw UsageError("one expression list per slot required");
    for (const auto& e : exprs)
        if (e.size() != kAgents) throw UsageError("one expression per agent required");
    return [exprs, p](AgentId i, std::size_t s) { return exprs.at(p.check_slot(s) - 1).at(i); };
}

inline SlotPredicate constant_predicate(bool v) {
    return [v](AgentId, std::size_t) { return v ? e_true() : e_false(); };
}

struct PredicateSet {
    SlotPredicate kc;
    SlotPredicate rcvd0;
    SlotPredicate rcvd1;
    SlotPredicate dlvrd;  // called with slot 1
};

// kc_guess, rcvd0_final, rcvd1_final, dlvrd_final.
inline PredicateSet default_predicates(const DcParams& p) {
    return {builtin_slot_predicate("kc_guess", p), builtin_slot_predicate("rcvd0_final", p),
            builtin_slot_predicate("rcvd1_final", p), builtin_slot_predicate("dlvrd_final", p)};
}

}  // namespace epi::dc
