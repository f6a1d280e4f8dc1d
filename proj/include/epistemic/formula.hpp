#pragma once

// Temporal-epistemic formulas: atoms over the valuation, boolean connectives,
// K_i (knowledge under perfect recall) and X (next time). Implication,
// equivalence and "knows the value" are built from the core connectives.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "model.hpp"

namespace epi {

enum class NodeKind { True, Atom, Not, And, Or, Know, Next };
enum class Cmp { Eq, Ne };

struct Atom {
    VarId var = 0;
    Cmp cmp = Cmp::Eq;
    Value value = 0;

    bool operator==(const Atom&) const = default;
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
public:
    NodeKind kind() const { return kind_; }
    const Atom& atom() const { return atom_; }
    AgentId agent() const { return agent_; }
    const FormulaPtr& lhs() const { return lhs_; }  // also the operand of Not, Know, Next
    const FormulaPtr& rhs() const { return rhs_; }

    static FormulaPtr make(NodeKind k, Atom a, AgentId agent, FormulaPtr l, FormulaPtr r) {
        auto f = std::shared_ptr<Formula>(new Formula);
        f->kind_ = k;
        f->atom_ = a;
        f->agent_ = agent;
        f->lhs_ = std::move(l);
        f->rhs_ = std::move(r);
        return f;
    }

private:
    Formula() = default;

    NodeKind kind_ = NodeKind::True;
    Atom atom_;
    AgentId agent_ = 0;
    FormulaPtr lhs_, rhs_;
};

inline FormulaPtr f_true() { return Formula::make(NodeKind::True, {}, 0, nullptr, nullptr); }
inline FormulaPtr f_atom(VarId var, Cmp cmp, Value value) {
    return Formula::make(NodeKind::Atom, {var, cmp, value}, 0, nullptr, nullptr);
}
inline FormulaPtr f_not(FormulaPtr f) { return Formula::make(NodeKind::Not, {}, 0, std::move(f), nullptr); }
inline FormulaPtr f_false() { return f_not(f_true()); }
inline FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
    return Formula::make(NodeKind::And, {}, 0, std::move(a), std::move(b));
}
inline FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    return Formula::make(NodeKind::Or, {}, 0, std::move(a), std::move(b));
}
inline FormulaPtr f_know(AgentId agent, FormulaPtr f) {
    return Formula::make(NodeKind::Know, {}, agent, std::move(f), nullptr);
}
inline FormulaPtr f_next(FormulaPtr f) { return Formula::make(NodeKind::Next, {}, 0, std::move(f), nullptr); }

inline FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) { return f_or(f_not(std::move(a)), std::move(b)); }

// Both operands are shared, so each is evaluated once per point.
inline FormulaPtr f_iff(const FormulaPtr& a, const FormulaPtr& b) {
    return f_and(f_or(f_not(a), b), f_or(a, f_not(b)));
}

// Left-nested conjunction; the empty conjunction is true.
inline FormulaPtr f_and_all(std::span<const FormulaPtr> fs) {
    if (fs.empty()) return f_true();
    FormulaPtr out = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) out = f_and(out, fs[i]);
    return out;
}

// Left-nested disjunction; the empty disjunction is false.
inline FormulaPtr f_or_all(std::span<const FormulaPtr> fs) {
    if (fs.empty()) return f_false();
    FormulaPtr out = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) out = f_or(out, fs[i]);
    return out;
}

// Khat_i(x): the agent knows the value of x. For a boolean x this is
// K_i(x) || K_i(!x); larger domains disjoin over every value.
inline FormulaPtr f_knows_value(const Signature& sig, AgentId agent, VarId var) {
    const auto& d = sig.decl(var).domain;
    std::vector<FormulaPtr> parts;
    for (Value v = d.hi; v >= d.lo; --v) parts.push_back(f_know(agent, f_atom(var, Cmp::Eq, v)));
    return f_or_all(parts);
}

inline bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind() != b->kind()) return false;
    switch (a->kind()) {
        case NodeKind::True: return true;
        case NodeKind::Atom: return a->atom() == b->atom();
        case NodeKind::Know:
            return a->agent() == b->agent() && structurally_equal(a->lhs(), b->lhs());
        case NodeKind::Not:
        case NodeKind::Next: return structurally_equal(a->lhs(), b->lhs());
        case NodeKind::And:
        case NodeKind::Or:
            return structurally_equal(a->lhs(), b->lhs()) && structurally_equal(a->rhs(), b->rhs());
    }
    return false;
}

// Largest number of nested X operators.
inline std::size_t temporal_depth(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::True:
        case NodeKind::Atom: return 0;
        case NodeKind::Next: return 1 + temporal_depth(*f.lhs());
        case NodeKind::Not:
        case NodeKind::Know: return temporal_depth(*f.lhs());
        case NodeKind::And:
        case NodeKind::Or: return std::max(temporal_depth(*f.lhs()), temporal_depth(*f.rhs()));
    }
    return 0;
}

inline bool mentions_knowledge(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Know: return true;
        case NodeKind::True:
        case NodeKind::Atom: return false;
        case NodeKind::Not:
        case NodeKind::Next: return mentions_knowledge(*f.lhs());
        case NodeKind::And:
        case NodeKind::Or: return mentions_knowledge(*f.lhs()) || mentions_knowledge(*f.rhs());
    }
    return false;
}

template <typename Fn>
void for_each_atom(const Formula& f, Fn&& fn) {
    switch (f.kind()) {
        case NodeKind::True: return;
        case NodeKind::Atom: fn(f.atom()); return;
        case NodeKind::Not:
        case NodeKind::Next:
        case NodeKind::Know: for_each_atom(*f.lhs(), fn); return;
        case NodeKind::And:
        case NodeKind::Or:
            for_each_atom(*f.lhs(), fn);
            for_each_atom(*f.rhs(), fn);
            return;
    }
}

namespace detail {

inline int precedence(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Or: return 1;
        case NodeKind::And: return 2;
        default: return 3;
    }
}

inline void print(const Formula& f, const Signature& sig, std::string& out) {
    auto child = [&](const Formula& c, bool parens) {
        if (parens) out += '(';
        print(c, sig, out);
        if (parens) out += ')';
    };
    switch (f.kind()) {
        case NodeKind::True: out += "true"; return;
        case NodeKind::Atom:
            out += sig.decl(f.atom().var).name;
            out += f.atom().cmp == Cmp::Eq ? " == " : " != ";
            out += std::to_string(f.atom().value);
            return;
        case NodeKind::Not:
            if (f.lhs()->kind() == NodeKind::True) {
                out += "false";
                return;
            }
            out += '!';
            child(*f.lhs(), precedence(*f.lhs()) < 3);
            return;
        case NodeKind::Next:
            out += "X ";
            child(*f.lhs(), precedence(*f.lhs()) < 3);
            return;
        case NodeKind::Know:
            out += "K[" + sig.agent_name(f.agent()) + "](";
            print(*f.lhs(), sig, out);
            out += ')';
            return;
        case NodeKind::And:
        case NodeKind::Or: {
            int p = precedence(f);
            child(*f.lhs(), precedence(*f.lhs()) < p);
            out += f.kind() == NodeKind::And ? " && " : " || ";
            child(*f.rhs(), precedence(*f.rhs()) <= p);
            return;
        }
    }
}

}  // namespace detail

// Prints in the concrete grammar accepted by parse_formula; parsing the output
// yields a structurally equal tree.
inline std::string to_string(const FormulaPtr& f, const Signature& sig) {
    std::string out;
    detail::print(*f, sig, out);
    return out;
}

}  // namespace epi
