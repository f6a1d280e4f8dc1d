#pragma once

// Expressions over one agent's local variables, as used in agent programs and
// in candidate predicates. Variables are referred to by their local name
// ("rr[3]", "slot_request") and bound to an agent's qualified variables before
// evaluation. Reading a history variable before its assignment time is a
// model error.

#include <algorithm>
#include <map>
#include <span>
#include <memory>
#include <string>
#include <vector>

#include "model.hpp"

namespace epi {

enum class ExprKind { Const, Var, Not, And, Or, Xor, Eq, Table };

// Truth table over a list of local variables; rows absent from the map take
// the fallback value.
struct TruthTable {
    std::vector<std::string> key_vars;
    std::map<std::vector<Value>, bool> rows;
    bool fallback = false;
};

class LocalExpr;
using ExprPtr = std::shared_ptr<const LocalExpr>;

class LocalExpr {
public:
    ExprKind kind() const { return kind_; }
    Value constant() const { return constant_; }
    const std::string& name() const { return name_; }
    const std::vector<ExprPtr>& args() const { return args_; }
    const std::shared_ptr<const TruthTable>& table() const { return table_; }
    bool bound() const { return bound_; }
    VarId var() const { return var_; }
    std::size_t available_from() const { return available_from_; }
    const std::vector<VarId>& key_ids() const { return key_ids_; }
    const std::vector<std::size_t>& key_from() const { return key_from_; }

    static ExprPtr constant(Value v) {
        auto e = blank(ExprKind::Const);
        e->constant_ = v;
        return e;
    }
    static ExprPtr var(std::string name) {
        auto e = blank(ExprKind::Var);
        e->name_ = std::move(name);
        return e;
    }
    static ExprPtr op(ExprKind k, std::vector<ExprPtr> args) {
        auto e = blank(k);
        e->args_ = std::move(args);
        return e;
    }
    static ExprPtr table_lookup(std::shared_ptr<const TruthTable> t) {
        auto e = blank(ExprKind::Table);
        e->table_ = std::move(t);
        return e;
    }

    // Resolves variable names against the agent's qualified variables.
    static ExprPtr bind(const ExprPtr& e, const Signature& sig, AgentId agent) {
        auto out = std::make_shared<LocalExpr>(*e);
        out->bound_ = true;
        auto resolve = [&](const std::string& local, std::size_t& from) {
            auto id = sig.find_local(agent, local);
            if (!id) throw UsageError("agent " + sig.agent_name(agent) + " has no local variable " + local);
            from = sig.decl(*id).assigned_at.value_or(0);
            return *id;
        };
        switch (e->kind_) {
            case ExprKind::Var: out->var_ = resolve(e->name_, out->available_from_); break;
            case ExprKind::Table: {
                out->key_ids_.clear();
                out->key_from_.clear();
                for (const auto& k : e->table_->key_vars) {
                    std::size_t from = 0;
                    out->key_ids_.push_back(resolve(k, from));
                    out->key_from_.push_back(from);
                }
                break;
            }
            default:
                for (auto& a : out->args_) a = bind(a, sig, agent);
        }
        return out;
    }

private:
    static std::shared_ptr<LocalExpr> blank(ExprKind k) {
        auto e = std::make_shared<LocalExpr>();
        e->kind_ = k;
        return e;
    }

    ExprKind kind_ = ExprKind::Const;
    Value constant_ = 0;
    std::string name_;
    std::vector<ExprPtr> args_;
    std::shared_ptr<const TruthTable> table_;
    bool bound_ = false;
    VarId var_ = 0;
    std::size_t available_from_ = 0;
    std::vector<VarId> key_ids_;
    std::vector<std::size_t> key_from_;
};

inline ExprPtr e_const(Value v) { return LocalExpr::constant(v); }
inline ExprPtr e_true() { return e_const(1); }
inline ExprPtr e_false() { return e_const(0); }
inline ExprPtr e_var(std::string name) { return LocalExpr::var(std::move(name)); }
inline ExprPtr e_not(ExprPtr a) { return LocalExpr::op(ExprKind::Not, {std::move(a)}); }
inline ExprPtr e_and(ExprPtr a, ExprPtr b) { return LocalExpr::op(ExprKind::And, {std::move(a), std::move(b)}); }
inline ExprPtr e_or(ExprPtr a, ExprPtr b) { return LocalExpr::op(ExprKind::Or, {std::move(a), std::move(b)}); }
inline ExprPtr e_xor(ExprPtr a, ExprPtr b) { return LocalExpr::op(ExprKind::Xor, {std::move(a), std::move(b)}); }
inline ExprPtr e_eq(ExprPtr a, ExprPtr b) { return LocalExpr::op(ExprKind::Eq, {std::move(a), std::move(b)}); }
inline ExprPtr e_ne(ExprPtr a, ExprPtr b) { return e_not(e_eq(std::move(a), std::move(b))); }
inline ExprPtr e_eq(std::string var, Value v) { return e_eq(e_var(std::move(var)), e_const(v)); }

// Evaluates a bound expression on a valuation observed at `time`.
inline Value eval_expr(const LocalExpr& e, std::span<const Value> valuation, std::size_t time,
                       const Signature* sig = nullptr) {
    if (!e.bound()) throw UsageError("expression evaluated before binding");
    auto unassigned = [&](VarId v) {
        std::string name = sig ? sig->decl(v).name : "#" + std::to_string(v);
        throw ModelError("read of unassigned history variable " + name + " at time " + std::to_string(time));
    };
    switch (e.kind()) {
        case ExprKind::Const: return e.constant();
        case ExprKind::Var:
            if (time < e.available_from()) unassigned(e.var());
            return valuation[e.var()];
        case ExprKind::Not: return !eval_expr(*e.args()[0], valuation, time, sig);
        case ExprKind::And:
            return eval_expr(*e.args()[0], valuation, time, sig) && eval_expr(*e.args()[1], valuation, time, sig);
        case ExprKind::Or:
            return eval_expr(*e.args()[0], valuation, time, sig) || eval_expr(*e.args()[1], valuation, time, sig);
        case ExprKind::Xor:
            return (eval_expr(*e.args()[0], valuation, time, sig) != 0) !=
                   (eval_expr(*e.args()[1], valuation, time, sig) != 0);
        case ExprKind::Eq:
            return eval_expr(*e.args()[0], valuation, time, sig) == eval_expr(*e.args()[1], valuation, time, sig);
        case ExprKind::Table: {
            for (std::size_t k = 0; k < e.key_ids().size(); ++k)
                if (time < e.key_from()[k]) unassigned(e.key_ids()[k]);
            std::vector<Value> key;
            key.reserve(e.key_ids().size());
            for (VarId v : e.key_ids()) key.push_back(valuation[v]);
            auto it = e.table()->rows.find(key);
            return it == e.table()->rows.end() ? e.table()->fallback : it->second;
        }
    }
    return 0;
}

}  // namespace epi
