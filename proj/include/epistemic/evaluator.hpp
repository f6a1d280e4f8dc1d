#pragma once

// Bottom-up labelling of formulas over all points of one time layer.
//
// truth(f, t) is a byte per run. Knowledge is computed per partition block:
// K_i(f) holds in a block iff f holds at every member, so one pass over the
// runs aggregates and a second pass broadcasts. Results are memoized per
// (formula node, time) for the lifetime of the evaluator.

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "formula.hpp"
#include "model.hpp"

namespace epi {

using TruthVector = std::vector<std::uint8_t>;

class Evaluator {
public:
    explicit Evaluator(const InterpretedSystem& system) : sys_(system) {}

    const InterpretedSystem& system() const { return sys_; }

    const TruthVector& truth(const FormulaPtr& f, std::size_t time) {
        if (time + temporal_depth(*f) >= sys_.layers())
            throw UsageError("temporal depth of formula exceeds the horizon at time " +
                             std::to_string(time));
        return label(f, time);
    }

    bool at(const FormulaPtr& f, Point p) {
        sys_.check_point(p);
        return truth(f, p.time)[p.run] != 0;
    }

    void clear() { memo_.clear(); }

private:
    const TruthVector& label(const FormulaPtr& f, std::size_t time) {
        auto key = std::make_pair(f.get(), time);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second.second;

        const std::size_t n = sys_.run_count();
        TruthVector out(n);
        switch (f->kind()) {
            case NodeKind::True: std::fill(out.begin(), out.end(), 1); break;
            case NodeKind::Atom: {
                const Atom& a = f->atom();
                bool eq = a.cmp == Cmp::Eq;
                for (RunId r = 0; r < n; ++r) out[r] = (sys_.value(r, time, a.var) == a.value) == eq;
                break;
            }
            case NodeKind::Not: {
                const auto& x = label(f->lhs(), time);
                for (std::size_t r = 0; r < n; ++r) out[r] = !x[r];
                break;
            }
            case NodeKind::And:
            case NodeKind::Or: {
                const auto& x = label(f->lhs(), time);
                const auto& y = label(f->rhs(), time);
                if (f->kind() == NodeKind::And)
                    for (std::size_t r = 0; r < n; ++r) out[r] = x[r] & y[r];
                else
                    for (std::size_t r = 0; r < n; ++r) out[r] = x[r] | y[r];
                break;
            }
            case NodeKind::Next: out = label(f->lhs(), time + 1); break;
            case NodeKind::Know: {
                const auto& body = label(f->lhs(), time);
                const auto& part = sys_.partition(f->agent(), time);
                std::vector<std::uint8_t> all(part.block_count(), 1);
                for (std::size_t r = 0; r < n; ++r) all[part.block_of[r]] &= body[r];
                for (std::size_t r = 0; r < n; ++r) out[r] = all[part.block_of[r]];
                break;
            }
        }
        auto [it, _] = memo_.emplace(key, std::make_pair(f, std::move(out)));
        return it->second.second;
    }

    const InterpretedSystem& sys_;
    // The FormulaPtr keeps the node alive so its address cannot be reused.
    std::map<std::pair<const Formula*, std::size_t>, std::pair<FormulaPtr, TruthVector>> memo_;
};

inline bool eval_at(const InterpretedSystem& system, const FormulaPtr& f, Point p) {
    Evaluator ev(system);
    return ev.at(f, p);
}

// A knowledge subformula that is false at `witness`, together with the first
// point of the agent's block where its body fails.
struct KnowledgeGap {
    FormulaPtr know;
    Point partner;
};

// Searches the boolean skeleton of f (not below another K or X) for a
// knowledge operator that is false at the witness point.
inline std::optional<KnowledgeGap> find_knowledge_gap(Evaluator& ev, const FormulaPtr& f, Point witness) {
    switch (f->kind()) {
        case NodeKind::Know: {
            if (ev.truth(f, witness.time)[witness.run]) return std::nullopt;
            const auto& body = ev.truth(f->lhs(), witness.time);
            const auto& part = ev.system().partition(f->agent(), witness.time);
            for (RunId r : part.block(part.block_of[witness.run]))
                if (!body[r]) return KnowledgeGap{f, {r, witness.time}};
            return std::nullopt;
        }
        case NodeKind::Not: return find_knowledge_gap(ev, f->lhs(), witness);
        case NodeKind::And:
        case NodeKind::Or:
            if (auto g = find_knowledge_gap(ev, f->lhs(), witness)) return g;
            return find_knowledge_gap(ev, f->rhs(), witness);
        default: return std::nullopt;
    }
}

struct Verdict {
    bool holds = true;
    std::optional<Point> witness;  // first failing point in canonical run order
    std::optional<Point> partner;  // same block as the witness, knowledge body false there

    explicit operator bool() const { return holds; }
};

inline Verdict check_valid_at(Evaluator& ev, const FormulaPtr& f, std::size_t time) {
    if (time > ev.system().horizon()) throw UsageError("check time beyond horizon");
    const auto& t = ev.truth(f, time);
    for (RunId r = 0; r < t.size(); ++r) {
        if (t[r]) continue;
        Verdict v{false, Point{r, time}, std::nullopt};
        if (auto gap = find_knowledge_gap(ev, f, *v.witness)) v.partner = gap->partner;
        return v;
    }
    return {};
}

inline Verdict check_valid_at(const InterpretedSystem& system, const FormulaPtr& f, std::size_t time) {
    Evaluator ev(system);
    return check_valid_at(ev, f, time);
}

// Evaluates a knowledge-free, time-free formula directly on one valuation.
inline bool eval_propositional(const Formula& f, std::span<const Value> valuation) {
    switch (f.kind()) {
        case NodeKind::True: return true;
        case NodeKind::Atom: return (valuation[f.atom().var] == f.atom().value) == (f.atom().cmp == Cmp::Eq);
        case NodeKind::Not: return !eval_propositional(*f.lhs(), valuation);
        case NodeKind::And: return eval_propositional(*f.lhs(), valuation) && eval_propositional(*f.rhs(), valuation);
        case NodeKind::Or: return eval_propositional(*f.lhs(), valuation) || eval_propositional(*f.rhs(), valuation);
        case NodeKind::Know:
        case NodeKind::Next: throw UsageError("constraint must not mention knowledge or time");
    }
    return false;
}

}  // namespace epi
