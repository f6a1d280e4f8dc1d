#pragma once

// Exact predicates for the case study: views, kc synthesis by time
// induction, and round-trip checks.

#include <memory>
#include <string>
#include <vector>

#include "../refine.hpp"
#include "cdc.hpp"
#include "specs.hpp"

namespace epi::dc {

// What the agent's local state shows at `time`: request, message and the
// round results so far.
inline std::vector<std::string> view_variables(const DcParams& p, std::size_t time) {
    std::vector<std::string> v{"slot_request", "msg"};
    for (std::size_t u = 1; u <= std::min(time, p.horizon()); ++u) v.push_back(indexed("rr", u));
    return v;
}

inline SynthesizedPredicate synthesize(const InterpretedSystem& sys, const DcParams& p, const FormulaPtr& know,
                                       AgentId agent, std::size_t time) {
    return synthesize_predicate(sys, know, agent, time, view_variables(p, time));
}

// Readable form of a synthesized predicate: the minimized expression when it
// exists, else the table.
inline ExprPtr best_expr(const SynthesizedPredicate& sp) { return sp.sop_expr ? sp.sop_expr : sp.table_expr(); }

struct KcSynthesis {
    std::vector<std::vector<SynthesizedPredicate>> per_slot;  // [slot-1][agent]
    SlotPredicate kc;
};

// kc for the mode's transmit condition, slot by slot. The condition for slot s
// is checked after step S+s-1, which depends only on kc for slots before s,
// so each slot is synthesized in a system carrying the earlier results.
inline KcSynthesis synthesize_kc(const DcParams& p, const Scenario& scenario, const PredicateSet& others,
                                 EngineMode engine = EngineMode::reduced) {
    KcSynthesis out;
    std::vector<std::vector<ExprPtr>> exprs(p.slots, std::vector<ExprPtr>(kAgents, e_false()));
    for (std::size_t s = 1; s <= p.slots; ++s) {
        PredicateSet preds = others;
        preds.kc = per_agent_slot(exprs, p);
        auto sys = generate_runs(build_cdc(p, preds), scenario, engine);
        auto& row = out.per_slot.emplace_back();
        for (AgentId i = 0; i < kAgents; ++i) {
            auto sp = synthesize(sys, p, transmit_condition(sys.signature(), p, i, s), i, p.pre_transmission_time(s));
            exprs[s - 1][i] = sp.view_exact ? best_expr(sp) : sp.table_expr();
            row.push_back(std::move(sp));
        }
    }
    out.kc = per_agent_slot(exprs, p);
    return out;
}

// Verdict of every instance of a specification, plus the first failure.
struct SpecReport {
    SpecId id;
    bool holds = true;
    std::size_t instances = 0;
    std::size_t failures = 0;
    std::optional<SpecInstance> first_failure;
    std::optional<Counterexample> counterexample;
};

inline SpecReport check_spec(const InterpretedSystem& sys, const DcParams& p, SpecId id,
                             std::optional<AgentId> agent = std::nullopt, std::optional<std::size_t> slot = std::nullopt) {
    SpecReport rep;
    rep.id = id;
    Evaluator ev(sys);
    for (auto& in : spec_instances(sys.signature(), p, id)) {
        if (agent && in.agent != *agent) continue;
        if (slot && in.slot != *slot) continue;
        ++rep.instances;
        auto v = check_valid_at(ev, in.formula, in.time);
        if (v.holds) continue;
        ++rep.failures;
        rep.holds = false;
        if (!rep.first_failure) {
            rep.counterexample = counterexample_for(sys, in.formula, in.agent, v);
            rep.first_failure = std::move(in);
        }
    }
    if (rep.instances == 0) throw UsageError("no instance of the specification matches the agent/slot selection");
    return rep;
}

}  // namespace epi::dc
