#pragma once

// Checking local predicates against the knowledge formulas they stand for,
// refinement sequences, and synthesis of the exact predicate.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evaluator.hpp"
#include "local_expr.hpp"
#include "protocol.hpp"
#include "qm.hpp"

namespace epi {

enum class Direction { candidate_true_knowledge_false, knowledge_true_candidate_false };

inline const char* to_string(Direction d) {
    return d == Direction::candidate_true_knowledge_false ? "candidate-true-knowledge-false"
                                                          : "knowledge-true-candidate-false";
}

struct Counterexample {
    std::string formula;
    AgentId agent = 0;
    std::size_t time = 0;
    std::optional<Direction> direction;  // set for candidate checks
    std::vector<Point> witnesses;        // primary first; optional partner second
};

struct CandidateVerdict {
    bool holds = true;
    std::optional<Counterexample> counterexample;

    explicit operator bool() const { return holds; }
};

// Value of a local predicate of `agent` at every run at `time`.
inline TruthVector predicate_truth(const InterpretedSystem& sys, const ExprPtr& predicate, AgentId agent,
                                   std::size_t time) {
    sys.check_agent(agent);
    sys.check_point({0, time});
    auto bound = LocalExpr::bind(predicate, sys.signature(), agent);
    TruthVector out(sys.run_count());
    std::map<StateId, std::uint8_t> cache;
    for (RunId r = 0; r < sys.run_count(); ++r) {
        StateId s = sys.state_id(r, time);
        auto it = cache.find(s);
        if (it == cache.end())
            it = cache.emplace(s, eval_expr(*bound, sys.state(s), time, &sys.signature()) != 0).first;
        out[r] = it->second;
    }
    return out;
}

namespace detail {

// The Know node of K_a(body) or !K_a(body).
inline const FormulaPtr& know_node(const FormulaPtr& f, AgentId agent) {
    const FormulaPtr& k = f->kind() == NodeKind::Not ? f->lhs() : f;
    if (k->kind() != NodeKind::Know || k->agent() != agent)
        throw UsageError("knowledge formula must be K[agent](...) or its negation for the checked agent");
    return k;
}

// A point of the witness's block whose body value differs from the witness's.
inline std::optional<Point> disagreeing_partner(Evaluator& ev, const FormulaPtr& know, Point witness) {
    const auto& body = ev.truth(know->lhs(), witness.time);
    const auto& part = ev.system().partition(know->agent(), witness.time);
    for (RunId r : part.block(part.block_of[witness.run]))
        if (r != witness.run && body[r] != body[witness.run]) return Point{r, witness.time};
    return std::nullopt;
}

// Re-checks a pair by direct evaluation before it is reported.
inline void validate_pair(const InterpretedSystem& sys, const FormulaPtr& know, Point a, Point b) {
    const auto& part = sys.partition(know->agent(), a.time);
    if (a.time != b.time || part.block_of[a.run] != part.block_of[b.run])
        throw std::logic_error("counterexample pair is not indistinguishable");
    if (eval_at(sys, know->lhs(), a) == eval_at(sys, know->lhs(), b))
        throw std::logic_error("counterexample pair agrees on the knowledge body");
}

}  // namespace detail

// Compares a local predicate with a knowledge formula K_a(body) (or its
// negation) at every point at `time`. The witness is the first failing run in
// canonical order.
inline CandidateVerdict check_candidate(const InterpretedSystem& sys, const ExprPtr& predicate,
                                        const FormulaPtr& know_formula, AgentId agent, std::size_t time) {
    const FormulaPtr& know = detail::know_node(know_formula, agent);
    auto cand = predicate_truth(sys, predicate, agent, time);
    Evaluator ev(sys);
    const auto& k = ev.truth(know_formula, time);
    for (RunId r = 0; r < sys.run_count(); ++r) {
        if (cand[r] == k[r]) continue;
        Counterexample cex;
        cex.formula = to_string(know_formula, sys.signature());
        cex.agent = agent;
        cex.time = time;
        cex.direction = cand[r] ? Direction::candidate_true_knowledge_false : Direction::knowledge_true_candidate_false;
        Point w{r, time};
        cex.witnesses.push_back(w);
        // A partner exists exactly when K is false at w and the body is not
        // constant on the block.
        if (auto partner = detail::disagreeing_partner(ev, know, w)) {
            detail::validate_pair(sys, know, w, *partner);
            cex.witnesses.push_back(*partner);
        }
        if ((predicate_truth(sys, predicate, agent, time)[r] != 0) == eval_at(sys, know_formula, w))
            throw std::logic_error("counterexample does not falsify the equivalence");
        return {false, std::move(cex)};
    }
    return {};
}

// Counterexample for a failed validity check: the witness point and, when a
// knowledge subformula of the skeleton is false there, a block partner that
// disagrees with the witness on its body.
inline Counterexample counterexample_for(const InterpretedSystem& sys, const FormulaPtr& f, AgentId agent,
                                         const Verdict& v) {
    if (v.holds || !v.witness) throw UsageError("verdict holds; no counterexample");
    Counterexample cex;
    cex.formula = to_string(f, sys.signature());
    cex.agent = agent;
    cex.time = v.witness->time;
    cex.witnesses.push_back(*v.witness);
    Evaluator ev(sys);
    if (auto gap = find_knowledge_gap(ev, f, *v.witness)) {
        if (auto partner = detail::disagreeing_partner(ev, gap->know, *v.witness)) {
            detail::validate_pair(sys, gap->know, *v.witness, *partner);
            cex.witnesses.push_back(*partner);
        }
    }
    if (eval_at(sys, f, *v.witness)) throw std::logic_error("witness does not falsify the formula");
    return cex;
}

struct NamedCandidate {
    std::string name;
    ExprPtr expr;
};

struct RefinementEntry {
    std::string name;
    bool holds = false;
    std::optional<Counterexample> counterexample;
};

struct RefinementReport {
    std::vector<RefinementEntry> entries;
    std::vector<std::string> warnings;  // monotonicity violations
    bool final_holds = false;
};

// System the candidate is checked in; rebuilt per candidate when the
// predicate feeds back into behaviour.
using SystemBuilder = std::function<std::shared_ptr<const InterpretedSystem>(const NamedCandidate&)>;

// Checks candidates in order and stops at the first that holds. Each
// candidate's truth set should contain its predecessor's; violations are
// reported as warnings, not errors.
inline RefinementReport refine_sequence(const SystemBuilder& build, const std::vector<NamedCandidate>& candidates,
                                        const FormulaBuilder& know, AgentId agent, std::size_t time) {
    if (candidates.empty()) throw UsageError("empty candidate list");
    RefinementReport rep;
    std::optional<TruthVector> previous;
    std::string previous_name;
    for (const auto& c : candidates) {
        auto sys = build(c);
        auto f = know(sys->signature());
        auto v = check_candidate(*sys, c.expr, f, agent, time);
        auto truth = predicate_truth(*sys, c.expr, agent, time);
        if (previous && previous->size() == truth.size()) {
            for (RunId r = 0; r < truth.size(); ++r) {
                if ((*previous)[r] && !truth[r]) {
                    rep.warnings.push_back("monotonicity: " + c.name + " is false at run " + std::to_string(r) +
                                           " where " + previous_name + " is true");
                    break;
                }
            }
        }
        previous = std::move(truth);
        previous_name = c.name;
        rep.entries.push_back({c.name, v.holds, v.counterexample});
        if (v.holds) {
            rep.final_holds = true;
            break;
        }
    }
    return rep;
}

// ---- synthesis ----

struct SynthesizedPredicate {
    AgentId agent = 0;
    std::size_t time = 0;
    std::vector<std::uint8_t> block_truth;  // per block of the agent's partition at `time`
    std::vector<std::string> view_vars;     // local names, in key order
    std::map<std::vector<Value>, bool> views;  // reachable views only
    bool view_exact = true;                 // knowledge is a function of the view
    std::optional<std::string> sop;         // minimized sum of products, if view_exact
    ExprPtr sop_expr;
    bool sop_minimal = false;

    // The truth table as a local expression; unreachable views map to false.
    ExprPtr table_expr() const {
        auto t = std::make_shared<TruthTable>();
        t->key_vars = view_vars;
        t->rows = views;
        return LocalExpr::table_lookup(t);
    }
};

namespace detail {

struct Encoding {
    std::vector<Domain> domains;
    std::vector<unsigned> width;
    unsigned bits = 0;

    explicit Encoding(std::vector<Domain> d) : domains(std::move(d)) {
        for (const auto& dom : domains) {
            unsigned w = 0;
            while ((std::size_t{1} << w) < dom.size()) ++w;
            width.push_back(w);
            bits += w;
        }
    }

    // Variables are laid out most significant first.
    std::uint32_t encode(const std::vector<Value>& view) const {
        std::uint32_t code = 0;
        for (std::size_t k = 0; k < view.size(); ++k)
            code = (code << width[k]) | static_cast<std::uint32_t>(view[k] - domains[k].lo);
        return code;
    }

    unsigned shift(std::size_t k) const {
        unsigned s = 0;
        for (std::size_t q = k + 1; q < width.size(); ++q) s += width[q];
        return s;
    }

    // Values of variable k allowed by the cube.
    std::vector<Value> allowed(const Cube& c, std::size_t k) const {
        std::vector<Value> out;
        const std::uint32_t field = ((1u << width[k]) - 1) << shift(k);
        for (Value v = domains[k].lo; v <= domains[k].hi; ++v) {
            std::uint32_t code = static_cast<std::uint32_t>(v - domains[k].lo) << shift(k);
            if ((code & c.mask & field) == (c.value & field)) out.push_back(v);
        }
        return out;
    }
};

inline std::string join_values(const std::vector<Value>& vs) {
    std::string out;
    for (std::size_t k = 0; k < vs.size(); ++k) out += (k ? "," : "") + std::to_string(vs[k]);
    return out;
}

}  // namespace detail

// The exact predicate: K's value per partition block, tabulated over the
// agent's view (values of view_vars at `time`) and minimized when the view
// determines it.
inline SynthesizedPredicate synthesize_predicate(const InterpretedSystem& sys, const FormulaPtr& know_formula,
                                                 AgentId agent, std::size_t time,
                                                 const std::vector<std::string>& view_vars) {
    detail::know_node(know_formula, agent);
    const auto& sig = sys.signature();
    SynthesizedPredicate out;
    out.agent = agent;
    out.time = time;
    out.view_vars = view_vars;
    Evaluator ev(sys);
    const auto& k = ev.truth(know_formula, time);
    const auto& part = sys.partition(agent, time);
    out.block_truth.assign(part.block_count(), 0);
    for (std::size_t b = 0; b < part.block_count(); ++b) out.block_truth[b] = k[part.block(b)[0]];

    std::vector<VarId> ids;
    std::vector<Domain> doms;
    for (const auto& v : view_vars) {
        auto id = sig.find_local(agent, v);
        if (!id) throw UsageError("unknown view variable " + v);
        if (sig.decl(*id).assigned_at.value_or(0) > time)
            throw UsageError("view variable " + v + " is unassigned at time " + std::to_string(time));
        ids.push_back(*id);
        doms.push_back(sig.decl(*id).domain);
    }
    for (RunId r = 0; r < sys.run_count(); ++r) {
        std::vector<Value> view;
        for (VarId id : ids) view.push_back(sys.value(r, time, id));
        auto [it, inserted] = out.views.emplace(view, k[r] != 0);
        if (!inserted && it->second != (k[r] != 0)) out.view_exact = false;
    }
    if (!out.view_exact) return out;

    detail::Encoding enc(doms);
    if (enc.bits > 16) return out;
    std::vector<std::uint32_t> on, reachable;
    for (const auto& [view, v] : out.views) {
        reachable.push_back(enc.encode(view));
        if (v) on.push_back(enc.encode(view));
    }
    std::sort(reachable.begin(), reachable.end());
    std::vector<std::uint32_t> dc;
    for (std::uint32_t m = 0; m < (1u << enc.bits); ++m)
        if (!std::binary_search(reachable.begin(), reachable.end(), m)) dc.push_back(m);
    auto qm = minimize(enc.bits, on, dc);
    out.sop_minimal = qm.exact_cover;

    std::string text;
    ExprPtr expr;
    for (const auto& cube : qm.cubes) {
        std::string term;
        ExprPtr texpr;
        auto add = [&](const std::string& lit, ExprPtr e) {
            term += (term.empty() ? "" : " && ") + lit;
            texpr = texpr ? e_and(texpr, e) : e;
        };
        for (std::size_t q = 0; q < view_vars.size(); ++q) {
            auto allowed = enc.allowed(cube, q);
            const auto& dom = doms[q];
            if (allowed.size() == dom.size()) continue;
            const auto& name = view_vars[q];
            if (dom.is_boolean()) {
                if (allowed.size() != 1) continue;
                add(allowed[0] ? name : "!" + name, allowed[0] ? e_var(name) : e_not(e_var(name)));
                continue;
            }
            std::vector<Value> missing;
            for (Value v = dom.lo; v <= dom.hi; ++v)
                if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) missing.push_back(v);
            ExprPtr any;
            for (Value v : allowed) any = any ? e_or(any, e_eq(name, v)) : e_eq(name, v);
            if (allowed.size() == 1) add(name + " == " + std::to_string(allowed[0]), any);
            else if (missing.size() == 1) add(name + " != " + std::to_string(missing[0]), e_not(e_eq(name, missing[0])));
            else add(name + " in {" + detail::join_values(allowed) + "}", any);
        }
        if (!texpr) {
            term = "true";
            texpr = e_true();
        }
        const bool paren = qm.cubes.size() > 1 && term.find(" && ") != std::string::npos;
        text += (text.empty() ? "" : " || ") + (paren ? "(" + term + ")" : term);
        expr = expr ? e_or(expr, texpr) : texpr;
    }
    if (!expr) {
        text = "false";
        expr = e_false();
    }
    out.sop = text;
    out.sop_expr = expr;
    return out;
}

// Observation classes (views) on which a candidate and a synthesized
// predicate disagree, in view order; the first is the minimal one.
struct ViewDifference {
    std::vector<Value> view;
    bool candidate = false;
    bool exact = false;
    RunId run = 0;  // first run showing the view
};

inline std::vector<ViewDifference> divergence(const InterpretedSystem& sys, const ExprPtr& candidate,
                                              const SynthesizedPredicate& synth) {
    auto cand = predicate_truth(sys, candidate, synth.agent, synth.time);
    const auto& sig = sys.signature();
    std::vector<VarId> ids;
    for (const auto& v : synth.view_vars) ids.push_back(*sig.find_local(synth.agent, v));
    std::map<std::vector<Value>, ViewDifference> diffs;
    for (RunId r = 0; r < sys.run_count(); ++r) {
        std::vector<Value> view;
        for (VarId id : ids) view.push_back(sys.value(r, synth.time, id));
        bool exact = synth.views.at(view);
        if ((cand[r] != 0) != exact && !diffs.contains(view)) diffs.emplace(view, ViewDifference{view, cand[r] != 0, exact, r});
    }
    std::vector<ViewDifference> out;
    for (auto& [_, d] : diffs) out.push_back(std::move(d));
    return out;
}

}  // namespace epi
