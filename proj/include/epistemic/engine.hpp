#pragma once

// Lock-step execution of agent programs and generation of the run set.
//
// naive:   every key schedule is enumerated. Agents observe their own locals,
//          their two ring keys and every announcement said[j].
// reduced: keys are quotiented out. Agent i observes its own locals, its own
//          contribution c and the XOR ox of the other contributions. With three
//          agents the one key unknown to i masks the two other announcements
//          down to exactly that XOR, which is what makes the two engines agree.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "evaluator.hpp"
#include "protocol.hpp"

namespace epi {

struct EngineOptions {
    EngineMode mode = EngineMode::reduced;
    std::size_t max_runs = std::size_t{1} << 24;
    // Test hook for the engine oracle: the reduced engine lets every agent see
    // every contribution, as if the keys were absent.
    bool leak_contributions = false;
};

struct CompiledStatement {
    enum class Kind { Announce, IfKnowledge, AssignLocal, AssignKnowledge } kind;
    ExprPtr bit;  // Announce / then-branch / AssignLocal value
    ExprPtr else_bit;
    FormulaPtr formula;  // IfKnowledge test / AssignKnowledge formula
    VarId target = 0;
};

struct CompiledAgent {
    AgentId id = 0;
    std::vector<std::vector<CompiledStatement>> phases;
    VarId c = 0;
    VarId ox = 0;
    std::vector<VarId> rr;  // rr[u], index 0 unused
    std::vector<VarId> free_locals;
};

struct CompiledModel {
    std::shared_ptr<Signature> sig;
    EngineOptions options;
    std::size_t horizon = 0;
    std::vector<CompiledAgent> agents;
    std::vector<VarId> keys;  // naive only, one per ring edge
    std::vector<VarId> said;  // naive only, one per agent
    MacroTable macros;
    bool has_knowledge = false;

    std::size_t edges() const { return agents.size(); }
    // Ring edge e joins agent e and agent e+1.
    std::size_t left_edge(std::size_t i) const { return (i + agents.size() - 1) % agents.size(); }
    std::size_t right_edge(std::size_t i) const { return i; }
};

inline CompiledModel compile(const ProtocolModel& model, const EngineOptions& options) {
    const std::size_t n = model.agents.size();
    if (n < 2) throw UsageError("a ring needs at least two agents");
    if (n > 16) throw UsageError("at most 16 agents are supported");
    if (model.programs.size() != n) throw UsageError("one program per agent required");
    if (model.horizon == 0) throw UsageError("horizon must be positive");
    if (options.mode == EngineMode::naive && n * model.horizon > 63)
        throw UsageError("too many key bits for the naive engine");

    CompiledModel m;
    m.options = options;
    m.horizon = model.horizon;
    m.sig = std::make_shared<Signature>();
    auto& sig = *m.sig;
    for (const auto& a : model.agents) sig.add_agent(a);

    const bool reduced = options.mode == EngineMode::reduced;
    m.agents.resize(n);
    for (AgentId i = 0; i < n; ++i) {
        auto& ca = m.agents[i];
        ca.id = i;
        ca.rr.assign(model.horizon + 1, 0);
        for (const auto& l : model.locals) {
            VariableDecl d{model.agents[i] + "." + l.name, l.domain, i, {i}, std::nullopt};
            if (l.init == Init::Unassigned) d.assigned_at = l.assigned_at;
            if (l.init == Init::Fixed && !l.domain.contains(l.initial))
                throw UsageError("initial value of " + l.name + " outside its domain");
            VarId id = sig.add_variable(d);
            if (l.init == Init::Free) ca.free_locals.push_back(id);
        }
        for (std::size_t u = 1; u <= model.horizon; ++u) {
            auto id = sig.find_local(i, model.round_result + "[" + std::to_string(u) + "]");
            if (!id) throw UsageError("round result variable " + model.round_result + "[" + std::to_string(u) + "] not declared");
            ca.rr[u] = *id;
        }
        ca.c = sig.add_variable({model.agents[i] + ".c", Domain::boolean(), i, {i}, std::nullopt});
    }
    for (AgentId i = 0; i < n; ++i) {
        if (reduced) {
            m.agents[i].ox = sig.add_variable({model.agents[i] + ".ox", Domain::boolean(), i, {i}, std::nullopt});
        }
    }
    if (reduced && options.leak_contributions) {
        // Rebuild the contribution declarations as globally observable.
        auto leaky = std::make_shared<Signature>();
        for (const auto& a : model.agents) leaky->add_agent(a);
        std::vector<AgentId> everyone(n);
        for (AgentId i = 0; i < n; ++i) everyone[i] = i;
        for (VarId v = 0; v < sig.variable_count(); ++v) {
            auto d = sig.decl(v);
            if (d.name.ends_with(".c")) d.observable_by = everyone;
            leaky->add_variable(d);
        }
        m.sig = leaky;
    }
    auto& s = *m.sig;

    std::vector<std::string> edge_names;
    for (std::size_t e = 0; e < n; ++e)
        edge_names.push_back("k" + std::to_string(e + 1) + std::to_string((e + 1) % n + 1));
    if (!reduced) {
        for (std::size_t e = 0; e < n; ++e) {
            AgentId a = static_cast<AgentId>(e), b = static_cast<AgentId>((e + 1) % n);
            m.keys.push_back(s.add_variable({edge_names[e], Domain::boolean(), std::nullopt, {a, b}, std::nullopt}));
        }
        std::vector<AgentId> everyone(n);
        for (AgentId i = 0; i < n; ++i) everyone[i] = i;
        for (std::size_t i = 0; i < n; ++i)
            m.said.push_back(s.add_variable({"said[" + std::to_string(i + 1) + "]", Domain::boolean(), std::nullopt, everyone, std::nullopt}));
    } else {
        const std::string hint = "key material is eliminated by the reduced engine; use --engine naive";
        for (const auto& e : edge_names) s.add_eliminated(e, hint);
        for (std::size_t i = 0; i < n; ++i) s.add_eliminated("said[" + std::to_string(i + 1) + "]", hint);
    }
    for (const auto& [alias, target] : model.aliases) s.add_alias(alias, target);
    if (model.macros) m.macros = model.macros(s);

    // Programs
    for (const auto& prog : model.programs) {
        AgentId a = s.agent(prog.agent);
        auto& ca = m.agents[a];
        if (!ca.phases.empty()) throw UsageError("agent " + prog.agent + " has two programs");
        if (prog.phases.size() != model.horizon)
            throw UsageError("program of " + prog.agent + " must have one phase per macro-step");
        for (const auto& phase : prog.phases) {
            auto& out = ca.phases.emplace_back();
            for (std::size_t k = 0; k < phase.statements.size(); ++k) {
                const auto& st = phase.statements[k];
                bool is_announce = std::holds_alternative<Announce>(st) || std::holds_alternative<IfKnowledge>(st);
                if (is_announce != (k == 0))
                    throw UsageError("each phase of " + prog.agent + " needs exactly one leading announcement");
                CompiledStatement cs{};
                auto check_present = [&](const FormulaPtr& f) {
                    if (temporal_depth(*f) != 0)
                        throw UsageError("knowledge test of " + prog.agent + " refers to a future time");
                    return f;
                };
                auto target = [&](const std::string& var) {
                    auto id = s.find_local(a, var);
                    if (!id) throw UsageError("agent " + prog.agent + " assigns undeclared variable " + var);
                    for (const auto& ag : m.agents)
                        if (id == ag.c || std::find(ag.rr.begin() + 1, ag.rr.end(), *id) != ag.rr.end())
                            throw UsageError("variable " + var + " is written by the engine");
                    return *id;
                };
                if (auto* an = std::get_if<Announce>(&st)) {
                    cs.kind = CompiledStatement::Kind::Announce;
                    cs.bit = LocalExpr::bind(an->bit, s, a);
                } else if (auto* ik = std::get_if<IfKnowledge>(&st)) {
                    cs.kind = CompiledStatement::Kind::IfKnowledge;
                    cs.formula = check_present(ik->test(s));
                    cs.bit = LocalExpr::bind(ik->then_bit, s, a);
                    cs.else_bit = LocalExpr::bind(ik->else_bit, s, a);
                    m.has_knowledge = true;
                } else if (auto* al = std::get_if<AssignLocal>(&st)) {
                    cs.kind = CompiledStatement::Kind::AssignLocal;
                    cs.target = target(al->var);
                    cs.bit = LocalExpr::bind(al->value, s, a);
                } else if (auto* ak = std::get_if<AssignKnowledge>(&st)) {
                    cs.kind = CompiledStatement::Kind::AssignKnowledge;
                    cs.target = target(ak->var);
                    cs.formula = check_present(ak->formula(s));
                    m.has_knowledge = true;
                }
                out.push_back(std::move(cs));
            }
            if (out.empty()) throw UsageError("empty phase in program of " + prog.agent);
        }
    }
    return m;
}

namespace detail {

inline Value checked(const Signature& sig, VarId target, Value v) {
    if (!sig.decl(target).domain.contains(v))
        throw ModelError("value " + std::to_string(v) + " outside the domain of " + sig.decl(target).name);
    return v;
}

// Announcements of step `step`, evaluated on the state at step-1; writes the
// contribution, the key material and the round result of the step.
// `tests[i]` supplies the knowledge test outcome for agents whose phase starts
// with an IfKnowledge.
inline void announce_half(const CompiledModel& m, std::vector<Value>& val, const KeySchedule& keys,
                          std::size_t step, std::span<const std::uint8_t> tests) {
    const std::size_t n = m.agents.size();
    const auto& sig = *m.sig;
    std::vector<Value> contrib(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& st = m.agents[i].phases[step - 1].front();
        Value bit;
        if (st.kind == CompiledStatement::Kind::Announce) {
            bit = eval_expr(*st.bit, val, step - 1, &sig);
        } else {
            bit = tests[i] ? eval_expr(*st.bit, val, step - 1, &sig) : eval_expr(*st.else_bit, val, step - 1, &sig);
        }
        contrib[i] = bit != 0;
    }
    Value rr = 0;
    if (m.options.mode == EngineMode::naive) {
        for (std::size_t e = 0; e < n; ++e) val[m.keys[e]] = keys.key(step, e);
        for (std::size_t i = 0; i < n; ++i) {
            Value said = val[m.keys[m.left_edge(i)]] ^ val[m.keys[m.right_edge(i)]] ^ contrib[i];
            val[m.said[i]] = said;
            rr ^= said;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) rr ^= contrib[i];
        for (std::size_t i = 0; i < n; ++i) val[m.agents[i].ox] = rr ^ contrib[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        val[m.agents[i].c] = contrib[i];
        val[m.agents[i].rr[step]] = rr;
    }
}

// Assignments of step `step` in program order. knowledge(i, k) is the value
// of the k-th statement of agent i when that statement is an AssignKnowledge.
template <typename KnowledgeFn>
void post_half(const CompiledModel& m, std::vector<Value>& val, std::size_t step, KnowledgeFn&& knowledge) {
    const auto& sig = *m.sig;
    for (std::size_t i = 0; i < m.agents.size(); ++i) {
        const auto& phase = m.agents[i].phases[step - 1];
        for (std::size_t k = 1; k < phase.size(); ++k) {
            const auto& st = phase[k];
            if (st.kind == CompiledStatement::Kind::AssignLocal)
                val[st.target] = checked(sig, st.target, eval_expr(*st.bit, val, step, &sig));
            else
                val[st.target] = knowledge(i, k);
        }
    }
}

}  // namespace detail

// Executes one macro-step of a model without knowledge statements.
inline GlobalState execute_step(const CompiledModel& m, const GlobalState& state, const KeySchedule& keys,
                                std::size_t step) {
    if (m.has_knowledge) throw UsageError("knowledge statements need execute_kbp");
    if (step == 0 || step > m.horizon) throw UsageError("step outside 1..horizon");
    if (state.time + 1 != step) throw UsageError("state is not at the start of the step");
    GlobalState out{state.valuation, step};
    detail::announce_half(m, out.valuation, keys, step, {});
    detail::post_half(m, out.valuation, step, [](std::size_t, std::size_t) -> Value {
        throw UsageError("knowledge statements need execute_kbp");
    });
    return out;
}

// Initial valuations admitted by the scenario, lexicographic in the scenario's
// variable order.
inline std::vector<std::vector<Value>> initial_assignments(const CompiledModel& m, const Scenario& sc) {
    const auto& sig = *m.sig;
    std::vector<Value> base(sig.variable_count(), 0);
    std::vector<VarId> free_vars;
    for (const auto& a : m.agents)
        for (VarId v : a.free_locals) free_vars.push_back(v);

    std::vector<std::pair<VarId, std::vector<Value>>> order;
    for (const auto& [name, values] : sc.free_values) {
        VarId v = sig.variable(name);
        if (std::find(free_vars.begin(), free_vars.end(), v) == free_vars.end())
            throw UsageError("scenario constrains " + name + ", which is not a free initial variable");
        if (values.empty()) throw UsageError("scenario admits no value for " + name);
        for (Value x : values)
            if (!sig.decl(v).domain.contains(x))
                throw UsageError("scenario value " + std::to_string(x) + " outside the domain of " + name);
        for (const auto& o : order)
            if (o.first == v) throw UsageError("scenario lists " + name + " twice");
        order.emplace_back(v, values);
    }
    for (VarId v : free_vars) {
        if (std::any_of(order.begin(), order.end(), [&](const auto& o) { return o.first == v; })) continue;
        std::vector<Value> all;
        for (Value x = sig.decl(v).domain.lo; x <= sig.decl(v).domain.hi; ++x) all.push_back(x);
        order.emplace_back(v, all);
    }
    // Fixed initial values
    // (declared per local; the signature keeps no initial values, so they are
    // applied by the caller through `fixed`).
    FormulaPtr constraint;
    if (sc.constraint) constraint = parse_formula(*sc.constraint, sig, m.macros);

    std::vector<std::vector<Value>> out;
    std::vector<std::size_t> odo(order.size(), 0);
    for (;;) {
        std::vector<Value> v = base;
        for (std::size_t k = 0; k < order.size(); ++k) v[order[k].first] = order[k].second[odo[k]];
        if (!constraint || eval_propositional(*constraint, v)) out.push_back(std::move(v));
        std::size_t k = order.size();
        while (k > 0) {
            --k;
            if (++odo[k] < order[k].second.size()) break;
            odo[k] = 0;
            if (k == 0) return out;
        }
        if (order.empty()) return out;
    }
}

namespace detail {

inline InterpretedSystem run_engine(const ProtocolModel& model, const CompiledModel& m, const Scenario& sc) {
    auto inits = initial_assignments(m, sc);
    if (inits.empty()) throw UsageError("scenario admits no initial assignment");
    // Fixed initial values of locals.
    for (auto& v : inits)
        for (const auto& a : m.agents)
            for (const auto& l : model.locals)
                if (l.init == Init::Fixed) v[*m.sig->find_local(a.id, l.name)] = l.initial;

    const bool naive = m.options.mode == EngineMode::naive;
    const std::size_t key_bits = naive ? m.edges() * m.horizon : 0;
    const std::uint64_t schedules = std::uint64_t{1} << key_bits;
    if (inits.size() > m.options.max_runs / schedules)
        throw UsageError("run set too large for the " + std::string(to_string(m.options.mode)) + " engine: " +
                         std::to_string(inits.size()) + " initial assignments x " + std::to_string(schedules) +
                         " key schedules");
    const std::size_t n = inits.size() * schedules;

    InterpretedSystem sys(m.sig, m.horizon, n);
    std::vector<StateId> layer(n);
    std::vector<std::uint32_t> origin(naive ? n : 0);
    std::vector<std::uint64_t> keys(naive ? n : 0);
    for (std::size_t v = 0; v < inits.size(); ++v) {
        StateId id = sys.intern(inits[v]);
        for (std::uint64_t k = 0; k < schedules; ++k) {
            std::size_t r = v * schedules + k;
            layer[r] = id;
            if (naive) {
                origin[r] = static_cast<std::uint32_t>(v);
                keys[r] = k;
            }
        }
    }
    sys.set_origin(std::move(origin), std::move(keys));
    sys.push_layer(layer);

    const std::size_t agents = m.agents.size();
    for (std::size_t step = 1; step <= m.horizon; ++step) {
        // Knowledge tests guarding the announcements, on the state before the step.
        std::vector<const TruthVector*> tests(agents, nullptr);
        Evaluator before(sys);
        for (std::size_t i = 0; i < agents; ++i) {
            const auto& st = m.agents[i].phases[step - 1].front();
            if (st.kind == CompiledStatement::Kind::IfKnowledge) tests[i] = &before.truth(st.formula, step - 1);
        }
        // A step is a function of (previous state, test outcomes, this step's
        // key bits), so transitions are cached on that triple.
        std::unordered_map<std::uint64_t, StateId> announced;
        std::vector<Value> val;
        const std::size_t key_shift = (step - 1) * m.edges();
        const std::uint64_t key_mask = (std::uint64_t{1} << m.edges()) - 1;
        for (RunId r = 0; r < n; ++r) {
            const StateId from = sys.state_id(r, step - 1);
            std::uint64_t test_bits = 0;
            for (std::size_t i = 0; i < agents; ++i)
                if (tests[i] && (*tests[i])[r]) test_bits |= std::uint64_t{1} << i;
            const std::uint64_t step_keys = (sys.key_schedule(r) >> key_shift) & key_mask;
            const std::uint64_t key = (std::uint64_t{from} << 32) | (test_bits << 16) | step_keys;
            if (auto it = announced.find(key); it != announced.end()) {
                layer[r] = it->second;
                continue;
            }
            auto prev = sys.state(from);
            val.assign(prev.begin(), prev.end());
            std::vector<std::uint8_t> bits(agents);
            for (std::size_t i = 0; i < agents; ++i) bits[i] = (test_bits >> i) & 1u;
            detail::announce_half(m, val, KeySchedule{m.edges(), sys.key_schedule(r)}, step, bits);
            layer[r] = announced[key] = sys.intern(val);
        }
        sys.push_layer(layer);

        bool has_post = false, has_knowledge = false;
        for (const auto& a : m.agents) {
            const auto& phase = a.phases[step - 1];
            has_post |= phase.size() > 1;
            for (const auto& st : phase) has_knowledge |= st.kind == CompiledStatement::Kind::AssignKnowledge;
        }
        if (!has_post) continue;

        // Knowledge assignments are labelled on the post-announcement layer.
        // Assigned values are functions of the agent's own history, so they do
        // not change any partition at this time.
        std::vector<std::vector<TruthVector>> kvals(agents);
        if (has_knowledge) {
            Evaluator after(sys);
            for (std::size_t i = 0; i < agents; ++i) {
                const auto& phase = m.agents[i].phases[step - 1];
                kvals[i].resize(phase.size());
                for (std::size_t k = 1; k < phase.size(); ++k)
                    if (phase[k].kind == CompiledStatement::Kind::AssignKnowledge)
                        kvals[i][k] = after.truth(phase[k].formula, step);
            }
        }
        std::vector<std::pair<std::size_t, std::size_t>> kslots;
        for (std::size_t i = 0; i < agents; ++i)
            for (std::size_t k = 0; k < kvals[i].size(); ++k)
                if (!kvals[i][k].empty()) kslots.emplace_back(i, k);
        if (kslots.size() > 32) throw UsageError("more than 32 knowledge assignments in one step");
        std::unordered_map<std::uint64_t, StateId> posted;
        std::vector<StateId> next(n);
        for (RunId r = 0; r < n; ++r) {
            std::uint64_t kbits = 0;
            for (std::size_t q = 0; q < kslots.size(); ++q)
                if (kvals[kslots[q].first][kslots[q].second][r]) kbits |= std::uint64_t{1} << q;
            const std::uint64_t key = (std::uint64_t{layer[r]} << 32) | kbits;
            if (auto it = posted.find(key); it != posted.end()) {
                next[r] = it->second;
                continue;
            }
            auto cur = sys.state(layer[r]);
            val.assign(cur.begin(), cur.end());
            detail::post_half(m, val, step, [&](std::size_t i, std::size_t k) -> Value { return kvals[i][k][r]; });
            next[r] = posted[key] = sys.intern(val);
        }
        sys.replace_last_layer(next);
        layer = std::move(next);
    }
    return sys;
}

}  // namespace detail

// Runs of a program without knowledge statements: one per initial assignment
// (reduced) or per initial assignment and key schedule (naive). Canonical
// order: initial assignment first, then key schedule.
inline InterpretedSystem generate_runs(const ProtocolModel& model, const Scenario& scenario,
                                       const EngineOptions& options = {}) {
    auto m = compile(model, options);
    if (m.has_knowledge)
        throw UsageError("program contains knowledge statements; use execute_kbp or plug in predicates");
    return detail::run_engine(model, m, scenario);
}

inline InterpretedSystem generate_runs(const ProtocolModel& model, const Scenario& scenario, EngineMode mode) {
    return generate_runs(model, scenario, EngineOptions{mode});
}

// Executes a knowledge-based program by induction on time: the run prefixes up
// to t fix every agent's partition at t, which decides the knowledge tests at
// t, which fix the step t+1. With perfect recall and present-time tests the
// result is the behaviourally unique implementation.
inline InterpretedSystem execute_kbp(const ProtocolModel& model, const Scenario& scenario,
                                     const EngineOptions& options = {}) {
    auto m = compile(model, options);
    return detail::run_engine(model, m, scenario);
}

inline CompiledModel compile(const ProtocolModel& model, EngineMode mode) {
    return compile(model, EngineOptions{mode});
}

namespace detail {
inline void collect_vars(const LocalExpr& e, std::vector<VarId>& out) {
    if (e.kind() == ExprKind::Var) out.push_back(e.var());
    if (e.kind() == ExprKind::Table) out.insert(out.end(), e.key_ids().begin(), e.key_ids().end());
    for (const auto& a : e.args()) collect_vars(*a, out);
}
}  // namespace detail

// Value of a local expression over the agent's accumulated history: the
// latest record carries the current values of its observable variables.
inline Value eval_local_expr(const Signature& sig, const ExprPtr& expr, const ObservationHistory& history) {
    if (history.records.empty()) throw UsageError("empty observation history");
    auto bound = LocalExpr::bind(expr, sig, history.agent);
    std::vector<VarId> used;
    detail::collect_vars(*bound, used);
    std::vector<Value> val(sig.variable_count(), 0);
    std::vector<bool> seen(sig.variable_count(), false);
    for (auto [v, x] : history.records.back()) {
        val[v] = x;
        seen[v] = true;
    }
    for (VarId v : used)
        if (!seen[v]) throw UsageError("variable " + sig.decl(v).name + " is not observable by the agent");
    return eval_expr(*bound, val, history.records.size() - 1, &sig);
}

}  // namespace epi
