#pragma once

// The epicheck command line: check, refine, synthesize, trace and oracle.
// Exit status 0 when the verdict holds, 1 when it fails, 2 on bad usage.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dc/report.hpp"
#include "dc/synth.hpp"
#include "reduction.hpp"

namespace epi::cli {

using json = nlohmann::ordered_json;

inline constexpr int kHolds = 0;
inline constexpr int kFails = 1;
inline constexpr int kUsage = 2;

struct Options {
    std::string model = "dc3";
    std::string scenario = "unknown";
    std::string mode = "speculative";
    std::string engine = "reduced";
    std::string format = "text";
    std::string spec;
    std::string formula;
    std::string at;
    std::string assign;
    std::string predicates;
    std::string target;
    std::string agent;
    std::size_t slot = 0;
    std::uint64_t seed = 1;
    std::size_t count = 200;
    int depth = 3;
    bool inject_fault = false;
    bool model_given = false;
    bool mode_given = false;
};

// Resolved model, scenario and engine.
struct Setup {
    dc::DcParams p;
    Scenario scenario;
    EngineMode engine = EngineMode::reduced;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

inline std::size_t model_slots(const std::string& model) {
    if (model == "dc3") return 3;
    if (model == "dc2") return 2;
    throw UsageError("unknown model " + model + " (expected dc3 or dc2)");
}

inline std::string string_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw UsageError(where + ": missing \"" + key + "\"");
    if (!j[key].is_string()) throw UsageError(where + ": \"" + key + "\" must be a string");
    return j[key].get<std::string>();
}

inline std::vector<Value> value_list(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_array()) throw UsageError(where + ": \"" + key + "\" must be a list");
    std::vector<Value> out;
    for (const auto& v : j[key]) {
        if (v.is_boolean()) out.push_back(v.get<bool>() ? 1 : 0);
        else if (v.is_number_integer()) out.push_back(v.get<Value>());
        else throw UsageError(where + ": \"" + key + "\" entries must be integers");
    }
    return out;
}

inline void merge_flag(std::string& value, bool given, const std::string& from_file, const char* what) {
    if (given && value != from_file)
        throw UsageError(std::string("--") + what + " " + value + " conflicts with the scenario file (" + from_file + ")");
    value = from_file;
}

inline Setup resolve(Options& o) {
    Setup s;
    std::string kind = o.scenario;
    json file;
    std::string where;
    if (kind.rfind("file:", 0) == 0) {
        where = kind.substr(5);
        file = read_json(where);
        if (!file.is_object()) throw UsageError(where + ": scenario file must be an object");
        for (const auto& [key, _] : file.items())
            if (key != "model" && key != "mode" && key != "scenario" && key != "pinned" && key != "constraint")
                throw UsageError(where + ": unknown key \"" + key + "\"");
        if (file.contains("model")) merge_flag(o.model, o.model_given, string_field(file, "model", where), "model");
        if (file.contains("mode")) merge_flag(o.mode, o.mode_given, string_field(file, "mode", where), "mode");
        kind = string_field(file, "scenario", where);
    }
    s.p.slots = model_slots(o.model);
    s.p.mode = dc::parse_mode(o.mode);
    if (o.engine == "reduced") s.engine = EngineMode::reduced;
    else if (o.engine == "naive") s.engine = EngineMode::naive;
    else throw UsageError("unknown engine " + o.engine);

    if (kind == "unknown") {
        s.scenario = dc::unknown_scenario(s.p);
    } else if (kind == "referendum") {
        s.scenario = dc::referendum_scenario(s.p);
    } else if (kind == "pinned") {
        std::pair<std::vector<Value>, std::vector<Value>> v;
        if (!where.empty() && file.contains("pinned")) {
            if (!file["pinned"].is_object()) throw UsageError(where + ": \"pinned\" must be an object");
            v = {value_list(file["pinned"], "slot_request", where), value_list(file["pinned"], "msg", where)};
        } else if (!o.assign.empty()) {
            v = dc::parse_assignment(o.assign);
        } else {
            throw UsageError("the pinned scenario needs --assign or a \"pinned\" entry");
        }
        s.scenario = dc::pinned_scenario(s.p, v.first, v.second);
    } else if (kind == "custom") {
        if (where.empty()) throw UsageError("the custom scenario is read from a file: --scenario file:PATH");
        s.scenario = dc::custom_scenario(s.p, string_field(file, "constraint", where));
    } else {
        throw UsageError("unknown scenario " + kind);
    }
    return s;
}

// Predicate definitions from a file, in order; each may reference the
// built-in predicates and the ones before it.
inline std::vector<dc::PredicateDef> read_predicates(const std::string& path) {
    auto j = read_json(path);
    if (!j.is_array()) throw UsageError(path + ": predicate file must be a list");
    std::vector<dc::PredicateDef> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string where = path + " entry " + std::to_string(k + 1);
        if (!j[k].is_object()) throw UsageError(where + ": must be an object");
        dc::PredicateDef d{string_field(j[k], "name", where), string_field(j[k], "target", where),
                           string_field(j[k], "expr", where)};
        if (!dc::is_target(d.target)) throw UsageError(where + ": unknown target " + d.target);
        out.push_back(std::move(d));
    }
    return out;
}

struct CompiledDef {
    dc::PredicateDef def;
    dc::SlotPredicate pred;
};

inline std::vector<CompiledDef> compile_defs(const std::vector<dc::PredicateDef>& defs, const dc::DcParams& p) {
    auto lib = dc::builtin_library(p);
    std::vector<CompiledDef> out;
    for (const auto& d : defs) {
        try {
            out.push_back({d, dc::compile_predicate(d, p, lib)});
        } catch (const ParseError& e) {
            throw UsageError("predicate " + d.name + ": " + e.what());
        }
        lib.insert_or_assign(d.name, d);
    }
    return out;
}

// The predicates plugged into the implementation: the built-ins, overridden
// by file entries per target. Conservative mode has no closed-form kc, so
// unless the file supplies one it is synthesized against `kc_scenario`.
inline dc::PredicateSet predicate_set(const Options& o, const dc::DcParams& p, const Scenario& kc_scenario,
                                      EngineMode engine) {
    auto preds = dc::default_predicates(p);
    bool kc_given = false;
    if (!o.predicates.empty()) {
        for (auto& c : compile_defs(read_predicates(o.predicates), p)) {
            const auto& t = c.def.target;
            if (t == "kc") {
                preds.kc = c.pred;
                kc_given = true;
            } else if (t == "rcvd0") {
                preds.rcvd0 = c.pred;
            } else if (t == "rcvd1") {
                preds.rcvd1 = c.pred;
            } else if (t == "dlvrd") {
                preds.dlvrd = c.pred;
            }
        }
    }
    if (p.mode == dc::Mode::conservative && !kc_given) preds.kc = dc::synthesize_kc(p, kc_scenario, preds, engine).kc;
    return preds;
}

inline InterpretedSystem build_system(const Options& o, const Setup& s) {
    auto preds = predicate_set(o, s.p, s.scenario, s.engine);
    return generate_runs(dc::build_cdc(s.p, preds), s.scenario, s.engine);
}

inline AgentId resolve_agent(const std::string& name) {
    if (name.empty()) return 0;
    for (AgentId i = 0; i < dc::kAgents; ++i)
        if (dc::agent_name(i) == name) return i;
    throw UsageError("unknown agent " + name);
}

// res:s, tx:s, pre:s, end, or a plain time.
inline std::size_t resolve_time(const std::string& at, const dc::DcParams& p, std::size_t fallback) {
    if (at.empty()) return fallback;
    if (at == "end") return p.end_time();
    auto colon = at.find(':');
    if (colon == std::string::npos) {
        auto t = dc::parse_count(at, "time");
        if (t > p.horizon()) throw UsageError("time " + at + " past the horizon " + std::to_string(p.horizon()));
        return t;
    }
    std::string kind = at.substr(0, colon);
    std::size_t slot = dc::parse_count(at.substr(colon + 1), "slot");
    if (kind == "res") return p.reservation_time(slot);
    if (kind == "tx") return p.transmission_time(slot);
    if (kind == "pre") return p.pre_transmission_time(slot);
    throw UsageError("bad --at " + at + " (expected res:s, tx:s, pre:s or end)");
}

inline std::string context(const Options& o, const Setup& s) {
    return o.model + ", " + dc::to_string(s.p.mode) + ", " + s.scenario.name + ", " + to_string(s.engine) + " engine";
}

inline void print_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

// ---- commands ----

inline int cmd_check(Options& o, std::ostream& out) {
    if (o.spec.empty() == o.formula.empty()) throw UsageError("check needs exactly one of --spec and --formula");
    std::optional<dc::SpecId> id;
    if (!o.spec.empty()) id = dc::parse_spec_id(o.spec);
    auto s = resolve(o);
    auto sys = build_system(o, s);
    const auto& sig = sys.signature();
    const bool text = o.format == "text";

    if (!id) {
        auto f = dc::parse(o.formula, sig, s.p);
        std::size_t t = resolve_time(o.at, s.p, 0);
        auto v = check_valid_at(sys, f, t);
        std::optional<Counterexample> cex;
        if (!v.holds) cex = counterexample_for(sys, f, resolve_agent(o.agent), v);
        if (text) {
            out << "formula " << to_string(f, sig) << " at time " << t << " (" << context(o, s)
                << "): " << (v.holds ? "Holds" : "Fails") << "\n";
            if (cex) out << dc::render_counterexample(sys, *cex, s.p.slots);
        } else {
            print_json(out, dc::verdict_json(sys, "formula", o.formula, v.holds, cex));
        }
        return v.holds ? kHolds : kFails;
    }

    std::optional<AgentId> agent;
    if (!o.agent.empty()) agent = resolve_agent(o.agent);
    std::optional<std::size_t> slot;
    if (o.slot) slot = o.slot;
    auto rep = dc::check_spec(sys, s.p, *id, agent, slot);
    if (text) {
        out << "spec " << dc::to_string(*id) << " (" << context(o, s) << "): " << (rep.holds ? "Holds" : "Fails")
            << ", " << rep.failures << " of " << rep.instances << " instances fail\n";
        if (rep.first_failure) {
            out << "first failure: " << rep.first_failure->label(sig) << "\n";
            out << dc::render_counterexample(sys, *rep.counterexample, s.p.slots);
        }
    } else {
        auto j = dc::verdict_json(sys, "spec", dc::to_string(*id), rep.holds, rep.counterexample);
        j["instances"] = rep.instances;
        j["failures"] = rep.failures;
        if (rep.first_failure && rep.first_failure->slot) j["slot"] = rep.first_failure->slot;
        print_json(out, j);
    }
    return rep.holds ? kHolds : kFails;
}

// Knowledge formula and default check time a refinement target stands for.
inline std::pair<FormulaBuilder, std::size_t> target_knowledge(const std::string& target, const dc::DcParams& p,
                                                               AgentId i, std::size_t s) {
    if (target == "conflict_free")
        return {[p, i, s](const Signature& sig) { return dc::conflict_free_knowledge(sig, p, i, s); }, p.end_time()};
    if (target == "kc")
        return {[p, i, s](const Signature& sig) { return dc::transmit_condition(sig, p, i, s); },
                p.pre_transmission_time(s)};
    if (target == "rcvd0" || target == "rcvd1") {
        Value x = target == "rcvd1" ? 1 : 0;
        return {[p, i, x, s](const Signature& sig) { return f_know(i, dc::sender(sig, p, i, x, s)); },
                p.transmission_time(s)};
    }
    return {[p, i](const Signature& sig) { return dc::delivery_knowledge(sig, p, i); }, p.end_time()};
}

inline int cmd_refine(Options& o, std::ostream& out) {
    if (o.predicates.empty()) throw UsageError("refine needs --predicates FILE");
    auto s = resolve(o);
    auto defs = read_predicates(o.predicates);
    if (defs.empty()) throw UsageError(o.predicates + ": no candidates");
    const std::string target = defs.front().target;
    for (const auto& d : defs)
        if (d.target != target) throw UsageError("all candidates must share one target; found " + target + " and " + d.target);
    auto compiled = compile_defs(defs, s.p);
    const AgentId agent = resolve_agent(o.agent);
    const std::size_t slot = target == "dlvrd" ? 1 : s.p.check_slot(o.slot ? o.slot : 1);
    auto [know, default_time] = target_knowledge(target, s.p, agent, slot);
    const std::size_t time = resolve_time(o.at, s.p, default_time);

    Options base = o;
    base.predicates.clear();
    auto preds = predicate_set(base, s.p, s.scenario, s.engine);
    std::shared_ptr<const InterpretedSystem> fixed;
    if (target != "kc")
        fixed = std::make_shared<const InterpretedSystem>(generate_runs(dc::build_cdc(s.p, preds), s.scenario, s.engine));

    std::vector<NamedCandidate> candidates;
    std::map<std::string, dc::SlotPredicate> by_name;
    for (const auto& c : compiled) {
        candidates.push_back({c.def.name, c.pred(agent, slot)});
        by_name[c.def.name] = c.pred;
    }
    std::map<std::string, std::shared_ptr<const InterpretedSystem>> systems;
    SystemBuilder build = [&](const NamedCandidate& c) {
        if (fixed) return systems[c.name] = fixed;
        auto ps = preds;
        ps.kc = by_name.at(c.name);
        return systems[c.name] =
                   std::make_shared<const InterpretedSystem>(generate_runs(dc::build_cdc(s.p, ps), s.scenario, s.engine));
    };
    auto rep = refine_sequence(build, candidates, know, agent, time);

    if (o.format == "text") {
        out << "refine " << target << " for " << dc::agent_name(agent);
        if (target != "dlvrd") out << " slot " << slot;
        out << " at time " << time << " (" << context(o, s) << ")\n";
        for (const auto& e : rep.entries) {
            out << e.name << ": " << (e.holds ? "Holds" : "Fails") << "\n";
            if (e.counterexample) out << dc::render_counterexample(*systems.at(e.name), *e.counterexample, s.p.slots);
        }
        for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
        out << "result: " << (rep.final_holds ? "Holds with " + rep.entries.back().name : std::string("no candidate holds"))
            << "\n";
    } else {
        json j;
        j["target"] = target;
        j["agent"] = dc::agent_name(agent);
        if (target != "dlvrd") j["slot"] = slot;
        j["time"] = time;
        j["candidates"] = json::array();
        for (const auto& e : rep.entries) {
            auto v = dc::verdict_json(*systems.at(e.name), "target", target, e.holds, e.counterexample);
            v["candidate"] = e.name;
            j["candidates"].push_back(std::move(v));
        }
        j["warnings"] = rep.warnings;
        j["verdict"] = rep.final_holds ? "Holds" : "Fails";
        print_json(out, j);
    }
    return rep.final_holds ? kHolds : kFails;
}

inline json synthesized_json(const SynthesizedPredicate& sp, const Signature& sig) {
    json j;
    j["agent"] = sig.agent_name(sp.agent);
    j["time"] = sp.time;
    j["view"] = sp.view_vars;
    j["table"] = json::array();
    for (const auto& [view, value] : sp.views) j["table"].push_back({{"view", view}, {"value", value}});
    j["exact"] = sp.view_exact;
    if (sp.sop) j["sop"] = *sp.sop;
    j["minimal"] = sp.sop_minimal;
    return j;
}

inline void print_synthesized(std::ostream& out, const SynthesizedPredicate& sp) {
    out << "view:";
    for (const auto& v : sp.view_vars) out << " " << v;
    out << "\n";
    for (const auto& [view, value] : sp.views) out << "  " << dc::format_vector(view) << " -> " << value << "\n";
    if (!sp.view_exact) out << "knowledge is not a function of the view; table is per history\n";
    if (sp.sop) out << "predicate: " << *sp.sop << (sp.sop_minimal ? "" : " (cover not proven minimal)") << "\n";
}

inline int synthesize_kc_cmd(Options& o, const Setup& s, std::ostream& out) {
    Options base = o;
    base.predicates.clear();
    auto others = dc::default_predicates(s.p);
    auto kc = dc::synthesize_kc(s.p, s.scenario, others, s.engine);
    others.kc = kc.kc;
    auto sys = generate_runs(dc::build_cdc(s.p, others), s.scenario, s.engine);
    auto id = s.p.mode == dc::Mode::speculative ? dc::SpecId::s1s : dc::SpecId::s1c;
    auto rep = dc::check_spec(sys, s.p, id);
    if (o.format == "text") {
        out << "synthesize kc (" << context(o, s) << ")\n";
        for (std::size_t k = 0; k < kc.per_slot.size(); ++k)
            for (const auto& sp : kc.per_slot[k])
                out << "kc[" << k + 1 << "] " << sys.signature().agent_name(sp.agent) << " at time " << sp.time << ": "
                    << sp.sop.value_or("(table)") << "\n";
        out << "spec " << dc::to_string(id) << " with the synthesized kc: " << (rep.holds ? "Holds" : "Fails") << "\n";
    } else {
        json j;
        j["target"] = "kc";
        j["predicates"] = json::array();
        for (std::size_t k = 0; k < kc.per_slot.size(); ++k)
            for (const auto& sp : kc.per_slot[k]) {
                auto e = synthesized_json(sp, sys.signature());
                e["slot"] = k + 1;
                j["predicates"].push_back(std::move(e));
            }
        j["spec"] = dc::to_string(id);
        j["verdict"] = rep.holds ? "Holds" : "Fails";
        print_json(out, j);
    }
    return rep.holds ? kHolds : kFails;
}

inline int cmd_synthesize(Options& o, std::ostream& out) {
    if (!o.target.empty() && o.target != "kc") throw UsageError("synthesize --target supports kc only");
    if (o.target.empty() == o.formula.empty()) throw UsageError("synthesize needs exactly one of --formula and --target");
    auto s = resolve(o);
    if (!o.target.empty()) return synthesize_kc_cmd(o, s, out);
    auto sys = build_system(o, s);
    const auto& sig = sys.signature();
    auto f = dc::parse(o.formula, sig, s.p);
    AgentId agent = 0;
    if (!o.agent.empty()) agent = resolve_agent(o.agent);
    else if (f->kind() == NodeKind::Know) agent = f->agent();
    const std::size_t time = resolve_time(o.at, s.p, s.p.end_time());
    auto sp = dc::synthesize(sys, s.p, f, agent, time);
    auto back = check_candidate(sys, dc::best_expr(sp), f, agent, time);
    if (o.format == "text") {
        out << "synthesize " << to_string(f, sig) << " for " << sig.agent_name(agent) << " at time " << time << " ("
            << context(o, s) << ")\n";
        print_synthesized(out, sp);
        out << "round trip: " << (back.holds ? "Holds" : "Fails") << "\n";
    } else {
        auto j = synthesized_json(sp, sig);
        j["formula"] = to_string(f, sig);
        j["verdict"] = back.holds ? "Holds" : "Fails";
        print_json(out, j);
    }
    return back.holds ? kHolds : kFails;
}

inline int cmd_trace(Options& o, std::ostream& out) {
    if (o.assign.empty()) throw UsageError("trace needs --assign \"slot_request=[..];msg=[..]\"");
    if (o.scenario.rfind("file:", 0) == 0) throw UsageError("trace takes its run from --assign, not a scenario file");
    auto [sr, msg] = dc::parse_assignment(o.assign);
    Options full = o;
    full.scenario = "unknown";
    auto s = resolve(full);
    s.scenario = dc::pinned_scenario(s.p, sr, msg);
    // Synthesized kc tables are derived against all runs, then replayed.
    auto preds = predicate_set(o, s.p, dc::unknown_scenario(s.p), s.engine);
    auto sys = generate_runs(dc::build_cdc(s.p, preds), s.scenario, s.engine);
    auto w = dc::witness_table(sys, 0);
    if (o.format == "text") out << dc::render_table(w, s.p.slots);
    else print_json(out, dc::witness_json(w));
    return kHolds;
}

// Spec formulas of the model, printed for parsing against either engine.
inline std::vector<std::string> spec_suite(const Signature& sig, const dc::DcParams& p) {
    std::vector<std::string> out;
    for (auto id : dc::all_specs())
        for (const auto& in : dc::spec_instances(sig, p, id)) out.push_back(to_string(in.formula, sig));
    return out;
}

inline std::vector<std::string> atom_pool(const dc::DcParams& p) {
    std::vector<std::string> atoms;
    for (std::size_t i = 0; i < dc::kAgents; ++i) {
        const std::string a = dc::agent_name(i) + ".";
        for (std::size_t s = 0; s <= p.slots; ++s) atoms.push_back(a + "slot_request == " + std::to_string(s));
        atoms.push_back(a + "msg == 1");
        for (std::size_t s = 1; s <= p.slots; ++s) {
            atoms.push_back(a + dc::indexed("kc", s) + " == 1");
            atoms.push_back(a + dc::indexed("rcvd1", s) + " == 1");
        }
        atoms.push_back(a + "dlvrd == 1");
    }
    for (std::size_t u = 1; u <= p.horizon(); ++u) atoms.push_back(dc::indexed("RR", u) + " == 1");
    for (std::size_t s = 1; s <= p.slots; ++s) {
        atoms.push_back("conflict(" + std::to_string(s) + ")");
        atoms.push_back("sender(C2, 1, " + std::to_string(s) + ")");
    }
    return atoms;
}

inline int cmd_oracle(Options& o, std::ostream& out) {
    if (!o.model_given) o.model = "dc2";
    if (o.depth < 0 || o.depth > 6) throw UsageError("--depth must be in 0..6");
    auto s = resolve(o);
    auto preds = predicate_set(o, s.p, s.scenario, EngineMode::reduced);
    auto model = dc::build_cdc(s.p, preds);

    auto reduced_sig = compile(model, EngineMode::reduced).sig;
    auto suite = spec_suite(*reduced_sig, s.p);
    const std::size_t spec_count = suite.size();
    std::vector<std::string> agents;
    for (std::size_t i = 0; i < dc::kAgents; ++i) agents.push_back(dc::agent_name(i));
    FormulaGenerator gen(o.seed, atom_pool(s.p), agents);
    for (std::size_t k = 0; k < o.count; ++k) suite.push_back(gen.next(o.depth));

    auto rep = engines_agree(model, s.scenario, suite, o.inject_fault);
    if (o.format == "text") {
        out << "oracle " << o.model << " (" << dc::to_string(s.p.mode) << ", " << s.scenario.name << ")"
            << (o.inject_fault ? " with injected fault" : "") << "\n";
        out << "naive runs: " << rep.naive_runs << ", reduced runs: " << rep.reduced_runs << "\n";
        out << "seed: " << o.seed << "\n";
        out << "formulas: " << spec_count << " specification instances, " << o.count << " random of depth <= "
            << o.depth << "\n";
        out << "comparisons: " << rep.comparisons << "\n";
        for (const auto& r : rep.rejected) out << "rejected: " << r << "\n";
        for (std::size_t k = 0; k < rep.disagreements.size() && k < 5; ++k) {
            const auto& d = rep.disagreements[k];
            out << "disagreement at time " << d.time << ", naive run " << d.naive_run << " (naive " << d.naive_value
                << ", reduced " << d.reduced_value << "): " << d.formula << "\n";
        }
        out << "disagreements: " << rep.disagreements.size() << "\n";
        out << "result: " << (rep.agree() ? "engines agree" : "engines disagree") << "\n";
    } else {
        json j;
        j["model"] = o.model;
        j["seed"] = o.seed;
        j["naive_runs"] = rep.naive_runs;
        j["reduced_runs"] = rep.reduced_runs;
        j["formulas"] = rep.formulas;
        j["comparisons"] = rep.comparisons;
        j["rejected"] = rep.rejected;
        j["disagreements"] = json::array();
        for (const auto& d : rep.disagreements)
            j["disagreements"].push_back({{"formula", d.formula},
                                          {"time", d.time},
                                          {"naive_run", d.naive_run},
                                          {"naive", d.naive_value},
                                          {"reduced", d.reduced_value}});
        j["verdict"] = rep.agree() ? "Holds" : "Fails";
        print_json(out, j);
    }
    return rep.agree() ? kHolds : kFails;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Epistemic model checker for the Dining Cryptographers broadcast protocol", "epicheck"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* sub) {
        sub->add_option("--model", o.model, "dc3 (default) or dc2");
        sub->add_option("--scenario", o.scenario, "unknown, referendum, pinned or file:PATH");
        sub->add_option("--mode", o.mode, "speculative or conservative");
        sub->add_option("--engine", o.engine, "reduced or naive");
        sub->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--predicates", o.predicates, "predicate file (JSON)");
        sub->add_option("--assign", o.assign, "slot_request=[..];msg=[..] for the pinned scenario");
    };

    auto* check = app.add_subcommand("check", "check a specification or formula");
    common(check);
    check->add_option("--spec", o.spec, "1s, 1c, 2, 3, 4a, 4b, 5 or 6");
    check->add_option("--formula", o.formula, "formula valid at --at");
    check->add_option("--agent", o.agent, "restrict to one agent");
    check->add_option("--slot", o.slot, "restrict to one slot");
    check->add_option("--at", o.at, "res:s, tx:s, pre:s, end or a time");

    auto* refine = app.add_subcommand("refine", "check a sequence of candidate predicates");
    common(refine);
    refine->add_option("--agent", o.agent, "agent (default C1)");
    refine->add_option("--slot", o.slot, "slot (default 1)");
    refine->add_option("--at", o.at, "override the target's check time");

    auto* synth = app.add_subcommand("synthesize", "derive the exact predicate for a knowledge formula");
    common(synth);
    synth->add_option("--formula", o.formula, "knowledge formula");
    synth->add_option("--target", o.target, "kc: synthesize the transmit condition for every slot");
    synth->add_option("--agent", o.agent, "agent whose view is used");
    synth->add_option("--at", o.at, "res:s, tx:s, pre:s, end or a time");

    auto* trace = app.add_subcommand("trace", "print the contribution table of one run");
    common(trace);

    auto* oracle = app.add_subcommand("oracle", "compare the naive and reduced engines");
    common(oracle);
    oracle->add_option("--seed", o.seed, "seed for the random formulas");
    oracle->add_option("--formulas", o.count, "number of random formulas");
    oracle->add_option("--depth", o.depth, "maximum formula depth");
    oracle->add_flag("--inject-fault", o.inject_fault, "leak contributions in the reduced engine");

    std::vector<std::string> argv_store{"epicheck"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kHolds;
        }
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    for (auto* sub : app.get_subcommands()) {
        o.model_given = sub->count("--model") > 0;
        o.mode_given = sub->count("--mode") > 0;
    }
    try {
        if (check->parsed()) return detail::cmd_check(o, out);
        if (refine->parsed()) return detail::cmd_refine(o, out);
        if (synth->parsed()) return detail::cmd_synthesize(o, out);
        if (trace->parsed()) return detail::cmd_trace(o, out);
        return detail::cmd_oracle(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << "\n";
    }
    return kUsage;
}

}  // namespace epi::cli
