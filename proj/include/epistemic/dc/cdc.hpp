#pragma once

// Builders for the CDC knowledge-based program and its generic
// implementation, plus the shipped scenarios.

#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "predicates.hpp"

namespace epi::dc {

namespace detail {

inline ProtocolModel skeleton(const DcParams& p) {
    if (p.slots < 1 || p.slots > 7) throw UsageError("slot count must be in 1..7");
    ProtocolModel m;
    for (std::size_t i = 0; i < kAgents; ++i) m.agents.push_back(agent_name(i));
    const std::size_t S = p.slots, T = p.horizon();
    m.horizon = T;
    m.locals.push_back({"slot_request", Domain::range(0, static_cast<Value>(S)), Init::Free, 0, 0});
    m.locals.push_back({"msg", Domain::boolean(), Init::Free, 0, 0});
    for (const char* base : {"kc", "rcvd0", "rcvd1"})
        for (std::size_t s = 1; s <= S; ++s) m.locals.push_back({indexed(base, s), Domain::boolean(), Init::Fixed, 0, 0});
    m.locals.push_back({"dlvrd", Domain::boolean(), Init::Fixed, 0, 0});
    for (std::size_t u = 1; u <= T; ++u) m.locals.push_back({indexed("rr", u), Domain::boolean(), Init::Unassigned, 0, u});
    for (std::size_t u = 1; u <= T; ++u) m.aliases.emplace_back(indexed("RR", u), agent_name(0) + "." + indexed("rr", u));
    m.macros = [p](const Signature& sig) { return macros(sig, p); };
    return m;
}

inline ExprPtr reservation_bit(std::size_t s) { return e_eq("slot_request", static_cast<Value>(s)); }

}  // namespace detail

// The generic implementation with the given predicates plugged in.
inline ProtocolModel build_cdc(const DcParams& p, const PredicateSet& preds) {
    if (!preds.kc || !preds.rcvd0 || !preds.rcvd1 || !preds.dlvrd)
        throw UsageError("predicate set must cover kc, rcvd0, rcvd1 and dlvrd");
    auto m = detail::skeleton(p);
    const std::size_t S = p.slots;
    for (AgentId i = 0; i < kAgents; ++i) {
        AgentProgram prog{agent_name(i), {}};
        for (std::size_t u = 1; u <= S; ++u) {
            Phase ph{{Announce{detail::reservation_bit(u)}}};
            if (u == S) ph.statements.push_back(AssignLocal{indexed("kc", 1), preds.kc(i, 1)});
            prog.phases.push_back(std::move(ph));
        }
        for (std::size_t s = 1; s <= S; ++s) {
            auto bit = e_and(e_and(detail::reservation_bit(s), e_var(indexed("kc", s))), e_var("msg"));
            Phase ph{{Announce{bit}}};
            ph.statements.push_back(AssignLocal{indexed("rcvd0", s), preds.rcvd0(i, s)});
            ph.statements.push_back(AssignLocal{indexed("rcvd1", s), preds.rcvd1(i, s)});
            if (s < S) ph.statements.push_back(AssignLocal{indexed("kc", s + 1), preds.kc(i, s + 1)});
            else ph.statements.push_back(AssignLocal{"dlvrd", preds.dlvrd(i, 1)});
            prog.phases.push_back(std::move(ph));
        }
        m.programs.push_back(std::move(prog));
    }
    return m;
}

// Knowledge condition guarding transmission in slot s.
inline FormulaPtr transmit_condition(const Signature& sig, const DcParams& p, AgentId i, std::size_t s) {
    return p.mode == Mode::speculative ? f_not(f_know(i, conflict(sig, p, s))) : f_know(i, f_not(conflict(sig, p, s)));
}

// The knowledge-based program. kc[s] records the transmit condition at the
// point where the transmission test is taken, so the kc specifications apply
// to this model as well.
inline ProtocolModel build_cdc_kbp(const DcParams& p) {
    auto m = detail::skeleton(p);
    const std::size_t S = p.slots;
    for (AgentId i = 0; i < kAgents; ++i) {
        AgentProgram prog{agent_name(i), {}};
        auto cond = [p, i](std::size_t s) {
            return FormulaBuilder([p, i, s](const Signature& sig) { return transmit_condition(sig, p, i, s); });
        };
        for (std::size_t u = 1; u <= S; ++u) {
            Phase ph{{Announce{detail::reservation_bit(u)}}};
            if (u == S) ph.statements.push_back(AssignKnowledge{indexed("kc", 1), cond(1)});
            prog.phases.push_back(std::move(ph));
        }
        for (std::size_t s = 1; s <= S; ++s) {
            FormulaBuilder test = [p, i, s](const Signature& sig) {
                return f_and(f_atom(local_var(sig, i, "slot_request"), Cmp::Eq, static_cast<Value>(s)),
                             transmit_condition(sig, p, i, s));
            };
            Phase ph{{IfKnowledge{test, e_var("msg"), e_false()}}};
            for (Value x = 0; x <= 1; ++x)
                ph.statements.push_back(AssignKnowledge{
                    indexed(x == 0 ? "rcvd0" : "rcvd1", s),
                    [p, i, x, s](const Signature& sig) { return f_know(i, sender(sig, p, i, x, s)); }});
            if (s < S) ph.statements.push_back(AssignKnowledge{indexed("kc", s + 1), cond(s + 1)});
            else
                ph.statements.push_back(
                    AssignKnowledge{"dlvrd", [p, i](const Signature& sig) { return delivery_knowledge(sig, p, i); }});
            prog.phases.push_back(std::move(ph));
        }
        m.programs.push_back(std::move(prog));
    }
    return m;
}

// ---- scenarios ----

inline std::vector<Value> value_range(Value lo, Value hi) {
    std::vector<Value> out;
    for (Value v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

// Canonical enumeration order: slot_request vector, then msg vector.
inline Scenario scenario_from_domains(std::string name, const std::vector<std::vector<Value>>& slot_requests,
                                      const std::vector<std::vector<Value>>& msgs,
                                      std::optional<std::string> constraint = std::nullopt) {
    Scenario sc{std::move(name), {}, std::move(constraint)};
    for (std::size_t i = 0; i < kAgents; ++i) sc.free_values.emplace_back(agent_name(i) + ".slot_request", slot_requests.at(i));
    for (std::size_t i = 0; i < kAgents; ++i) sc.free_values.emplace_back(agent_name(i) + ".msg", msgs.at(i));
    return sc;
}

// Any agent may request any slot or none.
inline Scenario unknown_scenario(const DcParams& p) {
    auto sr = value_range(0, static_cast<Value>(p.slots));
    return scenario_from_domains("unknown", {sr, sr, sr}, {{0, 1}, {0, 1}, {0, 1}});
}

// Every agent requests some slot.
inline Scenario referendum_scenario(const DcParams& p) {
    auto sr = value_range(1, static_cast<Value>(p.slots));
    return scenario_from_domains("referendum", {sr, sr, sr}, {{0, 1}, {0, 1}, {0, 1}});
}

inline Scenario pinned_scenario(const DcParams& p, const std::vector<Value>& slot_request, const std::vector<Value>& msg) {
    if (slot_request.size() != kAgents || msg.size() != kAgents)
        throw UsageError("pinned vectors need one entry per agent");
    for (Value v : slot_request)
        if (v < 0 || v > static_cast<Value>(p.slots)) throw UsageError("slot_request outside 0.." + std::to_string(p.slots));
    for (Value v : msg)
        if (v != 0 && v != 1) throw UsageError("msg must be 0 or 1");
    std::vector<std::vector<Value>> sr, m;
    for (std::size_t i = 0; i < kAgents; ++i) {
        sr.push_back({slot_request[i]});
        m.push_back({msg[i]});
    }
    return scenario_from_domains("pinned", sr, m);
}

// Unknown-senders domains restricted by a propositional formula over the
// initial variables, e.g. "C1.slot_request != 0 && C1.msg == 1".
inline Scenario custom_scenario(const DcParams& p, std::string constraint) {
    auto sc = unknown_scenario(p);
    sc.name = "custom";
    sc.constraint = std::move(constraint);
    return sc;
}

// "slot_request=[2,2,2];msg=[1,1,1]"
inline std::pair<std::vector<Value>, std::vector<Value>> parse_assignment(std::string_view text) {
    std::optional<std::vector<Value>> sr, msg;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) -> void { throw UsageError("bad assignment '" + std::string(text) + "': " + what); };
    while (pos < text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string part(text.substr(pos, end - pos));
        pos = end + 1;
        part.erase(std::remove_if(part.begin(), part.end(), [](unsigned char c) { return std::isspace(c); }), part.end());
        if (part.empty()) continue;
        auto eq = part.find('=');
        if (eq == std::string::npos) fail("expected name=[..]");
        std::string key = part.substr(0, eq), list = part.substr(eq + 1);
        if (list.size() < 2 || list.front() != '[' || list.back() != ']') fail("expected a bracketed list");
        std::vector<Value> vals;
        std::string body = list.substr(1, list.size() - 2);
        std::size_t q = 0;
        while (q <= body.size()) {
            std::size_t c = body.find(',', q);
            if (c == std::string::npos) c = body.size();
            std::string item = body.substr(q, c - q);
            if (item == "true") vals.push_back(1);
            else if (item == "false") vals.push_back(0);
            else vals.push_back(static_cast<Value>(parse_count(item, "value")));
            q = c + 1;
        }
        if (key == "slot_request") sr = vals;
        else if (key == "msg") msg = vals;
        else fail("unknown variable " + key);
    }
    if (!sr || !msg) fail("both slot_request and msg are required");
    return {*sr, *msg};
}

}  // namespace epi::dc
