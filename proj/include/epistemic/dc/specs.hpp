#pragma once

// The six specifications of the case study, instantiated per agent and slot
// with the time at which each is checked.

#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace epi::dc {

enum class SpecId { s1s, s1c, s2, s3, s4a, s4b, s5, s6 };

inline const std::vector<SpecId>& all_specs() {
    static const std::vector<SpecId> v{SpecId::s1s, SpecId::s1c, SpecId::s2, SpecId::s3,
                                       SpecId::s4a, SpecId::s4b, SpecId::s5, SpecId::s6};
    return v;
}

inline const char* to_string(SpecId id) {
    switch (id) {
        case SpecId::s1s: return "1s";
        case SpecId::s1c: return "1c";
        case SpecId::s2: return "2";
        case SpecId::s3: return "3";
        case SpecId::s4a: return "4a";
        case SpecId::s4b: return "4b";
        case SpecId::s5: return "5";
        case SpecId::s6: return "6";
    }
    return "?";
}

inline SpecId parse_spec_id(std::string_view s) {
    for (SpecId id : all_specs())
        if (s == to_string(id)) return id;
    throw UsageError("unknown specification " + std::string(s));
}

inline bool slotted(SpecId id) { return id != SpecId::s5 && id != SpecId::s6; }

struct SpecInstance {
    SpecId id;
    AgentId agent = 0;
    std::size_t slot = 0;  // 0 for slot-free specifications
    FormulaPtr formula;
    std::size_t time = 0;

    std::string label(const Signature& sig) const {
        std::string out = std::string("spec ") + to_string(id) + " " + sig.agent_name(agent);
        if (slot) out += " slot " + std::to_string(slot);
        return out;
    }
};

inline SpecInstance spec(const Signature& sig, const DcParams& p, SpecId id, AgentId i, std::size_t s = 0) {
    if (i >= kAgents) throw UsageError("unknown agent");
    if (slotted(id)) p.check_slot(s);
    else if (s != 0) throw UsageError(std::string("specification ") + to_string(id) + " takes no slot");
    auto var = [&](std::string_view local) { return f_atom(local_var(sig, i, local), Cmp::Eq, 1); };
    SpecInstance out{id, i, s, nullptr, 0};
    switch (id) {
        case SpecId::s1s:
            out.formula = f_iff(var(indexed("kc", s)), f_not(f_know(i, conflict(sig, p, s))));
            out.time = p.pre_transmission_time(s);
            break;
        case SpecId::s1c:
            out.formula = f_iff(var(indexed("kc", s)), f_know(i, f_not(conflict(sig, p, s))));
            out.time = p.pre_transmission_time(s);
            break;
        case SpecId::s2:
            out.formula = f_implies(conflict(sig, p, s), f_know(i, conflict(sig, p, s)));
            out.time = p.end_time();
            break;
        case SpecId::s3:
            out.formula = f_implies(
                f_and(conflict(sig, p, s), f_atom(local_var(sig, i, "slot_request"), Cmp::Eq, static_cast<Value>(s))),
                f_know(i, conflict(sig, p, s)));
            out.time = p.end_time();
            break;
        case SpecId::s4a:
        case SpecId::s4b: {
            Value x = id == SpecId::s4a ? 0 : 1;
            out.formula = f_iff(var(indexed(x == 0 ? "rcvd0" : "rcvd1", s)), f_know(i, sender(sig, p, i, x, s)));
            out.time = p.transmission_time(s);
            break;
        }
        case SpecId::s5:
            out.formula = f_iff(var("dlvrd"), delivery_knowledge(sig, p, i));
            out.time = p.end_time();
            break;
        case SpecId::s6: {
            std::vector<FormulaPtr> known;
            std::vector<FormulaPtr> unknown;
            for (Value x = 0; x <= 1; ++x) {
                std::vector<FormulaPtr> same;
                for (AgentId j = 0; j < kAgents; ++j)
                    if (j != i) same.push_back(f_atom(local_var(sig, j, "msg"), Cmp::Eq, x));
                known.push_back(f_know(i, f_and_all(same)));
            }
            for (AgentId j = 0; j < kAgents; ++j)
                if (j != i) unknown.push_back(f_not(f_knows_value(sig, i, local_var(sig, j, "msg"))));
            out.formula = f_or(f_or_all(known), f_and_all(unknown));
            out.time = p.end_time();
            break;
        }
    }
    return out;
}

// Every (agent, slot) instance of a specification.
inline std::vector<SpecInstance> spec_instances(const Signature& sig, const DcParams& p, SpecId id) {
    std::vector<SpecInstance> out;
    for (AgentId i = 0; i < kAgents; ++i) {
        if (!slotted(id)) {
            out.push_back(spec(sig, p, id, i));
            continue;
        }
        for (std::size_t s = 1; s <= p.slots; ++s) out.push_back(spec(sig, p, id, i, s));
    }
    return out;
}

}  // namespace epi::dc
