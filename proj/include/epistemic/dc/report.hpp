#pragma once

// Text and JSON renderings of verdicts and counterexamples.

#include <sstream>
#include <string>

#include <json.hpp>

#include "../refine.hpp"
#include "trace.hpp"

namespace epi::dc {

using json = nlohmann::ordered_json;

inline json witness_json(const WitnessTable& w) {
    return json{{"slot_request", w.slot_request}, {"msg", w.msg}, {"contrib", w.contrib}, {"rr", w.rr}};
}

inline json witnesses_json(const InterpretedSystem& sys, const Counterexample& cex) {
    json out = json::array();
    for (const auto& pt : cex.witnesses) out.push_back(witness_json(witness_table(sys, pt.run)));
    return out;
}

// {"spec"|"target": name, "verdict", "direction"?, "witnesses": [..]} plus
// the agent, time and formula of the falsified check.
inline json verdict_json(const InterpretedSystem& sys, std::string_view key, std::string_view name, bool holds,
                         const std::optional<Counterexample>& cex) {
    json out;
    out[std::string(key)] = name;
    out["verdict"] = holds ? "Holds" : "Fails";
    if (cex) {
        out["agent"] = sys.signature().agent_name(cex->agent);
        out["time"] = cex->time;
        out["formula"] = cex->formula;
        if (cex->direction) out["direction"] = to_string(*cex->direction);
        out["witnesses"] = witnesses_json(sys, *cex);
    } else {
        out["witnesses"] = json::array();
    }
    return out;
}

inline std::string render_counterexample(const InterpretedSystem& sys, const Counterexample& cex, std::size_t slots) {
    std::ostringstream os;
    os << "falsified at time " << cex.time << " for " << sys.signature().agent_name(cex.agent) << ": " << cex.formula
       << "\n";
    if (cex.direction) os << "direction: " << to_string(*cex.direction) << "\n";
    for (std::size_t k = 0; k < cex.witnesses.size(); ++k) {
        os << (k == 0 ? "witness" : "indistinguishable partner") << " (run " << cex.witnesses[k].run << "):\n";
        os << render_table(witness_table(sys, cex.witnesses[k].run), slots);
    }
    return os.str();
}

}  // namespace epi::dc
