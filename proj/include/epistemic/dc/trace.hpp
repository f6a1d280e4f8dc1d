#pragma once

// Contribution tables of single runs: one row per agent and one for rr.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "model.hpp"

namespace epi::dc {

struct WitnessTable {
    RunId run = 0;
    std::vector<Value> slot_request;            // per agent
    std::vector<Value> msg;                     // per agent
    std::vector<std::vector<Value>> contrib;    // [agent][step-1]
    std::vector<Value> rr;                      // [step-1]

    bool operator==(const WitnessTable&) const = default;
};

// Contribution bits of every agent at every step, up to the horizon.
inline std::vector<std::vector<Value>> contribution_matrix(const InterpretedSystem& sys, RunId r) {
    const auto& sig = sys.signature();
    std::vector<std::vector<Value>> out(kAgents);
    for (AgentId i = 0; i < kAgents; ++i) {
        VarId c = local_var(sig, i, "c");
        for (std::size_t u = 1; u < sys.layers(); ++u) out[i].push_back(sys.value(r, u, c));
    }
    return out;
}

inline WitnessTable witness_table(const InterpretedSystem& sys, RunId r) {
    sys.check_point({r, 0});
    const auto& sig = sys.signature();
    WitnessTable w;
    w.run = r;
    for (AgentId i = 0; i < kAgents; ++i) {
        w.slot_request.push_back(sys.value(r, 0, local_var(sig, i, "slot_request")));
        w.msg.push_back(sys.value(r, 0, local_var(sig, i, "msg")));
    }
    w.contrib = contribution_matrix(sys, r);
    for (std::size_t u = 1; u < sys.layers(); ++u) w.rr.push_back(sys.value(r, u, local_var(sig, 0, indexed("rr", u))));
    return w;
}

// rr[1..t] as recorded in the agent's observation history.
inline std::vector<Value> derived_round_results(const ObservationHistory& h, const Signature& sig) {
    std::vector<Value> out;
    for (std::size_t u = 1; u < h.records.size(); ++u) {
        VarId v = local_var(sig, h.agent, indexed("rr", u));
        for (auto [var, val] : h.records[u])
            if (var == v) out.push_back(val);
    }
    return out;
}

// First run whose initial slot_request and msg vectors match.
inline std::optional<RunId> find_run(const InterpretedSystem& sys, const std::vector<Value>& slot_request,
                                     const std::vector<Value>& msg) {
    const auto& sig = sys.signature();
    for (RunId r = 0; r < sys.run_count(); ++r) {
        bool ok = true;
        for (AgentId i = 0; i < kAgents && ok; ++i)
            ok = sys.value(r, 0, local_var(sig, i, "slot_request")) == slot_request.at(i) &&
                 sys.value(r, 0, local_var(sig, i, "msg")) == msg.at(i);
        if (ok) return r;
    }
    return std::nullopt;
}

inline std::string format_vector(const std::vector<Value>& v) {
    std::string out = "[";
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
    return out + "]";
}

// | s       | 1 | 2 | 3 || 4 | 5 | 6 |
// | Agent C1| 0 | 1 | 0 || 0 | 1 | 0 |
// ...
inline std::string render_table(const WitnessTable& w, std::size_t slots) {
    std::ostringstream os;
    auto row = [&](const std::string& head, auto cell) {
        os << "| " << head;
        for (std::size_t k = head.size(); k < 9; ++k) os << ' ';
        for (std::size_t u = 0; u < w.rr.size(); ++u) {
            os << (u == slots ? "||" : "|") << ' ' << cell(u) << ' ';
        }
        os << "|\n";
    };
    row("s", [](std::size_t u) { return std::to_string(u + 1); });
    for (std::size_t i = 0; i < w.contrib.size(); ++i)
        row("Agent " + agent_name(i), [&](std::size_t u) { return std::to_string(w.contrib[i][u]); });
    row("rr[s]", [&](std::size_t u) { return std::to_string(w.rr[u]); });
    os << "slot_request = " << format_vector(w.slot_request) << ", msg = " << format_vector(w.msg) << "\n";
    return os.str();
}

}  // namespace epi::dc
