#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epistemic/engine.hpp"

namespace epi::test {

// n agents in a ring, each with a free bit b. Step u announces b when u is
// odd and !b when it is even; rr[u] records each round.
inline ProtocolModel toy_model(std::size_t agents = 3, std::size_t horizon = 2) {
    ProtocolModel m;
    for (std::size_t i = 0; i < agents; ++i) m.agents.push_back("A" + std::to_string(i + 1));
    m.horizon = horizon;
    m.locals.push_back({"b", Domain::boolean(), Init::Free, 0, 0});
    m.locals.push_back({"seen", Domain::boolean(), Init::Fixed, 0, 0});
    for (std::size_t u = 1; u <= horizon; ++u)
        m.locals.push_back({"rr[" + std::to_string(u) + "]", Domain::boolean(), Init::Unassigned, 0, u});
    for (const auto& a : m.agents) {
        AgentProgram p{a, {}};
        for (std::size_t u = 1; u <= horizon; ++u) {
            Phase ph{{Announce{u % 2 ? e_var("b") : e_not(e_var("b"))}}};
            ph.statements.push_back(AssignLocal{"seen", e_var("rr[" + std::to_string(u) + "]")});
            p.phases.push_back(std::move(ph));
        }
        m.programs.push_back(std::move(p));
    }
    return m;
}

inline Scenario free_scenario() { return Scenario{"all", {}, std::nullopt}; }

inline std::vector<std::string> toy_atoms(const ProtocolModel& m) {
    std::vector<std::string> atoms;
    for (const auto& a : m.agents) {
        atoms.push_back(a + ".b == 1");
        atoms.push_back(a + ".seen == 1");
    }
    atoms.push_back("true");
    return atoms;
}

}  // namespace epi::test
