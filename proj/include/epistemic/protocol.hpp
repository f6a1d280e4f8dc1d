#pragma once

// Straight-line agent programs for a ring of agents that announce one bit per
// macro-step through a dining-cryptographers round. Each phase corresponds to
// one macro-step: it starts with the agent's announcement (computed from the
// state before the step) and continues with assignments that see the state
// after the step, including the round result of the step.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "formula.hpp"
#include "local_expr.hpp"
#include "parser.hpp"

namespace epi {

enum class EngineMode { naive, reduced };

inline const char* to_string(EngineMode m) { return m == EngineMode::naive ? "naive" : "reduced"; }

// Knowledge formulas depend on the variable numbering of the engine's
// signature, so programs carry builders rather than formulas.
using FormulaBuilder = std::function<FormulaPtr(const Signature&)>;

struct Announce {
    ExprPtr bit;
};

// Announce then_bit if the test holds at the start of the step, else else_bit.
// The test may mix local atoms with knowledge operators of the same agent.
struct IfKnowledge {
    FormulaBuilder test;
    ExprPtr then_bit;
    ExprPtr else_bit;
};

struct AssignLocal {
    std::string var;
    ExprPtr value;
};

struct AssignKnowledge {
    std::string var;
    FormulaBuilder formula;
};

using Statement = std::variant<Announce, IfKnowledge, AssignLocal, AssignKnowledge>;

struct Phase {
    std::vector<Statement> statements;  // statements[0] is an Announce or IfKnowledge
};

struct AgentProgram {
    std::string agent;
    std::vector<Phase> phases;  // one per macro-step
};

enum class Init {
    Free,        // chosen by the scenario
    Fixed,       // `initial`
    Unassigned,  // history variable, written at `assigned_at`
};

struct LocalVarDecl {
    std::string name;
    Domain domain = Domain::boolean();
    Init init = Init::Fixed;
    Value initial = 0;
    std::size_t assigned_at = 0;
};

struct ProtocolModel {
    std::vector<std::string> agents;  // ring order; agent i shares key i with agent i+1
    std::vector<LocalVarDecl> locals;  // declared for every agent
    std::vector<AgentProgram> programs;
    std::size_t horizon = 0;
    // Local array the engine writes the round result of step u into: rr[u].
    std::string round_result = "rr";
    std::vector<std::pair<std::string, std::string>> aliases;
    std::function<MacroTable(const Signature&)> macros;
};

// Which initial assignments are possible.
struct Scenario {
    std::string name;
    // Qualified free variable -> admissible values, in enumeration order.
    // Free variables not listed range over their whole domain.
    std::vector<std::pair<std::string, std::vector<Value>>> free_values;
    std::optional<std::string> constraint;  // propositional formula over initial variables
};

// One fresh bit per ring edge per step.
struct KeySchedule {
    std::size_t edges = 0;
    std::uint64_t bits = 0;

    bool key(std::size_t step, std::size_t edge) const {
        return (bits >> ((step - 1) * edges + edge)) & 1u;
    }
};

}  // namespace epi
