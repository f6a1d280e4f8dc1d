#pragma once

// The Dining Cryptographers two-phase broadcast: three agents in a key ring,
// S reservation rounds followed by S transmission rounds.
//
// Timeline (time t is the state after macro-step t):
//   steps 1..S      agent announces (slot_request == u)
//   steps S+1..2S   slot s is transmitted at step S+s
//   kc[s]           assigned after step S+s-1, read by the announcement of S+s
//   rcvd0/1[s]      assigned after step S+s
//   dlvrd           assigned after step 2S

#include <string>
#include <string_view>
#include <vector>

#include "../engine.hpp"

namespace epi::dc {

enum class Mode { speculative, conservative };

inline const char* to_string(Mode m) { return m == Mode::speculative ? "speculative" : "conservative"; }

inline Mode parse_mode(std::string_view s) {
    if (s == "speculative") return Mode::speculative;
    if (s == "conservative") return Mode::conservative;
    throw UsageError("unknown mode " + std::string(s));
}

inline constexpr std::size_t kAgents = 3;

struct DcParams {
    std::size_t slots = 3;
    Mode mode = Mode::speculative;

    std::size_t horizon() const { return 2 * slots; }
    std::size_t reservation_time(std::size_t s) const { return check_slot(s); }
    std::size_t transmission_time(std::size_t s) const { return slots + check_slot(s); }
    std::size_t pre_transmission_time(std::size_t s) const { return slots + check_slot(s) - 1; }
    std::size_t end_time() const { return horizon(); }

    std::size_t check_slot(std::size_t s) const {
        if (s < 1 || s > slots) throw UsageError("slot " + std::to_string(s) + " outside 1.." + std::to_string(slots));
        return s;
    }
};

inline std::string agent_name(std::size_t i) { return "C" + std::to_string(i + 1); }

inline VarId local_var(const Signature& sig, AgentId a, std::string_view local) {
    return sig.variable(sig.agent_name(a) + "." + std::string(local));
}

inline std::string indexed(std::string_view base, std::size_t k) {
    return std::string(base) + "[" + std::to_string(k) + "]";
}

// Two distinct agents both request slot s.
inline FormulaPtr conflict(const Signature& sig, const DcParams& p, std::size_t s) {
    p.check_slot(s);
    std::vector<FormulaPtr> pairs;
    for (AgentId i = 0; i < kAgents; ++i)
        for (AgentId j = i + 1; j < kAgents; ++j)
            pairs.push_back(f_and(f_atom(local_var(sig, i, "slot_request"), Cmp::Eq, static_cast<Value>(s)),
                                  f_atom(local_var(sig, j, "slot_request"), Cmp::Eq, static_cast<Value>(s))));
    return f_or_all(pairs);
}

// Some agent other than i sends bit x in slot s.
inline FormulaPtr sender(const Signature& sig, const DcParams& p, AgentId i, Value x, std::size_t s) {
    p.check_slot(s);
    if (i >= kAgents) throw UsageError("unknown agent");
    if (x != 0 && x != 1) throw UsageError("message bit must be 0 or 1");
    std::vector<FormulaPtr> terms;
    for (AgentId j = 0; j < kAgents; ++j) {
        if (j == i) continue;
        terms.push_back(f_and(f_atom(local_var(sig, j, "msg"), Cmp::Eq, x),
                              f_atom(local_var(sig, j, "slot_request"), Cmp::Eq, static_cast<Value>(s))));
    }
    return f_or_all(terms);
}

// K_i(someone requests s and there is no conflict on s).
inline FormulaPtr conflict_free_knowledge(const Signature& sig, const DcParams& p, AgentId i, std::size_t s) {
    std::vector<FormulaPtr> someone;
    for (AgentId j = 0; j < kAgents; ++j)
        someone.push_back(f_atom(local_var(sig, j, "slot_request"), Cmp::Eq, static_cast<Value>(s)));
    return f_know(i, f_and(f_or_all(someone), f_not(conflict(sig, p, s))));
}

// Right-hand side of the delivery condition:
//   AND over x, t of ((msg == x && slot_request == t) => K_i AND_{j != i} K_j sender(j, x, t))
inline FormulaPtr delivery_knowledge(const Signature& sig, const DcParams& p, AgentId i) {
    std::vector<FormulaPtr> conj;
    for (Value x = 0; x <= 1; ++x) {
        for (std::size_t t = 1; t <= p.slots; ++t) {
            std::vector<FormulaPtr> others;
            for (AgentId j = 0; j < kAgents; ++j)
                if (j != i) others.push_back(f_know(j, sender(sig, p, j, x, t)));
            auto guard = f_and(f_atom(local_var(sig, i, "msg"), Cmp::Eq, x),
                               f_atom(local_var(sig, i, "slot_request"), Cmp::Eq, static_cast<Value>(t)));
            conj.push_back(f_implies(guard, f_know(i, f_and_all(others))));
        }
    }
    return f_and_all(conj);
}

inline std::size_t parse_count(std::string_view text, const char* what) {
    std::size_t v = 0;
    if (text.empty()) throw UsageError(std::string("empty ") + what);
    for (char c : text) {
        if (c < '0' || c > '9') throw UsageError(std::string("bad ") + what + " '" + std::string(text) + "'");
        v = v * 10 + static_cast<std::size_t>(c - '0');
        if (v > 1000) throw UsageError(std::string(what) + " out of range");
    }
    return v;
}

// conflict(s) and sender(Ci, x, s) for the formula parser.
inline MacroTable macros(const Signature& sig, const DcParams& p) {
    return [&sig, p](std::string_view name, std::span<const std::string> args) -> FormulaPtr {
        if (name == "conflict") {
            if (args.size() != 1) throw UsageError("conflict takes one slot argument");
            return conflict(sig, p, parse_count(args[0], "slot"));
        }
        if (name == "sender") {
            if (args.size() != 3) throw UsageError("sender takes (agent, bit, slot)");
            AgentId i = sig.agent(args[0]);
            std::size_t x = parse_count(args[1], "bit");
            if (x > 1) throw UsageError("message bit must be 0 or 1");
            return sender(sig, p, i, static_cast<Value>(x), parse_count(args[2], "slot"));
        }
        return nullptr;
    };
}

inline FormulaPtr parse(std::string_view text, const Signature& sig, const DcParams& p) {
    return parse_formula(text, sig, macros(sig, p));
}

}  // namespace epi::dc
