#pragma once

// Key elimination and the oracle comparing it with full key enumeration.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "engine.hpp"

namespace epi {

// Per step u in 1..time: (own contribution, XOR of the other contributions).
// Requires a reduced-engine system; the run is the index of v.
inline std::vector<std::pair<bool, bool>> invariant_history(const InterpretedSystem& reduced, RunId v,
                                                            AgentId agent, std::size_t time) {
    reduced.check_agent(agent);
    reduced.check_point({v, time});
    const auto& sig = reduced.signature();
    const std::string name = sig.agent_name(agent);
    VarId c = sig.variable(name + ".c");
    VarId ox = sig.variable(name + ".ox");
    std::vector<std::pair<bool, bool>> out;
    for (std::size_t u = 1; u <= time; ++u) out.emplace_back(reduced.value(v, u, c) != 0, reduced.value(v, u, ox) != 0);
    return out;
}

inline InterpretedSystem reduce(const ProtocolModel& model, const Scenario& scenario) {
    return generate_runs(model, scenario, EngineMode::reduced);
}

struct Disagreement {
    std::string formula;
    std::size_t time = 0;
    RunId naive_run = 0;
    RunId reduced_run = 0;
    bool naive_value = false;
    bool reduced_value = false;
};

struct AgreementReport {
    std::size_t naive_runs = 0;
    std::size_t reduced_runs = 0;
    std::size_t formulas = 0;
    std::size_t comparisons = 0;  // (formula, time) pairs
    std::vector<Disagreement> disagreements;  // first per (formula, time)
    std::vector<std::string> rejected;        // formulas not parseable on one side

    bool agree() const { return disagreements.empty() && rejected.empty(); }
};

// Compares both engines on every formula at every time it can be evaluated.
// Formulas are given as text and parsed against each engine's signature.
inline AgreementReport engines_agree(const InterpretedSystem& naive, const InterpretedSystem& reduced,
                                     const MacroTable& naive_macros, const MacroTable& reduced_macros,
                                     const std::vector<std::string>& suite) {
    AgreementReport rep;
    rep.naive_runs = naive.run_count();
    rep.reduced_runs = reduced.run_count();
    for (RunId r = 0; r < naive.run_count(); ++r)
        if (naive.initial_index(r) >= reduced.run_count()) throw UsageError("systems do not share initial assignments");
    for (const auto& text : suite) {
        ++rep.formulas;
        FormulaPtr fn, fr;
        try {
            fn = parse_formula(text, naive.signature(), naive_macros);
            fr = parse_formula(text, reduced.signature(), reduced_macros);
        } catch (const ParseError& e) {
            rep.rejected.push_back(text + ": " + e.what());
            continue;
        }
        Evaluator en(naive), er(reduced);
        const std::size_t depth = temporal_depth(*fn);
        for (std::size_t t = 0; t + depth <= naive.horizon(); ++t) {
            ++rep.comparisons;
            const auto& a = en.truth(fn, t);
            const auto& b = er.truth(fr, t);
            for (RunId r = 0; r < naive.run_count(); ++r) {
                RunId v = static_cast<RunId>(naive.initial_index(r));
                if (a[r] == b[v]) continue;
                rep.disagreements.push_back({text, t, r, v, a[r] != 0, b[v] != 0});
                break;
            }
        }
    }
    return rep;
}

inline AgreementReport engines_agree(const ProtocolModel& model, const Scenario& scenario,
                                     const std::vector<std::string>& suite, bool leak_contributions = false) {
    EngineOptions naive_opts{EngineMode::naive};
    EngineOptions reduced_opts{EngineMode::reduced};
    reduced_opts.leak_contributions = leak_contributions;
    auto mn = compile(model, naive_opts);
    auto mr = compile(model, reduced_opts);
    auto naive = detail::run_engine(model, mn, scenario);
    auto reduced = detail::run_engine(model, mr, scenario);
    return engines_agree(naive, reduced, mn.macros, mr.macros, suite);
}

// Random formulas in the textual grammar, drawn from a caller-supplied atom
// pool. Depth counts operator nesting; atoms have depth 0.
class FormulaGenerator {
public:
    FormulaGenerator(std::uint64_t seed, std::vector<std::string> atoms, std::vector<std::string> agents)
        : rng_(seed), atoms_(std::move(atoms)), agents_(std::move(agents)) {
        if (atoms_.empty() || agents_.empty()) throw UsageError("formula generator needs atoms and agents");
    }

    std::string next(int max_depth) { return gen(max_depth); }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    std::string gen(int depth) {
        if (depth == 0 || pick(4) == 0) return atoms_[pick(atoms_.size())];
        switch (pick(7)) {
            case 0: return "!(" + gen(depth - 1) + ")";
            case 1: return "(" + gen(depth - 1) + " && " + gen(depth - 1) + ")";
            case 2: return "(" + gen(depth - 1) + " || " + gen(depth - 1) + ")";
            case 3: return "(" + gen(depth - 1) + " => " + gen(depth - 1) + ")";
            case 4: return "X (" + gen(depth - 1) + ")";
            default: return "K[" + agents_[pick(agents_.size())] + "](" + gen(depth - 1) + ")";
        }
    }

    std::mt19937_64 rng_;
    std::vector<std::string> atoms_;
    std::vector<std::string> agents_;
};

}  // namespace epi
