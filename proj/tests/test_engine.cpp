#include <gtest/gtest.h>

#include "epistemic/engine.hpp"
#include "support.hpp"

namespace epi {
namespace {

Value get(const InterpretedSystem& sys, RunId r, std::size_t t, std::string_view name) {
    return sys.value(r, t, sys.signature().variable(name));
}

TEST(Engine, RoundResultIsParityOfContributions) {
    auto m = test::toy_model(3, 2);
    for (auto mode : {EngineMode::reduced, EngineMode::naive}) {
        auto sys = generate_runs(m, test::free_scenario(), mode);
        for (RunId r = 0; r < sys.run_count(); ++r) {
            Value b1 = get(sys, r, 0, "A1.b"), b2 = get(sys, r, 0, "A2.b"), b3 = get(sys, r, 0, "A3.b");
            EXPECT_EQ(get(sys, r, 1, "A2.rr[1]"), b1 ^ b2 ^ b3);
            EXPECT_EQ(get(sys, r, 2, "A3.rr[2]"), (!b1) ^ (!b2) ^ (!b3));
            EXPECT_EQ(get(sys, r, 2, "A1.seen"), get(sys, r, 2, "A1.rr[2]"));
            EXPECT_EQ(get(sys, r, 1, "A1.c"), b1);
        }
    }
}

TEST(Engine, RunCountsAndCanonicalOrder) {
    auto m = test::toy_model(3, 2);
    auto reduced = generate_runs(m, test::free_scenario(), EngineMode::reduced);
    auto naive = generate_runs(m, test::free_scenario(), EngineMode::naive);
    EXPECT_EQ(reduced.run_count(), 8u);
    EXPECT_EQ(naive.run_count(), 8u * 64u);
    for (RunId r = 0; r < naive.run_count(); ++r) {
        EXPECT_EQ(naive.initial_index(r), r / 64);
        EXPECT_EQ(naive.key_schedule(r), r % 64);
    }
    // Last free variable varies fastest.
    EXPECT_EQ(get(reduced, 1, 0, "A3.b"), 1);
    EXPECT_EQ(get(reduced, 1, 0, "A1.b"), 0);
    EXPECT_EQ(get(reduced, 4, 0, "A1.b"), 1);
}

TEST(Engine, NaiveAnnouncementsMaskContributionsWithKeys) {
    auto m = test::toy_model(3, 1);
    auto sys = generate_runs(m, test::free_scenario(), EngineMode::naive);
    for (RunId r = 0; r < sys.run_count(); ++r) {
        Value k12 = get(sys, r, 1, "k12"), k23 = get(sys, r, 1, "k23"), k31 = get(sys, r, 1, "k31");
        EXPECT_EQ(get(sys, r, 1, "said[1]"), get(sys, r, 1, "A1.c") ^ k31 ^ k12);
        EXPECT_EQ(get(sys, r, 1, "said[2]"), get(sys, r, 1, "A2.c") ^ k12 ^ k23);
        EXPECT_EQ(get(sys, r, 1, "said[3]"), get(sys, r, 1, "A3.c") ^ k23 ^ k31);
    }
}

TEST(Engine, ReducedEngineRecordsOthersParity) {
    auto m = test::toy_model(3, 2);
    auto sys = generate_runs(m, test::free_scenario());
    for (RunId r = 0; r < sys.run_count(); ++r)
        for (std::size_t t = 1; t <= 2; ++t)
            EXPECT_EQ(get(sys, r, t, "A1.ox"), get(sys, r, t, "A2.c") ^ get(sys, r, t, "A3.c"));
}

TEST(Engine, ScenarioRestrictsInitialAssignments) {
    auto m = test::toy_model(3, 1);
    Scenario sc{"one", {{"A1.b", {1}}, {"A3.b", {0}}}, std::nullopt};
    auto sys = generate_runs(m, sc);
    EXPECT_EQ(sys.run_count(), 2u);
    Scenario constrained{"c", {}, std::string("A1.b && A2.b")};
    EXPECT_EQ(generate_runs(m, constrained).run_count(), 2u);
}

TEST(Engine, ScenarioErrors) {
    auto m = test::toy_model(3, 1);
    EXPECT_THROW(generate_runs(m, Scenario{"x", {{"A1.seen", {0}}}, std::nullopt}), UsageError);
    EXPECT_THROW(generate_runs(m, Scenario{"x", {{"A1.b", {2}}}, std::nullopt}), UsageError);
    EXPECT_THROW(generate_runs(m, Scenario{"x", {{"A1.b", {}}}, std::nullopt}), UsageError);
    EXPECT_THROW(generate_runs(m, Scenario{"x", {{"A1.b", {0}}, {"A1.b", {1}}}, std::nullopt}), UsageError);
    EXPECT_THROW(generate_runs(m, Scenario{"x", {}, std::string("A1.b && !A1.b")}), UsageError);
    EXPECT_THROW(generate_runs(m, Scenario{"x", {}, std::string("K[A1](A1.b)")}), UsageError);
}

TEST(Engine, ModelValidation) {
    auto bad_phases = test::toy_model(3, 2);
    bad_phases.programs[0].phases.pop_back();
    EXPECT_THROW(generate_runs(bad_phases, test::free_scenario()), UsageError);

    auto no_announce = test::toy_model(3, 1);
    std::swap(no_announce.programs[1].phases[0].statements[0], no_announce.programs[1].phases[0].statements[1]);
    EXPECT_THROW(generate_runs(no_announce, test::free_scenario()), UsageError);

    auto writes_rr = test::toy_model(3, 1);
    writes_rr.programs[0].phases[0].statements.push_back(AssignLocal{"rr[1]", e_true()});
    EXPECT_THROW(generate_runs(writes_rr, test::free_scenario()), UsageError);

    auto writes_c = test::toy_model(3, 1);
    writes_c.programs[0].phases[0].statements.push_back(AssignLocal{"c", e_true()});
    EXPECT_THROW(generate_runs(writes_c, test::free_scenario()), UsageError);

    auto undeclared = test::toy_model(3, 1);
    undeclared.programs[2].phases[0].statements.push_back(AssignLocal{"zz", e_true()});
    EXPECT_THROW(generate_runs(undeclared, test::free_scenario()), UsageError);

    auto lonely = test::toy_model(1, 1);
    EXPECT_THROW(generate_runs(lonely, test::free_scenario()), UsageError);
}

TEST(Engine, EarlyReadOfHistoryVariableIsAModelError) {
    auto m = test::toy_model(3, 2);
    m.programs[0].phases[0].statements[0] = Announce{e_var("rr[2]")};
    EXPECT_THROW(generate_runs(m, test::free_scenario()), ModelError);
}

TEST(Engine, NaiveRunSetLimit) {
    auto m = test::toy_model(3, 6);
    EngineOptions opt{EngineMode::naive};
    opt.max_runs = 1000;
    EXPECT_THROW(generate_runs(m, test::free_scenario(), opt), UsageError);
}

TEST(Engine, KnowledgeStatementsNeedExecuteKbp) {
    auto m = test::toy_model(3, 2);
    m.programs[0].phases[1].statements.push_back(
        AssignKnowledge{"seen", [](const Signature& sig) { return parse_formula("K[A1](A2.b)", sig); }});
    EXPECT_THROW(generate_runs(m, test::free_scenario()), UsageError);
    auto sys = execute_kbp(m, test::free_scenario());
    // A1 never knows another agent's bit in this protocol.
    for (RunId r = 0; r < sys.run_count(); ++r) EXPECT_EQ(get(sys, r, 2, "A1.seen"), 0);
}

TEST(Engine, FutureKnowledgeTestsAreRejected) {
    auto m = test::toy_model(3, 2);
    m.programs[0].phases[0].statements[0] =
        IfKnowledge{[](const Signature& sig) { return parse_formula("X K[A1](A1.b)", sig); }, e_true(), e_false()};
    EXPECT_THROW(execute_kbp(m, test::free_scenario()), UsageError);
}

TEST(Engine, KnowledgeGuardedAnnouncement) {
    // A1 announces 1 in step 2 exactly when it knows A2 and A3 agree.
    auto m = test::toy_model(3, 2);
    m.programs[0].phases[1].statements[0] = IfKnowledge{
        [](const Signature& sig) { return parse_formula("K[A1](A2.b && A3.b || !A2.b && !A3.b)", sig); }, e_true(),
        e_false()};
    auto sys = execute_kbp(m, test::free_scenario());
    for (RunId r = 0; r < sys.run_count(); ++r) {
        Value b2 = get(sys, r, 0, "A2.b"), b3 = get(sys, r, 0, "A3.b");
        EXPECT_EQ(get(sys, r, 2, "A1.c"), b2 == b3 ? 1 : 0);
    }
}

TEST(Engine, ExecuteStepMatchesGeneratedRuns) {
    auto m = test::toy_model(3, 2);
    auto cm = compile(m, EngineMode::naive);
    auto sys = generate_runs(m, test::free_scenario(), EngineMode::naive);
    for (RunId r : {0u, 77u, 300u, 511u}) {
        KeySchedule keys{cm.edges(), sys.key_schedule(r)};
        GlobalState s = sys.global_state(r, 0);
        for (std::size_t step = 1; step <= 2; ++step) {
            s = execute_step(cm, s, keys, step);
            EXPECT_EQ(s.valuation, sys.global_state(r, step).valuation);
        }
    }
    GlobalState s0 = sys.global_state(0, 0);
    EXPECT_THROW(execute_step(cm, s0, KeySchedule{cm.edges(), 0}, 2), UsageError);
}

TEST(Engine, LocalExpressionOverHistory) {
    auto m = test::toy_model(3, 2);
    auto sys = generate_runs(m, test::free_scenario());
    const auto& sig = sys.signature();
    for (RunId r = 0; r < sys.run_count(); ++r) {
        auto h = observation_of(sys, {r, 1}, 1);
        EXPECT_EQ(eval_local_expr(sig, e_xor(e_var("b"), e_var("rr[1]")), h),
                  get(sys, r, 0, "A1.b") ^ get(sys, r, 0, "A3.b"));
        EXPECT_THROW(eval_local_expr(sig, e_var("rr[2]"), h), ModelError);
    }
}

}  // namespace
}  // namespace epi
