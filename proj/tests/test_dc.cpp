#include <gtest/gtest.h>

#include "epistemic/dc/report.hpp"
#include "epistemic/dc/synth.hpp"

namespace epi::dc {
namespace {

class CaseStudy : public ::testing::Test {
protected:
    CaseStudy() : sys(generate_runs(build_cdc(p, default_predicates(p)), unknown_scenario(p))) {}

    RunId run(std::vector<Value> sr, std::vector<Value> msg) const {
        auto r = find_run(sys, sr, msg);
        EXPECT_TRUE(r.has_value());
        return r.value_or(0);
    }

    DcParams p;
    InterpretedSystem sys;
};

TEST(DcParams, Timeline) {
    DcParams p;
    EXPECT_EQ(p.horizon(), 6u);
    EXPECT_EQ(p.reservation_time(2), 2u);
    EXPECT_EQ(p.pre_transmission_time(1), 3u);
    EXPECT_EQ(p.transmission_time(3), 6u);
    EXPECT_EQ(p.end_time(), 6u);
    EXPECT_THROW(p.check_slot(0), UsageError);
    EXPECT_THROW(p.check_slot(4), UsageError);
    EXPECT_EQ(parse_mode("conservative"), Mode::conservative);
    EXPECT_THROW(parse_mode("bold"), UsageError);
}

TEST(Scenarios, Sizes) {
    DcParams p;
    auto m = build_cdc(p, default_predicates(p));
    EXPECT_EQ(generate_runs(m, unknown_scenario(p)).run_count(), 512u);
    EXPECT_EQ(generate_runs(m, referendum_scenario(p)).run_count(), 216u);
    EXPECT_EQ(generate_runs(m, pinned_scenario(p, {2, 0, 0}, {1, 1, 1})).run_count(), 1u);
    EXPECT_EQ(generate_runs(m, custom_scenario(p, "C1.slot_request != 0 && C1.msg == 1")).run_count(), 192u);
    EXPECT_THROW(pinned_scenario(p, {4, 0, 0}, {1, 1, 1}), UsageError);
    EXPECT_THROW(pinned_scenario(p, {1, 0}, {1, 1, 1}), UsageError);
    EXPECT_THROW(pinned_scenario(p, {1, 0, 0}, {1, 2, 1}), UsageError);
}

TEST(Scenarios, ParseAssignment) {
    auto [sr, msg] = parse_assignment("slot_request=[2, 0,0]; msg=[true,1,false]");
    EXPECT_EQ(sr, (std::vector<Value>{2, 0, 0}));
    EXPECT_EQ(msg, (std::vector<Value>{1, 1, 0}));
    EXPECT_THROW(parse_assignment("slot_request=[2,0,0]"), UsageError);
    EXPECT_THROW(parse_assignment("slot_request=2,0,0;msg=[1,1,1]"), UsageError);
    EXPECT_THROW(parse_assignment("slot_request=[a];msg=[1]"), UsageError);
    EXPECT_THROW(parse_assignment("color=[1];msg=[1]"), UsageError);
}

TEST_F(CaseStudy, CollisionPairRoundResults) {
    const std::vector<Value> rr{0, 1, 0, 0, 1, 0};
    EXPECT_EQ(witness_table(sys, run({2, 2, 2}, {1, 1, 1})).rr, rr);
    EXPECT_EQ(witness_table(sys, run({2, 0, 0}, {1, 1, 1})).rr, rr);
    EXPECT_EQ(witness_table(sys, run({0, 0, 0}, {0, 0, 0})).rr, std::vector<Value>(6, 0));
}

TEST_F(CaseStudy, ContributionsFollowTheProtocol) {
    auto w = witness_table(sys, run({1, 3, 0}, {1, 0, 1}));
    EXPECT_EQ(w.contrib[0], (std::vector<Value>{1, 0, 0, 1, 0, 0}));
    EXPECT_EQ(w.contrib[1], (std::vector<Value>{0, 0, 1, 0, 0, 0}));
    EXPECT_EQ(w.contrib[2], (std::vector<Value>(6, 0)));
    EXPECT_EQ(w.rr, (std::vector<Value>{1, 0, 1, 1, 0, 0}));
}

TEST_F(CaseStudy, PredicatesBeforeTransmission) {
    auto lib = builtin_library(p);
    auto kc = parse_predicate(lib.at("kc_guess").expr, p, 2, lib);
    EXPECT_TRUE(predicate_truth(sys, kc, 0, 3)[run({2, 2, 2}, {1, 1, 1})]);
    EXPECT_FALSE(predicate_truth(sys, kc, 0, 3)[run({2, 2, 0}, {1, 1, 1})]);
    // C1 asked for slot 2 and saw reservations (1,0,0).
    RunId r = run({2, 1, 2}, {0, 0, 0});
    EXPECT_EQ(witness_table(sys, r).rr[0], 1);
    EXPECT_EQ(witness_table(sys, r).rr[1], 0);
    EXPECT_EQ(witness_table(sys, r).rr[2], 0);
    auto cf3 = parse_predicate(lib.at("cf3").expr, p, 1, lib);
    EXPECT_TRUE(predicate_truth(sys, cf3, 0, 3)[r]);
    EXPECT_TRUE(eval_at(sys, conflict_free_knowledge(sys.signature(), p, 0, 1), {r, 3}));
}

TEST_F(CaseStudy, RenderedTable) {
    auto text = render_table(witness_table(sys, run({2, 0, 0}, {1, 1, 1})), p.slots);
    EXPECT_EQ(text,
              "| s        | 1 | 2 | 3 || 4 | 5 | 6 |\n"
              "| Agent C1 | 0 | 1 | 0 || 0 | 1 | 0 |\n"
              "| Agent C2 | 0 | 0 | 0 || 0 | 0 | 0 |\n"
              "| Agent C3 | 0 | 0 | 0 || 0 | 0 | 0 |\n"
              "| rr[s]    | 0 | 1 | 0 || 0 | 1 | 0 |\n"
              "slot_request = [2,0,0], msg = [1,1,1]\n");
}

TEST_F(CaseStudy, SpecificationVerdicts) {
    EXPECT_TRUE(check_spec(sys, p, SpecId::s1s).holds);
    EXPECT_FALSE(check_spec(sys, p, SpecId::s1c).holds);
    EXPECT_FALSE(check_spec(sys, p, SpecId::s2).holds);
    EXPECT_FALSE(check_spec(sys, p, SpecId::s3).holds);
    EXPECT_TRUE(check_spec(sys, p, SpecId::s4a).holds);
    EXPECT_TRUE(check_spec(sys, p, SpecId::s4b).holds);
    EXPECT_TRUE(check_spec(sys, p, SpecId::s5).holds);
    EXPECT_TRUE(check_spec(sys, p, SpecId::s6).holds);
}

TEST_F(CaseStudy, SpecSelectionAndErrors) {
    auto one = check_spec(sys, p, SpecId::s2, AgentId{1}, std::size_t{3});
    EXPECT_EQ(one.instances, 1u);
    EXPECT_EQ(check_spec(sys, p, SpecId::s6).instances, 3u);
    EXPECT_THROW(check_spec(sys, p, SpecId::s6, std::nullopt, std::size_t{1}), UsageError);
    EXPECT_THROW(spec(sys.signature(), p, SpecId::s2, 0, 0), UsageError);
    EXPECT_THROW(spec(sys.signature(), p, SpecId::s5, 0, 2), UsageError);
    EXPECT_THROW(parse_spec_id("7"), UsageError);
    for (auto id : all_specs()) EXPECT_EQ(parse_spec_id(to_string(id)), id);
}

TEST_F(CaseStudy, MacrosInFormulas) {
    const auto& sig = sys.signature();
    auto f = parse("conflict(2)", sig, p);
    EXPECT_TRUE(structurally_equal(f, conflict(sig, p, 2)));
    EXPECT_TRUE(eval_at(sys, f, {run({2, 2, 0}, {0, 0, 0}), 0}));
    EXPECT_FALSE(eval_at(sys, f, {run({2, 1, 0}, {0, 0, 0}), 0}));
    auto g = parse("sender(C1, 1, 3)", sig, p);
    EXPECT_TRUE(eval_at(sys, g, {run({0, 3, 1}, {0, 1, 0}), 0}));
    EXPECT_FALSE(eval_at(sys, g, {run({0, 3, 3}, {0, 0, 0}), 0}));
    EXPECT_THROW(parse("conflict(9)", sig, p), ParseError);
    EXPECT_THROW(parse("sender(C1, 2, 1)", sig, p), ParseError);
    EXPECT_THROW(parse("sender(C1, 1)", sig, p), ParseError);
    EXPECT_TRUE(structurally_equal(parse("RR[4]", sig, p), parse("C1.rr[4]", sig, p)));
}

TEST_F(CaseStudy, KeysAreNotInTheReducedModel) {
    try {
        parse("k12 == 1", sys.signature(), p);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("--engine naive"), std::string::npos);
    }
}

TEST_F(CaseStudy, KnowledgeBasedProgramMatchesImplementation) {
    auto kbp = execute_kbp(build_cdc_kbp(p), unknown_scenario(p));
    ASSERT_EQ(kbp.run_count(), sys.run_count());
    for (RunId r = 0; r < sys.run_count(); ++r) ASSERT_EQ(contribution_matrix(kbp, r), contribution_matrix(sys, r));
    for (auto id : {SpecId::s1s, SpecId::s4a, SpecId::s4b, SpecId::s5}) EXPECT_TRUE(check_spec(kbp, p, id).holds);
}

TEST(Conservative, SynthesizedTransmitConditionSatisfiesItsSpec) {
    DcParams p{3, Mode::conservative};
    auto kc = synthesize_kc(p, unknown_scenario(p), default_predicates(p));
    ASSERT_EQ(kc.per_slot.size(), 3u);
    auto preds = default_predicates(p);
    preds.kc = kc.kc;
    auto sys = generate_runs(build_cdc(p, preds), unknown_scenario(p));
    EXPECT_TRUE(check_spec(sys, p, SpecId::s1c).holds);
    auto kbp = execute_kbp(build_cdc_kbp(p), unknown_scenario(p));
    for (RunId r = 0; r < sys.run_count(); ++r) ASSERT_EQ(contribution_matrix(kbp, r), contribution_matrix(sys, r));
}

TEST(Conservative, ResynthesisIsAFixpoint) {
    DcParams p{3, Mode::conservative};
    auto first = synthesize_kc(p, referendum_scenario(p), default_predicates(p));
    auto preds = default_predicates(p);
    preds.kc = first.kc;
    auto sys = generate_runs(build_cdc(p, preds), referendum_scenario(p));
    for (std::size_t s = 1; s <= p.slots; ++s)
        for (AgentId i = 0; i < kAgents; ++i) {
            auto again = synthesize(sys, p, transmit_condition(sys.signature(), p, i, s), i, p.pre_transmission_time(s));
            EXPECT_EQ(again.views, first.per_slot[s - 1][i].views);
        }
}

TEST_F(CaseStudy, DerivedRoundResultsFromHistory) {
    RunId r = run({2, 2, 2}, {1, 1, 1});
    auto h = observation_of(sys, {r, 6}, 0);
    EXPECT_EQ(derived_round_results(h, sys.signature()), (std::vector<Value>{0, 1, 0, 0, 1, 0}));
}

TEST_F(CaseStudy, VerdictJsonSchema) {
    auto rep = check_spec(sys, p, SpecId::s2);
    auto j = verdict_json(sys, "spec", "2", rep.holds, rep.counterexample);
    EXPECT_EQ(j["spec"], "2");
    EXPECT_EQ(j["verdict"], "Fails");
    ASSERT_EQ(j["witnesses"].size(), 2u);
    for (const auto& w : j["witnesses"]) {
        EXPECT_EQ(w["slot_request"].size(), 3u);
        EXPECT_EQ(w["msg"].size(), 3u);
        EXPECT_EQ(w["contrib"].size(), 3u);
        EXPECT_EQ(w["contrib"][0].size(), 6u);
        EXPECT_EQ(w["rr"].size(), 6u);
    }
    auto again = json::parse(j.dump());
    EXPECT_EQ(again, j);
    auto ok = verdict_json(sys, "spec", "1s", true, std::nullopt);
    EXPECT_EQ(ok["verdict"], "Holds");
    EXPECT_TRUE(ok["witnesses"].empty());
}

}  // namespace
}  // namespace epi::dc
