#include <gtest/gtest.h>

#include "epistemic/dc/specs.hpp"
#include "epistemic/refine.hpp"
#include "property_checks.hpp"

namespace epi::dc {
namespace {

class Properties : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        sys = new InterpretedSystem(generate_runs(build_cdc(p, default_predicates(p)), unknown_scenario(p)));
    }
    static void TearDownTestSuite() {
        delete sys;
        sys = nullptr;
    }

    static inline DcParams p;
    static inline InterpretedSystem* sys = nullptr;
};

TEST_F(Properties, KnowledgeIsTruthfulAndIntrospective) {
    auto res = test::s5_samples(*sys, p, 11, 1000);
    EXPECT_EQ(res.checked, 1000u);
    EXPECT_EQ(res.violations, 0u) << res.first;
}

TEST_F(Properties, PartitionsRefineOverTime) {
    auto res = test::partition_refinement(*sys);
    EXPECT_GT(res.checked, 0u);
    EXPECT_EQ(res.violations, 0u) << res.first;
}

TEST_F(Properties, UnansweredRequestIsKnownConflictForever) {
    const auto& sig = sys->signature();
    for (AgentId i = 0; i < kAgents; ++i)
        for (std::size_t s = 1; s <= p.slots; ++s) {
            auto failed = f_and(f_atom(local_var(sig, i, "slot_request"), Cmp::Eq, static_cast<Value>(s)),
                                f_atom(local_var(sig, i, indexed("rr", s)), Cmp::Eq, 0));
            auto known = f_know(i, conflict(sig, p, s));
            for (std::size_t t = s; t <= p.horizon(); ++t)
                EXPECT_TRUE(check_valid_at(*sys, f_implies(failed, known), t).holds) << i << " " << s << " " << t;
        }
}

TEST_F(Properties, LoneRequesterBroadcastsItsBit) {
    const auto& sig = sys->signature();
    for (RunId r = 0; r < sys->run_count(); ++r)
        for (std::size_t s = 1; s <= p.slots; ++s) {
            std::vector<AgentId> req;
            for (AgentId j = 0; j < kAgents; ++j)
                if (sys->value(r, 0, local_var(sig, j, "slot_request")) == static_cast<Value>(s)) req.push_back(j);
            if (req.size() != 1) continue;
            auto tx = p.transmission_time(s);
            ASSERT_EQ(sys->value(r, tx, local_var(sig, 0, indexed("rr", tx))),
                      sys->value(r, 0, local_var(sig, req[0], "msg")));
        }
}

TEST_F(Properties, ConflictFreeChainIsMonotone) {
    auto lib = builtin_library(p);
    for (std::size_t s = 1; s <= p.slots; ++s) {
        auto c1 = parse_predicate(lib.at("cf1").expr, p, s, lib);
        auto c2 = parse_predicate(lib.at("cf2").expr, p, s, lib);
        auto c3 = parse_predicate(lib.at("cf3").expr, p, s, lib);
        for (AgentId i = 0; i < kAgents; ++i) {
            auto t1 = predicate_truth(*sys, c1, i, p.end_time());
            auto t2 = predicate_truth(*sys, c2, i, p.end_time());
            auto t3 = predicate_truth(*sys, c3, i, p.end_time());
            for (RunId r = 0; r < sys->run_count(); ++r) {
                ASSERT_LE(t1[r], t2[r]);
                ASSERT_LE(t2[r], t3[r]);
            }
        }
    }
}

TEST(KeyCancellation, NaiveAnnouncementsXorToTheRoundResult) {
    DcParams p{2};
    auto sys = generate_runs(build_cdc(p, default_predicates(p)), unknown_scenario(p), EngineMode::naive);
    ASSERT_EQ(sys.run_count(), 884736u);
    auto res = test::key_cancellation(sys);
    EXPECT_EQ(res.checked, 884736u * p.horizon());
    EXPECT_EQ(res.violations, 0u) << res.first;
}

TEST(KeyCancellation, ReducedEngineHasNoKeys) {
    DcParams p{2};
    auto sys = generate_runs(build_cdc(p, default_predicates(p)), unknown_scenario(p));
    EXPECT_THROW(test::key_cancellation(sys), UsageError);
}

}  // namespace
}  // namespace epi::dc
