#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "epistemic/qm.hpp"

namespace epi {
namespace {

bool eval(const QmResult& r, std::uint32_t x) {
    for (const auto& c : r.cubes)
        if (c.covers(x)) return true;
    return false;
}

TEST(Qm, ConstantFunctions) {
    EXPECT_TRUE(minimize(3, {}, {}).cubes.empty());
    auto all = minimize(2, {0, 1, 2, 3}, {});
    ASSERT_EQ(all.cubes.size(), 1u);
    EXPECT_EQ(all.cubes[0].mask, 0u);
}

TEST(Qm, AdjacentMintermsMerge) {
    // b1 b0: 10 | 11 = b1
    auto r = minimize(2, {2, 3}, {});
    ASSERT_EQ(r.cubes.size(), 1u);
    EXPECT_EQ(r.cubes[0], (Cube{2, 2}));
}

TEST(Qm, ParityDoesNotMerge) {
    auto r = minimize(3, {1, 2, 4, 7}, {});
    EXPECT_EQ(r.cubes.size(), 4u);
    for (const auto& c : r.cubes) EXPECT_EQ(c.literals(), 3);
}

TEST(Qm, DontCaresEnlargeCubes) {
    auto r = minimize(3, {1, 3}, {5, 7});
    ASSERT_EQ(r.cubes.size(), 1u);
    EXPECT_EQ(r.cubes[0], (Cube{1, 1}));
}

TEST(Qm, CyclicCoverIsMinimal) {
    // The classic cyclic core: six minterms, six primes, minimum three.
    auto r = minimize(3, {0, 1, 2, 5, 6, 7}, {});
    EXPECT_TRUE(r.exact_cover);
    EXPECT_EQ(r.cubes.size(), 3u);
}

TEST(Qm, RejectsWideInputs) { EXPECT_THROW(minimize(17, {1}, {}), UsageError); }

// Smallest cover by brute force over subsets of all cubes.
std::size_t brute_force_min(unsigned bits, const std::vector<std::uint32_t>& on, const std::vector<bool>& allowed) {
    std::vector<Cube> cubes;
    const std::uint32_t full = (1u << bits) - 1;
    for (std::uint32_t mask = 0; mask <= full; ++mask)
        for (std::uint32_t value = 0; value <= full; ++value) {
            if (value & ~mask) continue;
            Cube c{value, mask};
            bool ok = true;
            for (std::uint32_t x = 0; x <= full && ok; ++x) ok = !c.covers(x) || allowed[x];
            if (ok) cubes.push_back(c);
        }
    for (std::size_t k = 0; k <= on.size(); ++k) {
        std::vector<std::size_t> idx(k);
        std::function<bool(std::size_t, std::size_t)> pick = [&](std::size_t depth, std::size_t from) {
            if (depth == k) {
                for (auto m : on) {
                    bool hit = false;
                    for (auto i : idx) hit |= cubes[i].covers(m);
                    if (!hit) return false;
                }
                return true;
            }
            for (std::size_t i = from; i < cubes.size(); ++i) {
                idx[depth] = i;
                if (pick(depth + 1, i + 1)) return true;
            }
            return false;
        };
        if (pick(0, 0)) return k;
    }
    return on.size();
}

TEST(Qm, RandomFunctionsAreExactAndMinimal) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const unsigned bits = 2 + trial % 3;
        const std::uint32_t n = 1u << bits;
        std::vector<std::uint32_t> on, dc;
        std::vector<bool> allowed(n, false);
        for (std::uint32_t x = 0; x < n; ++x) {
            int roll = static_cast<int>(rng() % 4);
            if (roll == 0) dc.push_back(x);
            if (roll >= 2) on.push_back(x);
            allowed[x] = roll != 1;
        }
        auto r = minimize(bits, on, dc);
        ASSERT_TRUE(r.exact_cover);
        for (std::uint32_t x = 0; x < n; ++x) {
            bool is_on = std::find(on.begin(), on.end(), x) != on.end();
            if (is_on) { EXPECT_TRUE(eval(r, x)) << trial; }
            if (!allowed[x]) { EXPECT_FALSE(eval(r, x)) << trial; }
        }
        EXPECT_EQ(r.cubes.size(), brute_force_min(bits, on, allowed)) << trial;
    }
}

TEST(Qm, SixteenBitFunction) {
    std::mt19937 rng(9);
    std::vector<std::uint32_t> on;
    for (int k = 0; k < 300; ++k) on.push_back(rng() & 0xffff);
    auto r = minimize(16, on, {});
    for (auto m : on) EXPECT_TRUE(eval(r, m));
    std::set<std::uint32_t> onset(on.begin(), on.end());
    for (std::uint32_t x = 0; x < (1u << 16); x += 97)
        if (!onset.contains(x)) { EXPECT_FALSE(eval(r, x)); }
}

}  // namespace
}  // namespace epi
