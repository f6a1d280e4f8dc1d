#pragma once

// Two-level minimization (Quine-McCluskey) of incompletely specified boolean
// functions of at most 16 inputs.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "errors.hpp"

namespace epi {

// Bits set in `mask` are fixed to the corresponding bit of `value`.
struct Cube {
    std::uint32_t value = 0;
    std::uint32_t mask = 0;

    bool covers(std::uint32_t m) const { return (m & mask) == value; }
    int literals() const { return std::popcount(mask); }
    auto operator<=>(const Cube&) const = default;
};

struct QmResult {
    std::vector<Cube> cubes;  // empty: constant false; one cube with mask 0: constant true
    bool exact_cover = true;  // false if the cover search fell back to greedy
};

namespace detail {

inline std::vector<Cube> prime_implicants(unsigned bits, const std::vector<std::uint32_t>& terms) {
    const std::uint32_t full = bits == 32 ? ~0u : ((1u << bits) - 1);
    std::set<Cube> current;
    for (auto t : terms) current.insert({t, full});
    std::vector<Cube> primes;
    while (!current.empty()) {
        std::set<Cube> next;
        std::set<Cube> merged;
        std::vector<Cube> list(current.begin(), current.end());
        // Bucket by mask so only compatible cubes are compared.
        std::sort(list.begin(), list.end(), [](const Cube& a, const Cube& b) {
            return a.mask != b.mask ? a.mask < b.mask : a.value < b.value;
        });
        std::size_t lo = 0;
        while (lo < list.size()) {
            std::size_t hi = lo;
            while (hi < list.size() && list[hi].mask == list[lo].mask) ++hi;
            std::set<std::uint32_t> values;
            for (std::size_t k = lo; k < hi; ++k) values.insert(list[k].value);
            for (std::size_t k = lo; k < hi; ++k) {
                const Cube& c = list[k];
                for (std::uint32_t b = 1; b & full; b <<= 1) {
                    if (!(c.mask & b) || (c.value & b)) continue;
                    if (!values.contains(c.value | b)) continue;
                    next.insert({c.value & ~b, c.mask & ~b});
                    merged.insert(c);
                    merged.insert({c.value | b, c.mask});
                }
            }
            lo = hi;
        }
        for (const auto& c : current)
            if (!merged.contains(c)) primes.push_back(c);
        current = std::move(next);
    }
    return primes;
}

struct CoverSearch {
    const std::vector<Cube>& primes;
    const std::vector<std::vector<std::size_t>>& covering;  // per on-minterm: primes covering it
    std::vector<std::size_t> best;
    std::size_t best_cost = SIZE_MAX;
    std::size_t nodes = 0;
    std::size_t budget = 200000;
    const std::vector<std::uint32_t>* minterms = nullptr;

    std::size_t cost(const std::vector<std::size_t>& sel) const {
        std::size_t lits = 0;
        for (auto k : sel) lits += static_cast<std::size_t>(primes[k].literals());
        return sel.size() * 1024 + lits;
    }

    void run(std::vector<std::size_t>& sel, std::vector<int>& covered_count) {
        if (++nodes > budget) return;
        if (cost(sel) >= best_cost) return;
        std::size_t pick = SIZE_MAX, fewest = SIZE_MAX;
        for (std::size_t m = 0; m < covering.size(); ++m) {
            if (covered_count[m] > 0) continue;
            if (covering[m].size() < fewest) {
                fewest = covering[m].size();
                pick = m;
            }
        }
        if (pick == SIZE_MAX) {
            best = sel;
            best_cost = cost(sel);
            return;
        }
        for (auto k : covering[pick]) {
            sel.push_back(k);
            adjust(k, covered_count, +1);
            run(sel, covered_count);
            adjust(k, covered_count, -1);
            sel.pop_back();
        }
    }

    void adjust(std::size_t k, std::vector<int>& covered_count, int delta) const {
        for (std::size_t m = 0; m < covering.size(); ++m)
            if (primes[k].covers((*minterms)[m])) covered_count[m] += delta;
    }
};

}  // namespace detail

// Minimal sum of products covering `on` and avoiding every input outside
// on ∪ dont_care. Minimality (cube count, then literal count) is guaranteed
// when exact_cover is true.
inline QmResult minimize(unsigned bits, std::vector<std::uint32_t> on, std::vector<std::uint32_t> dont_care) {
    if (bits > 16) throw UsageError("minimization supports at most 16 inputs");
    std::sort(on.begin(), on.end());
    on.erase(std::unique(on.begin(), on.end()), on.end());
    QmResult out;
    if (on.empty()) return out;
    std::vector<std::uint32_t> all = on;
    all.insert(all.end(), dont_care.begin(), dont_care.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    auto primes = detail::prime_implicants(bits, all);
    // Drop primes covering only don't-cares.
    std::erase_if(primes, [&](const Cube& c) {
        return std::none_of(on.begin(), on.end(), [&](std::uint32_t m) { return c.covers(m); });
    });
    std::sort(primes.begin(), primes.end());

    std::vector<std::vector<std::size_t>> covering(on.size());
    for (std::size_t m = 0; m < on.size(); ++m)
        for (std::size_t k = 0; k < primes.size(); ++k)
            if (primes[k].covers(on[m])) covering[m].push_back(k);

    detail::CoverSearch search{primes, covering, {}, SIZE_MAX, 0, 200000, &on};
    std::vector<std::size_t> sel;
    std::vector<int> count(on.size(), 0);
    search.run(sel, count);
    if (search.nodes > search.budget || search.best_cost == SIZE_MAX) {
        // Greedy: repeatedly take the prime covering most uncovered minterms.
        out.exact_cover = false;
        std::vector<bool> done(on.size(), false);
        std::vector<std::size_t> greedy;
        for (;;) {
            std::size_t best = SIZE_MAX, gain = 0;
            for (std::size_t k = 0; k < primes.size(); ++k) {
                std::size_t g = 0;
                for (std::size_t m = 0; m < on.size(); ++m) g += !done[m] && primes[k].covers(on[m]);
                if (g > gain) {
                    gain = g;
                    best = k;
                }
            }
            if (best == SIZE_MAX) break;
            greedy.push_back(best);
            for (std::size_t m = 0; m < on.size(); ++m)
                if (primes[best].covers(on[m])) done[m] = true;
        }
        if (search.best_cost == SIZE_MAX || search.cost(greedy) < search.best_cost) search.best = greedy;
    }
    for (auto k : search.best) out.cubes.push_back(primes[k]);
    std::sort(out.cubes.begin(), out.cubes.end(), [](const Cube& a, const Cube& b) {
        return a.literals() != b.literals() ? a.literals() < b.literals() : a < b;
    });
    return out;
}

}  // namespace epi
