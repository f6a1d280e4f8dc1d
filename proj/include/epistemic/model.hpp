#pragma once

// Semantic substrate: variables, global states, bounded synchronous runs,
// perfect-recall observations and per-agent indistinguishability partitions.
//
// An InterpretedSystem stores every run as a sequence of interned global
// states, one layer per time step. Two points at the same time are
// indistinguishable to an agent iff the agent's observable variables had the
// same values at every earlier time of both runs. Partitions are built
// incrementally: the block of a run at time t is the pair (block at t-1,
// observation at t), interned exactly, so no hash collision can merge blocks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace epi {

using Value = std::int32_t;
using VarId = std::uint32_t;
using AgentId = std::uint32_t;
using RunId = std::uint32_t;
using StateId = std::uint32_t;

struct Domain {
    Value lo = 0;
    Value hi = 1;

    static Domain boolean() { return {0, 1}; }
    static Domain range(Value lo, Value hi) {
        if (hi < lo) throw UsageError("empty domain");
        return {lo, hi};
    }

    bool contains(Value v) const { return lo <= v && v <= hi; }
    std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
    bool is_boolean() const { return lo == 0 && hi == 1; }
};

struct VariableDecl {
    std::string name;  // qualified: "C1.rr[3]" for agent locals, "k12" for the environment
    Domain domain;
    std::optional<AgentId> owner;  // nullopt: environment
    std::vector<AgentId> observable_by;
    // History variables without an initial value are unassigned before this time.
    std::optional<std::size_t> assigned_at;
};

class Signature {
public:
    AgentId add_agent(std::string name) {
        if (find_agent(name)) throw UsageError("duplicate agent " + name);
        agents_.push_back(std::move(name));
        observables_.emplace_back();
        return static_cast<AgentId>(agents_.size() - 1);
    }

    VarId add_variable(VariableDecl decl) {
        if (decl.domain.hi < decl.domain.lo) throw UsageError("empty domain for " + decl.name);
        if (by_name_.contains(decl.name) || aliases_.contains(decl.name))
            throw UsageError("duplicate variable " + decl.name);
        if (decl.owner && *decl.owner >= agents_.size())
            throw UsageError("variable " + decl.name + " owned by undeclared agent");
        std::sort(decl.observable_by.begin(), decl.observable_by.end());
        decl.observable_by.erase(std::unique(decl.observable_by.begin(), decl.observable_by.end()),
                                 decl.observable_by.end());
        auto id = static_cast<VarId>(vars_.size());
        for (AgentId a : decl.observable_by) {
            if (a >= agents_.size())
                throw UsageError("variable " + decl.name + " observable by undeclared agent");
            observables_[a].push_back(id);
        }
        by_name_.emplace(decl.name, id);
        vars_.push_back(std::move(decl));
        return id;
    }

    // Alternative spelling for an existing variable, e.g. "RR[2]" for "C1.rr[2]".
    void add_alias(std::string alias, std::string_view target) {
        aliases_[std::move(alias)] = variable(target);
    }

    // Names that exist in the full model but were quotiented out of this one.
    void add_eliminated(std::string name, std::string hint) {
        eliminated_[std::move(name)] = std::move(hint);
    }

    std::size_t agent_count() const { return agents_.size(); }
    std::size_t variable_count() const { return vars_.size(); }
    const std::string& agent_name(AgentId a) const { return agents_.at(a); }
    const VariableDecl& decl(VarId v) const { return vars_.at(v); }
    std::span<const VarId> observables(AgentId a) const { return observables_.at(a); }

    std::optional<AgentId> find_agent(std::string_view name) const {
        for (std::size_t i = 0; i < agents_.size(); ++i)
            if (agents_[i] == name) return static_cast<AgentId>(i);
        return std::nullopt;
    }

    std::optional<VarId> find_variable(std::string_view name) const {
        if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
        if (auto it = aliases_.find(std::string(name)); it != aliases_.end()) return it->second;
        return std::nullopt;
    }

    std::optional<VarId> find_local(AgentId a, std::string_view local) const {
        return find_variable(agent_name(a) + "." + std::string(local));
    }

    // Eliminated names carry an instruction rather than a plain "unknown".
    const std::string* elimination_hint(std::string_view name) const {
        auto it = eliminated_.find(std::string(name));
        return it == eliminated_.end() ? nullptr : &it->second;
    }

    AgentId agent(std::string_view name) const {
        if (auto a = find_agent(name)) return *a;
        throw UsageError("unknown agent " + std::string(name));
    }

    VarId variable(std::string_view name) const {
        if (auto v = find_variable(name)) return *v;
        if (auto hint = elimination_hint(name))
            throw UsageError("variable " + std::string(name) + " is not available: " + *hint);
        throw UsageError("unknown variable " + std::string(name));
    }

private:
    std::vector<std::string> agents_;
    std::vector<VariableDecl> vars_;
    std::vector<std::vector<VarId>> observables_;
    std::map<std::string, VarId, std::less<>> by_name_;
    std::map<std::string, VarId, std::less<>> aliases_;
    std::map<std::string, std::string, std::less<>> eliminated_;
};

struct GlobalState {
    std::vector<Value> valuation;  // indexed by VarId
    std::size_t time = 0;

    bool operator==(const GlobalState&) const = default;
};

struct Point {
    RunId run = 0;
    std::size_t time = 0;

    auto operator<=>(const Point&) const = default;
};

struct Run {
    std::vector<GlobalState> states;  // states[t].time == t

    const std::vector<Value>& initial() const { return states.front().valuation; }
};

struct ObservationHistory {
    AgentId agent = 0;
    // records[u]: (variable, value) for each variable observable by the agent, at time u
    std::vector<std::vector<std::pair<VarId, Value>>> records;

    bool operator==(const ObservationHistory&) const = default;
};

// Points at one time grouped by equal observation history. Blocks are numbered
// in order of first appearance along the canonical run order.
struct IndistPartition {
    AgentId agent = 0;
    std::size_t time = 0;
    std::vector<std::uint32_t> block_of;  // per run
    std::vector<std::uint32_t> offsets;   // block b = members[offsets[b], offsets[b+1])
    std::vector<RunId> members;

    std::size_t block_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::span<const RunId> block(std::size_t b) const {
        return std::span<const RunId>(members).subspan(offsets[b], offsets[b + 1] - offsets[b]);
    }
};

namespace detail {

struct ValueVectorHash {
    std::size_t operator()(const std::vector<Value>& v) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (Value x : v) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct PairHash {
    std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p) const noexcept {
        return std::hash<std::uint64_t>{}((std::uint64_t{p.first} << 32) | p.second);
    }
};

}  // namespace detail

class InterpretedSystem {
public:
    InterpretedSystem(std::shared_ptr<const Signature> signature, std::size_t horizon,
                      std::size_t run_count)
        : sig_(std::move(signature)), horizon_(horizon), runs_(run_count) {
        if (run_count > std::numeric_limits<RunId>::max()) throw UsageError("too many runs");
    }

    InterpretedSystem(InterpretedSystem&& other) noexcept
        : sig_(std::move(other.sig_)), horizon_(other.horizon_), runs_(other.runs_),
          pool_(std::move(other.pool_)), pool_index_(std::move(other.pool_index_)),
          layers_(std::move(other.layers_)), origin_(std::move(other.origin_)),
          keys_(std::move(other.keys_)), partitions_(std::move(other.partitions_)),
          obs_index_(std::move(other.obs_index_)), obs_of_state_(std::move(other.obs_of_state_)) {}

    const Signature& signature() const { return *sig_; }
    std::shared_ptr<const Signature> shared_signature() const { return sig_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t run_count() const { return runs_; }
    // Number of materialized time layers; equals horizon()+1 once fully built.
    std::size_t layers() const { return layers_.size(); }

    StateId state_id(RunId r, std::size_t t) const { return layers_[t][r]; }
    std::span<const Value> state(StateId s) const { return *pool_[s]; }
    Value value(RunId r, std::size_t t, VarId v) const { return (*pool_[layers_[t][r]])[v]; }

    GlobalState global_state(RunId r, std::size_t t) const {
        check_point({r, t});
        return {*pool_[layers_[t][r]], t};
    }

    Run run(RunId r) const {
        Run out;
        for (std::size_t t = 0; t < layers(); ++t) out.states.push_back(global_state(r, t));
        return out;
    }

    // Index of the run's initial assignment in the scenario's canonical order.
    std::size_t initial_index(RunId r) const { return origin_.empty() ? r : origin_[r]; }
    // Key schedule bits of the run (naive engine); zero for key-free systems.
    std::uint64_t key_schedule(RunId r) const { return keys_.empty() ? 0 : keys_[r]; }

    void check_point(Point p) const {
        if (p.run >= runs_) throw UsageError("run index out of range");
        if (p.time >= layers()) throw UsageError("time " + std::to_string(p.time) + " beyond horizon");
    }

    void check_agent(AgentId a) const {
        if (a >= sig_->agent_count()) throw UsageError("unknown agent");
    }

    // Memoized per (agent, time); safe to call concurrently.
    const IndistPartition& partition(AgentId agent, std::size_t time) const {
        check_agent(agent);
        if (time >= layers()) throw UsageError("time " + std::to_string(time) + " beyond horizon");
        std::lock_guard lock(mutex_);
        return partition_locked(agent, time);
    }

    // ---- construction, used by the protocol engine ----

    StateId intern(std::vector<Value> valuation) {
        if (valuation.size() != sig_->variable_count())
            throw ModelError("valuation is not total over declared variables");
        auto [it, inserted] = pool_index_.try_emplace(std::move(valuation), 0);
        if (inserted) {
            it->second = static_cast<StateId>(pool_.size());
            pool_.push_back(&it->first);
        }
        return it->second;
    }

    void push_layer(std::vector<StateId> layer) {
        if (layer.size() != runs_) throw ModelError("layer size differs from run count");
        if (layers() > horizon_) throw ModelError("layer beyond horizon");
        layers_.push_back(std::move(layer));
    }

    void replace_last_layer(std::vector<StateId> layer) {
        if (layers_.empty() || layer.size() != runs_) throw ModelError("bad layer replacement");
        std::lock_guard lock(mutex_);
        std::size_t t = layers_.size() - 1;
        for (auto it = partitions_.begin(); it != partitions_.end();)
            it = it->first.second == t ? partitions_.erase(it) : std::next(it);
        layers_.back() = std::move(layer);
    }

    void set_origin(std::vector<std::uint32_t> initial_index, std::vector<std::uint64_t> keys) {
        origin_ = std::move(initial_index);
        keys_ = std::move(keys);
    }

private:
    std::uint32_t observation_id(AgentId agent, StateId s) const {
        auto& cache = obs_of_state_[agent];
        if (cache.size() <= s) cache.resize(pool_.size(), kNone);
        if (cache[s] != kNone) return cache[s];
        std::vector<Value> restricted;
        for (VarId v : sig_->observables(agent)) restricted.push_back((*pool_[s])[v]);
        auto& index = obs_index_[agent];
        auto [it, inserted] = index.try_emplace(std::move(restricted),
                                                static_cast<std::uint32_t>(index.size()));
        return cache[s] = it->second;
    }

    const IndistPartition& partition_locked(AgentId agent, std::size_t time) const {
        auto key = std::make_pair(agent, time);
        if (auto it = partitions_.find(key); it != partitions_.end()) return *it->second;
        if (obs_of_state_.size() < sig_->agent_count()) {
            obs_of_state_.resize(sig_->agent_count());
            obs_index_.resize(sig_->agent_count());
        }

        const IndistPartition* prev = time == 0 ? nullptr : &partition_locked(agent, time - 1);
        auto part = std::make_unique<IndistPartition>();
        part->agent = agent;
        part->time = time;
        part->block_of.resize(runs_);

        std::unordered_map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t, detail::PairHash>
            blocks;
        std::vector<std::uint32_t> sizes;
        for (RunId r = 0; r < runs_; ++r) {
            std::uint32_t before = prev ? prev->block_of[r] : 0;
            std::uint32_t obs = observation_id(agent, layers_[time][r]);
            auto [it, inserted] =
                blocks.try_emplace({before, obs}, static_cast<std::uint32_t>(sizes.size()));
            if (inserted) sizes.push_back(0);
            part->block_of[r] = it->second;
            ++sizes[it->second];
        }
        part->offsets.assign(sizes.size() + 1, 0);
        for (std::size_t b = 0; b < sizes.size(); ++b) part->offsets[b + 1] = part->offsets[b] + sizes[b];
        part->members.resize(runs_);
        std::vector<std::uint32_t> fill(part->offsets.begin(), part->offsets.end() - 1);
        for (RunId r = 0; r < runs_; ++r) part->members[fill[part->block_of[r]]++] = r;

        auto& slot = partitions_[key];
        slot = std::move(part);
        return *slot;
    }

    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    std::shared_ptr<const Signature> sig_;
    std::size_t horizon_;
    std::size_t runs_;
    std::vector<const std::vector<Value>*> pool_;
    std::unordered_map<std::vector<Value>, StateId, detail::ValueVectorHash> pool_index_;
    std::vector<std::vector<StateId>> layers_;
    std::vector<std::uint32_t> origin_;
    std::vector<std::uint64_t> keys_;

    mutable std::mutex mutex_;
    mutable std::map<std::pair<AgentId, std::size_t>, std::unique_ptr<IndistPartition>> partitions_;
    mutable std::vector<std::unordered_map<std::vector<Value>, std::uint32_t, detail::ValueVectorHash>>
        obs_index_;
    mutable std::vector<std::vector<std::uint32_t>> obs_of_state_;
};

// The agent's perfect-recall local state at the point: its observable
// variables at every time up to and including point.time.
inline ObservationHistory observation_of(const InterpretedSystem& system, Point point, AgentId agent) {
    system.check_agent(agent);
    system.check_point(point);
    ObservationHistory h;
    h.agent = agent;
    auto obs = system.signature().observables(agent);
    for (std::size_t u = 0; u <= point.time; ++u) {
        auto& rec = h.records.emplace_back();
        for (VarId v : obs) rec.emplace_back(v, system.value(point.run, u, v));
    }
    return h;
}

inline std::vector<Point> points_at(const InterpretedSystem& system, std::size_t time) {
    if (time > system.horizon() || time >= system.layers())
        throw UsageError("time " + std::to_string(time) + " beyond horizon");
    std::vector<Point> out;
    out.reserve(system.run_count());
    for (RunId r = 0; r < system.run_count(); ++r) out.push_back({r, time});
    return out;
}

inline const IndistPartition& build_partition(const InterpretedSystem& system, AgentId agent,
                                              std::size_t time) {
    return system.partition(agent, time);
}

}  // namespace epi
