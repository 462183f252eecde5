#ifndef LPR_POLICIES_HPP
#define LPR_POLICIES_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "lpr/dist.hpp"
#include "lpr/segments.hpp"

namespace lpr {

enum class PolicyKind { Lru, Mru, Fifo, Kl, Lpr };

struct PolicySpec {
    PolicyKind kind = PolicyKind::Lru;
    // KL parameters (kind == Kl only).
    std::size_t K = 0;
    std::size_t L = 0;
    // Priorities (kind == Lpr only); not owned.
    const Segmentation* seg = nullptr;

    static PolicySpec lru() { return {PolicyKind::Lru, 0, 0, nullptr}; }
    static PolicySpec mru() { return {PolicyKind::Mru, 0, 0, nullptr}; }
    static PolicySpec fifo() { return {PolicyKind::Fifo, 0, 0, nullptr}; }
    static PolicySpec kl(std::size_t K, std::size_t L) {
        return {PolicyKind::Kl, K, L, nullptr};
    }
    static PolicySpec lpr(const Segmentation& seg) {
        return {PolicyKind::Lpr, 0, 0, &seg};
    }
};

struct EvictionEvent {
    std::size_t step;
    ItemId evicted;
    std::size_t depth;  // depth in the rotated stack at eviction time
};

struct SimResult {
    std::uint64_t accesses = 0;
    std::uint64_t misses = 0;
    std::vector<EvictionEvent> evictions;  // filled only when requested
    double miss_rate() const {
        return accesses ? static_cast<double>(misses) / accesses : 0.0;
    }
};

/*
 * Step-by-step buffer simulation under one (policy, capacity) pair.
 *
 * The buffer starts empty (cold misses are counted) unless prefill
 * is requested, in which case the top min(C, |stack|) items of the
 * initial stack start resident.  When constructed without an
 * initial stack, the LRU stack grows lazily as items are first seen.
 * Evictions happen only on a miss with a full buffer and are decided
 * on the stack as it stands immediately after the access rotation.
 */
class BufferSimulator {
public:
    BufferSimulator(PolicySpec policy, std::size_t capacity,
                    LruStack initial_stack = LruStack(), bool prefill = false,
                    bool record_evictions = false);

    // Process one access; returns true on miss.
    bool step(ItemId item);

    bool resident(ItemId item) const;
    std::size_t resident_count() const { return resident_count_; }
    const LruStack& stack() const { return stack_; }
    const SimResult& result() const { return result_; }

private:
    std::size_t pick_eviction_depth() const;

    PolicySpec policy_;
    std::size_t capacity_;
    LruStack stack_;
    std::vector<char> resident_;   // indexed by item id
    std::size_t resident_count_ = 0;
    std::deque<ItemId> fifo_;      // insertion order (FIFO only)
    bool record_evictions_;
    SimResult result_;
};

// Run a whole trace through one BufferSimulator.
SimResult simulate(PolicySpec policy, const Trace& trace, std::size_t C,
                   LruStack initial_stack = LruStack(), bool prefill = false,
                   bool record_evictions = false);

// Offline optimum: on a miss with a full buffer, evict an item never
// used again (smallest id) if one exists, else the item whose next
// use is furthest in the future.
SimResult simulate_belady(const Trace& trace, std::size_t C);

// Closed-form steady-state miss rate of the K-L eviction policy:
// M = 1 - [S(K)(L-C) + S(L)(C-K)] / (L-K),  1 <= K < C <= L <= V.
double kl_miss_rate(const StackDistribution& dist, std::size_t K,
                    std::size_t L, std::size_t C);

// Depth to evict among resident stack depths (all >= 2): the
// minimum-priority depth, ties resolved toward the stack top.
std::size_t lpr_evict_choice(const Segmentation& seg,
                             const std::vector<std::size_t>& resident_depths);

}  // namespace lpr

#endif
