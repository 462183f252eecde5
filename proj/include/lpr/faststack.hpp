#ifndef LPR_FASTSTACK_HPP
#define LPR_FASTSTACK_HPP

#include <cstdint>
#include <vector>

#include "lpr/dist.hpp"
#include "lpr/segments.hpp"

namespace lpr {

/*
 * O(log V) LRU-depth computation: items carry last-access time
 * slots; a Fenwick tree counts occupied slots, so the depth of an
 * item is 1 + (number of items accessed more recently). The time
 * axis is compacted in place whenever it exceeds 2V slots, keeping
 * the amortized cost logarithmic.
 */
class LruDepthTracker {
public:
    explicit LruDepthTracker(std::size_t v);

    // Registers an access. Returns the item's depth before the
    // access, or 0 if the item was not seen before.
    std::size_t access(ItemId item);

    // Pre-seed the tracker as if the stack items were accessed in
    // reverse order (stack top = most recent).
    void seed(const LruStack& stack);

    std::size_t size() const { return present_; }

private:
    void fenwick_add(std::size_t slot, int delta);
    std::size_t fenwick_prefix(std::size_t slot) const;
    void compact();

    std::size_t v_;
    std::size_t capacity_;          // number of time slots
    std::size_t clock_ = 0;         // last slot handed out
    std::size_t present_ = 0;
    std::vector<std::size_t> slot_; // per item; 0 = absent
    std::vector<int> tree_;         // Fenwick counts over slots 1..capacity_
};

/*
 * Order-statistic sequence with cyclic shifts, as an implicit treap.
 * One instance holds the relative stack positions of a whole
 * segment; all operations are O(log length).
 */
class SegmentSequence {
public:
    SegmentSequence() = default;
    // Holds values first..last (inclusive), in order.
    SegmentSequence(std::uint32_t first, std::uint32_t last, Rng& rng);

    std::size_t length() const { return count(root_); }
    std::uint32_t at(std::size_t index) const;  // 1-based rank

    // Unit right cyclic shift of the first p elements: the p-th
    // element moves to the front, the rest slide down one.
    void shift_prefix(std::size_t p);

    // Right cyclic rotation of the whole sequence by amount (the
    // last `amount mod length` elements move to the front).
    void rotate(std::uint64_t amount);

private:
    struct Node {
        std::uint32_t value;
        std::uint32_t prio;
        std::uint32_t size;
        int left = -1, right = -1;
    };
    int make_node(std::uint32_t value, std::uint32_t prio);
    std::uint32_t count(int n) const {
        return n < 0 ? 0 : nodes_[n].size;
    }
    void pull(int n);
    void split(int n, std::uint32_t k, int& a, int& b);  // first k into a
    int join(int a, int b);

    std::vector<Node> nodes_;
    int root_ = -1;
};

/*
 * All-capacity LPR stack-distance engine.
 *
 * Keeps the map rho from LRU depth to LPR depth factored into one
 * SegmentSequence per segment, with pending whole-segment rotations
 * accumulated lazily in a static binary tree over the segments: an
 * access inside one segment adds a unit shift to every segment above
 * it, which is registered on O(log V) tree nodes and folded into a
 * segment's sequence only when an access lands there.
 *
 * Items not seen before report the sentinel depth V+1 (a miss at
 * every capacity); structurally such an access behaves as an access
 * at the first unused stack position, so unseen items always occupy
 * the bottom of both stacks.
 */
class LprSimulator {
public:
    // Cold start: LRU structure grows lazily from empty.
    explicit LprSimulator(const Segmentation& seg);
    // Pre-seeded: the given items start in the stack, rho = identity.
    LprSimulator(const Segmentation& seg, const LruStack& initial_stack);

    std::size_t space_size() const { return v_; }
    std::size_t sentinel_depth() const { return v_ + 1; }

    // Returns the LPR stack depth of the access, or sentinel_depth()
    // for an item never seen before.
    std::size_t step(ItemId item);

private:
    struct AuxNode {
        std::size_t lo, hi;        // segment index range (0-based)
        std::size_t boundary;      // max right depth boundary in range
        std::int64_t counter = 0;  // pending shifts for this subtree
        int left = -1, right = -1;
    };
    int build_aux(std::size_t lo, std::size_t hi);
    std::size_t update_for_depth(std::size_t d);  // returns rho(d)

    const Segmentation& seg_;
    std::size_t v_;
    LruDepthTracker lru_;
    std::vector<SegmentSequence> sequences_;
    std::vector<AuxNode> aux_;
    int aux_root_ = -1;
};

/*
 * Reference implementation: rho kept as a plain array, every update
 * applied eagerly in O(V) per access. The fast engine is validated
 * against this.
 */
class NaiveLprOracle {
public:
    explicit NaiveLprOracle(const Segmentation& seg);
    NaiveLprOracle(const Segmentation& seg, const LruStack& initial_stack);

    std::size_t space_size() const { return v_; }
    std::size_t sentinel_depth() const { return v_ + 1; }
    std::size_t step(ItemId item);

private:
    std::size_t update_for_depth(std::size_t d);

    const Segmentation& seg_;
    std::size_t v_;
    LruStack stack_;              // seen items only, grows lazily
    std::vector<std::uint32_t> rho_;  // indexed by depth, rho_[1] = 1
};

struct MissCurve {
    std::vector<std::uint64_t> misses;  // index 0 unused; C in [1, V]
    std::vector<std::uint64_t> depth_histogram;  // [1, V+1]; V+1 = cold
    std::uint64_t accesses = 0;
    double miss_rate(std::size_t c) const {
        return accesses ? static_cast<double>(misses[c]) / accesses : 0.0;
    }
};

// One pass over the trace; misses(C) counts accesses with LPR depth
// greater than C, with cold (first-seen) accesses missing at every
// capacity.
MissCurve miss_curve(const Segmentation& seg, const Trace& trace);

}  // namespace lpr

#endif
