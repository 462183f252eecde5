#include "lpr/faststack.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace lpr {

// --- LruDepthTracker ---------------------------------------------------

LruDepthTracker::LruDepthTracker(std::size_t v)
    : v_(v), capacity_(2 * v + 2), slot_(v, 0), tree_(capacity_ + 1, 0) {}

void LruDepthTracker::fenwick_add(std::size_t slot, int delta) {
    for (; slot <= capacity_; slot += slot & (~slot + 1)) tree_[slot] += delta;
}

std::size_t LruDepthTracker::fenwick_prefix(std::size_t slot) const {
    std::size_t sum = 0;
    for (; slot > 0; slot -= slot & (~slot + 1))
        sum += static_cast<std::size_t>(tree_[slot]);
    return sum;
}

void LruDepthTracker::compact() {
    // Renumber occupied slots 1..present_ preserving order.
    std::vector<std::pair<std::size_t, ItemId>> occupied;
    occupied.reserve(present_);
    for (ItemId item = 0; item < slot_.size(); ++item)
        if (slot_[item] != 0) occupied.emplace_back(slot_[item], item);
    std::sort(occupied.begin(), occupied.end());
    std::fill(tree_.begin(), tree_.end(), 0);
    std::size_t next = 0;
    for (auto& [old_slot, item] : occupied) {
        (void)old_slot;
        slot_[item] = ++next;
        fenwick_add(next, 1);
    }
    clock_ = next;
}

std::size_t LruDepthTracker::access(ItemId item) {
    if (item >= v_)
        throw std::invalid_argument("LruDepthTracker: item id out of range");
    std::size_t depth = 0;
    if (slot_[item] != 0) {
        // Items in strictly later slots are strictly more recent.
        depth = present_ - fenwick_prefix(slot_[item]) + 1;
        fenwick_add(slot_[item], -1);
        slot_[item] = 0;  // must not survive into a compaction
    } else {
        ++present_;
    }
    if (clock_ == capacity_) compact();
    slot_[item] = ++clock_;
    fenwick_add(slot_[item], 1);
    return depth;
}

void LruDepthTracker::seed(const LruStack& stack) {
    if (clock_ != 0)
        throw std::logic_error("LruDepthTracker: seed on used tracker");
    std::size_t n = stack.size();
    for (std::size_t depth = 1; depth <= n; ++depth) {
        ItemId item = stack.at(depth);
        if (item >= v_)
            throw std::invalid_argument("LruDepthTracker: item id out of range");
        slot_[item] = n - depth + 1;
        fenwick_add(slot_[item], 1);
    }
    clock_ = n;
    present_ = n;
}

// --- SegmentSequence ---------------------------------------------------

SegmentSequence::SegmentSequence(std::uint32_t first, std::uint32_t last,
                                 Rng& rng) {
    nodes_.reserve(last - first + 1);
    for (std::uint32_t v = first; v <= last; ++v)
        root_ = join(root_, make_node(v, static_cast<std::uint32_t>(
                                             rng.next_u64() >> 32)));
}

int SegmentSequence::make_node(std::uint32_t value, std::uint32_t prio) {
    nodes_.push_back(Node{value, prio, 1, -1, -1});
    return static_cast<int>(nodes_.size()) - 1;
}

void SegmentSequence::pull(int n) {
    nodes_[n].size = 1 + count(nodes_[n].left) + count(nodes_[n].right);
}

void SegmentSequence::split(int n, std::uint32_t k, int& a, int& b) {
    if (n < 0) {
        a = b = -1;
        return;
    }
    if (count(nodes_[n].left) >= k) {
        split(nodes_[n].left, k, a, nodes_[n].left);
        b = n;
    } else {
        split(nodes_[n].right, k - count(nodes_[n].left) - 1, nodes_[n].right,
              b);
        a = n;
    }
    pull(n);
}

int SegmentSequence::join(int a, int b) {
    if (a < 0) return b;
    if (b < 0) return a;
    if (nodes_[a].prio > nodes_[b].prio) {
        nodes_[a].right = join(nodes_[a].right, b);
        pull(a);
        return a;
    }
    nodes_[b].left = join(a, nodes_[b].left);
    pull(b);
    return b;
}

std::uint32_t SegmentSequence::at(std::size_t index) const {
    int n = root_;
    while (true) {
        std::size_t left = count(nodes_[n].left);
        if (index == left + 1) return nodes_[n].value;
        if (index <= left) {
            n = nodes_[n].left;
        } else {
            index -= left + 1;
            n = nodes_[n].right;
        }
    }
}

void SegmentSequence::shift_prefix(std::size_t p) {
    if (p < 2) return;
    int head, tail, body, last;
    split(root_, static_cast<std::uint32_t>(p), head, tail);
    split(head, static_cast<std::uint32_t>(p - 1), body, last);
    root_ = join(join(last, body), tail);
}

void SegmentSequence::rotate(std::uint64_t amount) {
    std::size_t len = length();
    std::size_t m = static_cast<std::size_t>(amount % len);
    if (m == 0) return;
    int a, b;
    split(root_, static_cast<std::uint32_t>(len - m), a, b);
    root_ = join(b, a);
}

// --- LprSimulator ------------------------------------------------------

LprSimulator::LprSimulator(const Segmentation& seg)
    : seg_(seg), v_(seg.space_size()), lru_(v_) {
    Rng prio_rng(0x5e9f00d5u);
    std::size_t nseg = seg_.segment_count() > 0 ? seg_.breakpoints().size() - 1
                                                : 0;
    sequences_.reserve(nseg);
    for (std::size_t i = 0; i < nseg; ++i)
        sequences_.emplace_back(static_cast<std::uint32_t>(seg_.lower(i) + 1),
                                static_cast<std::uint32_t>(seg_.upper(i)),
                                prio_rng);
    if (nseg > 0) {
        aux_.reserve(2 * nseg);
        aux_root_ = build_aux(0, nseg - 1);
    }
}

LprSimulator::LprSimulator(const Segmentation& seg,
                           const LruStack& initial_stack)
    : LprSimulator(seg) {
    lru_.seed(initial_stack);
}

int LprSimulator::build_aux(std::size_t lo, std::size_t hi) {
    aux_.push_back(AuxNode{lo, hi, seg_.upper(hi), 0, -1, -1});
    int n = static_cast<int>(aux_.size()) - 1;
    if (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        int l = build_aux(lo, mid);
        int r = build_aux(mid + 1, hi);
        aux_[n].left = l;
        aux_[n].right = r;
    }
    return n;
}

std::size_t LprSimulator::step(ItemId item) {
    std::size_t d = lru_.access(item);
    bool cold = (d == 0);
    if (cold) d = lru_.size();  // unseen items occupy the next position down
    if (d == 1) return cold ? sentinel_depth() : 1;
    std::size_t out = update_for_depth(d);
    return cold ? sentinel_depth() : out;
}

std::size_t LprSimulator::update_for_depth(std::size_t d) {
    // Descend to the segment containing d. Going right means every
    // segment in the left subtree lies wholly above the access and
    // receives one pending shift; counters along the path are the
    // shifts this segment accumulated since it was last touched.
    int n = aux_root_;
    std::int64_t pending = 0;
    while (true) {
        pending += aux_[n].counter;
        if (aux_[n].lo == aux_[n].hi) break;
        if (d <= aux_[aux_[n].left].boundary) {
            n = aux_[n].left;
        } else {
            aux_[aux_[n].left].counter += 1;
            n = aux_[n].right;
        }
    }
    std::size_t a = aux_[n].lo;
    aux_[n].counter -= pending;
    assert(pending >= 0);
    SegmentSequence& seq = sequences_[a];
    if (pending > 0) seq.rotate(static_cast<std::uint64_t>(pending));
    std::size_t idx = d - seg_.lower(a);
    std::size_t out = seq.at(idx);
    seq.shift_prefix(idx);
    return out;
}

// --- NaiveLprOracle ----------------------------------------------------

NaiveLprOracle::NaiveLprOracle(const Segmentation& seg)
    : seg_(seg), v_(seg.space_size()), rho_(v_ + 1) {
    for (std::size_t j = 1; j <= v_; ++j)
        rho_[j] = static_cast<std::uint32_t>(j);
}

NaiveLprOracle::NaiveLprOracle(const Segmentation& seg,
                               const LruStack& initial_stack)
    : NaiveLprOracle(seg) {
    stack_ = initial_stack;
}

namespace {
// Unit right cyclic shift of rho[lo..hi]: the value at hi moves to
// lo, the rest slide down one position.
void rotate_range(std::vector<std::uint32_t>& rho, std::size_t lo,
                  std::size_t hi) {
    if (lo >= hi) return;
    std::uint32_t last = rho[hi];
    for (std::size_t p = hi; p > lo; --p) rho[p] = rho[p - 1];
    rho[lo] = last;
}
}  // namespace

std::size_t NaiveLprOracle::step(ItemId item) {
    if (item >= v_)
        throw std::invalid_argument("NaiveLprOracle: item id out of range");
    bool cold = !stack_.contains(item);
    std::size_t d;
    if (cold) {
        stack_.push_new(item);
        d = stack_.size();
    } else {
        d = stack_.touch(item);
    }
    if (d == 1) return cold ? sentinel_depth() : 1;
    std::size_t out = update_for_depth(d);
    return cold ? sentinel_depth() : out;
}

std::size_t NaiveLprOracle::update_for_depth(std::size_t d) {
    std::size_t a = seg_.segment_of(d);
    std::size_t out = rho_[d];
    // Segments wholly above the access shift by one; the accessed
    // segment shifts only its prefix up to d; below d nothing moves.
    for (std::size_t i = 0; i < a; ++i)
        rotate_range(rho_, seg_.lower(i) + 1, seg_.upper(i));
    rotate_range(rho_, seg_.lower(a) + 1, d);
    return out;
}

// --- miss_curve --------------------------------------------------------

MissCurve miss_curve(const Segmentation& seg, const Trace& trace) {
    const std::size_t v = seg.space_size();
    LprSimulator sim(seg);
    MissCurve curve;
    curve.depth_histogram.assign(v + 2, 0);
    for (ItemId item : trace.accesses) {
        std::size_t depth = sim.step(item);
        ++curve.depth_histogram[depth];
        ++curve.accesses;
    }
    curve.misses.assign(v + 1, 0);
    std::uint64_t deeper = curve.depth_histogram[v + 1];
    for (std::size_t c = v; c >= 1; --c) {
        curve.misses[c] = deeper;
        deeper += curve.depth_histogram[c];
    }
    return curve;
}

}  // namespace lpr
