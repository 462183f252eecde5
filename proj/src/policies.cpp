#include "lpr/policies.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lpr {

BufferSimulator::BufferSimulator(PolicySpec policy, std::size_t capacity,
                                 LruStack initial_stack, bool prefill,
                                 bool record_evictions)
    : policy_(std::move(policy)),
      capacity_(capacity),
      stack_(std::move(initial_stack)),
      record_evictions_(record_evictions) {
    if (capacity_ == 0)
        throw std::invalid_argument("BufferSimulator: capacity must be >= 1");
    if (policy_.kind == PolicyKind::Kl &&
        !(policy_.K >= 1 && policy_.K < capacity_ && capacity_ <= policy_.L))
        throw std::invalid_argument(
            "BufferSimulator: KL requires 1 <= K < C <= L");
    if (policy_.kind == PolicyKind::Lpr && policy_.seg == nullptr)
        throw std::invalid_argument("BufferSimulator: LPR needs a segmentation");
    if (prefill) {
        std::size_t n = std::min(capacity_, stack_.size());
        for (std::size_t d = 1; d <= n; ++d) {
            ItemId it = stack_.at(d);
            if (it >= resident_.size()) resident_.resize(it + 1, 0);
            resident_[it] = 1;
            if (policy_.kind == PolicyKind::Fifo) fifo_.push_back(it);
        }
        resident_count_ = n;
    }
}

bool BufferSimulator::resident(ItemId item) const {
    return item < resident_.size() && resident_[item];
}

std::size_t BufferSimulator::pick_eviction_depth() const {
    // Candidates are resident depths >= 2 in the post-rotation stack
    // (the just-accessed item sits at depth 1 and is never evicted).
    switch (policy_.kind) {
    case PolicyKind::Lru: {
        for (std::size_t d = stack_.size(); d >= 2; --d)
            if (resident(stack_.at(d))) return d;
        break;
    }
    case PolicyKind::Mru: {
        for (std::size_t d = 2; d <= stack_.size(); ++d)
            if (resident(stack_.at(d))) return d;
        break;
    }
    case PolicyKind::Kl: {
        // Evict the item at depth L+1 if resident, else at depth K+1,
        // else fall back to the least recently used resident.
        if (policy_.L + 1 <= stack_.size() &&
            resident(stack_.at(policy_.L + 1)))
            return policy_.L + 1;
        if (policy_.K + 1 <= stack_.size() &&
            resident(stack_.at(policy_.K + 1)))
            return policy_.K + 1;
        for (std::size_t d = stack_.size(); d >= 2; --d)
            if (resident(stack_.at(d))) return d;
        break;
    }
    case PolicyKind::Lpr: {
        const Segmentation& seg = *policy_.seg;
        std::size_t best = 0;
        for (std::size_t d = 2; d <= stack_.size(); ++d) {
            if (!resident(stack_.at(d))) continue;
            // Lower priority = deeper segment; first hit within the
            // deepest occupied segment is the topmost, so scanning
            // upward and keeping the best segment suffices.
            if (best == 0 || seg.segment_of(d) > seg.segment_of(best))
                best = d;
        }
        if (best != 0) return best;
        break;
    }
    case PolicyKind::Fifo:
        break;  // handled by caller via fifo_ queue
    }
    throw std::logic_error("pick_eviction_depth: no resident candidate");
}

bool BufferSimulator::step(ItemId item) {
    std::size_t step_index = result_.accesses;
    ++result_.accesses;
    if (stack_.contains(item))
        stack_.touch(item);
    else
        stack_.push_new(item);

    if (resident(item)) return false;  // hit

    ++result_.misses;
    if (resident_count_ >= capacity_) {
        ItemId victim;
        std::size_t victim_depth;
        if (policy_.kind == PolicyKind::Fifo) {
            victim = fifo_.front();
            fifo_.pop_front();
            victim_depth = stack_.depth_of(victim);
        } else {
            victim_depth = pick_eviction_depth();
            victim = stack_.at(victim_depth);
        }
        resident_[victim] = 0;
        --resident_count_;
        if (record_evictions_)
            result_.evictions.push_back(
                EvictionEvent{step_index, victim, victim_depth});
    }
    if (item >= resident_.size()) resident_.resize(item + 1, 0);
    resident_[item] = 1;
    ++resident_count_;
    if (policy_.kind == PolicyKind::Fifo) fifo_.push_back(item);
    return true;
}

SimResult simulate(PolicySpec policy, const Trace& trace, std::size_t C,
                   LruStack initial_stack, bool prefill,
                   bool record_evictions) {
    BufferSimulator sim(std::move(policy), C, std::move(initial_stack),
                        prefill, record_evictions);
    for (ItemId item : trace.accesses) sim.step(item);
    return sim.result();
}

SimResult simulate_belady(const Trace& trace, std::size_t C) {
    if (C == 0)
        throw std::invalid_argument("simulate_belady: capacity must be >= 1");
    const std::size_t n = trace.size();
    constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
    // next_use[t] = index of the next access to trace[t] after t.
    std::vector<std::size_t> next_use(n);
    std::vector<std::size_t> last_seen;
    for (std::size_t t = n; t-- > 0;) {
        ItemId item = trace.accesses[t];
        if (item >= last_seen.size()) last_seen.resize(item + 1, kNever);
        next_use[t] = last_seen[item];
        last_seen[item] = t;
    }

    SimResult result;
    result.accesses = n;
    std::vector<std::size_t> resident_next;  // per item; kNever-1 = absent
    constexpr std::size_t kAbsent = kNever - 1;
    std::vector<ItemId> buffer;
    auto in_buffer = [&](ItemId it) {
        return it < resident_next.size() && resident_next[it] != kAbsent;
    };
    for (std::size_t t = 0; t < n; ++t) {
        ItemId item = trace.accesses[t];
        if (item >= resident_next.size())
            resident_next.resize(item + 1, kAbsent);
        if (in_buffer(item)) {
            resident_next[item] = next_use[t];
            continue;
        }
        ++result.misses;
        if (buffer.size() >= C) {
            // Prefer an item never used again (smallest id for
            // determinism), else the furthest next use.
            std::size_t victim_idx = 0;
            ItemId best_dead = std::numeric_limits<ItemId>::max();
            std::size_t best_next = 0;
            for (std::size_t i = 0; i < buffer.size(); ++i) {
                ItemId it = buffer[i];
                std::size_t nu = resident_next[it];
                if (nu == kNever) {
                    if (it < best_dead) {
                        best_dead = it;
                        victim_idx = i;
                    }
                } else if (best_dead == std::numeric_limits<ItemId>::max() &&
                           nu > best_next) {
                    best_next = nu;
                    victim_idx = i;
                }
            }
            resident_next[buffer[victim_idx]] = kAbsent;
            buffer[victim_idx] = buffer.back();
            buffer.pop_back();
        }
        buffer.push_back(item);
        resident_next[item] = next_use[t];
    }
    return result;
}

double kl_miss_rate(const StackDistribution& dist, std::size_t K,
                    std::size_t L, std::size_t C) {
    if (!(1 <= K && K < C && C <= L && L <= dist.space_size()))
        throw std::invalid_argument("kl_miss_rate: need 1 <= K < C <= L <= V");
    double lk = static_cast<double>(L - K);
    return 1.0 - (dist.S(K) * static_cast<double>(L - C) +
                  dist.S(L) * static_cast<double>(C - K)) /
                     lk;
}

std::size_t lpr_evict_choice(const Segmentation& seg,
                             const std::vector<std::size_t>& resident_depths) {
    if (resident_depths.empty())
        throw std::invalid_argument("lpr_evict_choice: empty candidate set");
    std::size_t best = 0;
    for (std::size_t d : resident_depths) {
        if (d < 2 || d > seg.space_size())
            throw std::invalid_argument("lpr_evict_choice: depth out of range");
        if (best == 0 || seg.xi(d) < seg.xi(best) ||
            (seg.xi(d) == seg.xi(best) && d < best))
            best = d;
    }
    return best;
}

}  // namespace lpr
