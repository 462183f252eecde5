#ifndef LPR_SEGMENTS_HPP
#define LPR_SEGMENTS_HPP

#include <cstddef>
#include <vector>

#include "lpr/dist.hpp"

namespace lpr {

/*
 * Partition of stack depths [2, V] into segments delimited by the
 * breakpoints q_1 = 1 < q_2 < ... < q_l = V; segment i (0-based
 * index) covers depths (q_i, q_{i+1}].  Each depth carries a
 * priority xi equal to its segment's average probability; segment
 * averages strictly decrease with depth, so lower xi = deeper
 * segment = better eviction candidate.
 */
class Segmentation {
public:
    Segmentation(std::vector<std::size_t> q, std::vector<double> xi,
                 std::size_t v);

    const std::vector<std::size_t>& breakpoints() const { return q_; }
    std::size_t space_size() const { return v_; }
    std::size_t segment_count() const { return q_.size() - 1; }

    // Priority of a depth in [2, V].
    double xi(std::size_t depth) const { return xi_[depth - 2]; }

    // 0-based segment index of a depth in [2, V].
    std::size_t segment_of(std::size_t depth) const {
        return seg_of_[depth - 2];
    }

    // Segment i covers depths [lower(i)+1, upper(i)].
    std::size_t lower(std::size_t i) const { return q_[i]; }
    std::size_t upper(std::size_t i) const { return q_[i + 1]; }

private:
    std::vector<std::size_t> q_;
    std::vector<double> xi_;        // indexed by depth-2
    std::vector<std::size_t> seg_of_;
    std::size_t v_;
};

struct KLParams {
    std::size_t K;
    std::size_t L;
    std::size_t C;
};

// Linear-time segmentation: one backward scan merging depths while
// the running average does not exceed the next group's average
// (compared by cross-multiplication; ties merge).
Segmentation segmentation(const StackDistribution& dist);

// Consecutive breakpoints bracketing C: K = q_i < C <= q_{i+1} = L.
// C = 1 has no eviction freedom; K = L = 1 is returned as a sentinel.
KLParams kl_for_capacity(const Segmentation& seg, std::size_t C);

struct BruteForceKl {
    std::size_t K;
    std::size_t L;
    double miss_rate;
};

// Exhaustive minimization of the closed-form K-L miss rate over all
// admissible (K, L); ties resolved toward the kl_for_capacity pair.
BruteForceKl brute_force_kl(const StackDistribution& dist, std::size_t C);

struct EvCosts {
    double occupancy;  // k / V
    double miss;       // (1 - S(k)) / V
};

// Average occupancy / miss cost of the keep-while-above-depth-k
// single-item policy.
EvCosts ev_costs(const StackDistribution& dist, std::size_t k);

// Independent oracle: breakpoints as the lower-left convex hull
// vertices of the V points (occupancy, miss) from ev_costs, found by
// an O(V^2) scan. Collinear interior points are merged away.
std::vector<std::size_t> sep_hull_oracle(const StackDistribution& dist);

}  // namespace lpr

#endif
