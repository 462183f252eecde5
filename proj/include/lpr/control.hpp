#ifndef LPR_CONTROL_HPP
#define LPR_CONTROL_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "lpr/dist.hpp"

namespace lpr {

/*
 * Exhaustively enumerated buffer-occupancy MDP.  A state is a bitmask
 * over stack depths (bit j-1 set = the item at depth j is in the
 * buffer), with at most C bits set.  The disturbance is the accessed
 * depth d ~ s; a step rotates the occupancy prefix of length d, and
 * on a miss with a full buffer the control chooses which resident
 * depth (>= 2, post-rotation) to evict.  Intended as a verification
 * instrument, hence the hard V <= 12 cap.
 */
class FiniteMdp {
public:
    FiniteMdp(StackDistribution dist, std::size_t capacity);

    std::size_t space_size() const { return v_; }
    std::size_t capacity() const { return c_; }
    const StackDistribution& dist() const { return dist_; }

    std::size_t state_count() const { return states_.size(); }
    std::uint32_t state_mask(std::size_t index) const { return states_[index]; }
    std::size_t state_index(std::uint32_t mask) const;

    // Occupancy prefix rotation matching the LRU stack update.
    std::uint32_t rotate(std::uint32_t mask, std::size_t d) const;

    bool hit(std::uint32_t mask, std::size_t d) const {
        return (mask >> (d - 1)) & 1u;
    }
    double g(std::uint32_t mask, std::size_t d) const {
        return hit(mask, d) ? 0.0 : 1.0;
    }

    // Successor states reachable from (mask, d) over all admissible
    // controls. Hits and sub-full misses have exactly one successor;
    // full-buffer misses have one per resident post-rotation depth.
    // eviction_depths (parallel, optional) receives the evicted
    // post-rotation depth per successor (0 = no eviction).
    void successors(std::uint32_t mask, std::size_t d,
                    std::vector<std::uint32_t>& out,
                    std::vector<std::size_t>* eviction_depths = nullptr) const;

private:
    StackDistribution dist_;
    std::size_t v_;
    std::size_t c_;
    std::vector<std::uint32_t> states_;
    std::vector<std::size_t> index_;  // mask -> state index (or npos)
};

FiniteMdp build_mdp(const StackDistribution& dist, std::size_t capacity);

struct HorizonTable {
    // cost[tau][state index] = optimal expected misses over tau steps.
    std::vector<std::vector<double>> cost;
    double at(std::size_t tau, std::size_t state) const {
        return cost[tau][state];
    }
    std::size_t horizon() const { return cost.size() - 1; }
};

// Backward induction with the disturbance-aware operator: the
// eviction choice is made knowing the accessed depth (the minimum
// sits inside the expectation over d).
HorizonTable dp_optimal(const FiniteMdp& mdp, std::size_t tau);

// Optimal eviction depths (argmin set, tolerance 1e-12) for one
// concrete miss: state mask, accessed depth d, and the number of
// steps remaining after this one.
std::vector<std::size_t> optimal_evictions(const FiniteMdp& mdp,
                                           const HorizonTable& table,
                                           std::uint32_t mask, std::size_t d,
                                           std::size_t remaining);

// Finite-horizon cost of a fixed stationary eviction rule; the rule
// receives (rotated mask, accessed depth) and returns the depth to
// evict (full-buffer misses only).
using EvictionRule = std::function<std::size_t(const FiniteMdp&, std::uint32_t,
                                               std::size_t)>;
std::vector<std::vector<double>> policy_cost(const FiniteMdp& mdp,
                                             const EvictionRule& rule,
                                             std::size_t tau);

std::size_t lru_rule(const FiniteMdp& mdp, std::uint32_t rotated,
                     std::size_t d);
std::size_t mru_rule(const FiniteMdp& mdp, std::uint32_t rotated,
                     std::size_t d);

// State-only variant for comparison: the control commits to one
// candidate eviction depth before seeing the disturbance, falling
// back to the least-recent resident when the candidate is absent.
HorizonTable dp_state_only(const FiniteMdp& mdp, std::size_t tau);

struct AverageCost {
    double lambda = 0.0;
    std::vector<double> h;  // differential costs, h[x_ref] = 0
    std::size_t iterations = 0;
};

// Damped relative value iteration for the average-cost problem.
AverageCost relative_value_iteration(const FiniteMdp& mdp, double tol = 1e-10,
                                     std::size_t iteration_cap = 1000000);

struct BellmanC2Solution {
    double lambda = 0.0;          // 1 - beta(2)
    std::vector<double> beta;     // beta[j], j in [2, V]   (beta[0..1] unused)
    std::vector<double> phi;      // phi[j]
    std::vector<double> rho;      // rho[j]
    std::vector<double> h;        // h[j], h[2] = 0
    double max_residual = 0.0;    // of the C=2 Bellman equation
};

// Closed-form average-cost solution of the C=2 chain. Note: the
// solved equation charges cost 1 - s(j) per step, which counts
// depth-1 accesses as misses, so lambda exceeds the steady-state
// miss rate by exactly s(1); lambda - s(1) is the miss-comparable
// value.
BellmanC2Solution bellman_c2(const StackDistribution& dist);

// Independent check: damped relative value iteration applied
// directly to the same C=2 reduced chain (states = depth of the
// non-top buffered item).
AverageCost c2_chain_value_iteration(const StackDistribution& dist,
                                     double tol = 1e-12,
                                     std::size_t iteration_cap = 1000000);

struct CounterexampleReport {
    std::size_t c2_eviction_depth = 0;
    std::size_t c3_eviction_depth = 0;
    std::size_t horizon = 5;
    bool c2_unique = false;
    bool c3_unique = false;
    bool infinite_horizon_agrees = false;
    bool inclusion_violated = false;
};

// Reproduces the non-stack-policy construction: V=8 distribution
// [1,3,3,0,4,0,0,5]/16, buffers {1,4} (C=2) and {1,4,7} (C=3), one
// access at depth 8, optimal eviction at horizon 5 and under the
// average-cost Bellman solution.
CounterexampleReport counterexample_check();

// Conditional depth law for dependent processes: maps the prefix of
// past depths to the distribution of the next depth.
using ConditionalDistribution =
    std::function<std::vector<double>(const std::vector<std::size_t>& prefix)>;

struct DependentDpResult {
    std::vector<double> optimal;   // per state index, horizon = depth limit
    std::vector<double> lru;       // cost of always-LRU from each state
};

// Exhaustive DP over (prefix, state) pairs; horizon = number of
// accesses. With require_nonincreasing set, every conditional
// distribution must be non-increasing in depth.
DependentDpResult dp_dependent(const ConditionalDistribution& conditional,
                               std::size_t v, std::size_t capacity,
                               std::size_t horizon,
                               bool require_nonincreasing = true);

}  // namespace lpr

#endif
