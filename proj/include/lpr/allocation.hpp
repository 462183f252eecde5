#ifndef LPR_ALLOCATION_HPP
#define LPR_ALLOCATION_HPP

#include <cstddef>
#include <vector>

#include "lpr/dist.hpp"

namespace lpr {

/*
 * Hidden Markov chain driving a single item's reference process:
 * finite state set, a stochastic transition kernel, and a per-state
 * reference indicator (the item is requested whenever the chain is
 * in a reference state).
 */
struct CharacteristicGenerator {
    // kernel[z] = list of (next state, probability); rows sum to 1.
    std::vector<std::vector<std::pair<std::size_t, double>>> kernel;
    std::vector<char> reference;  // r(z)

    std::size_t state_count() const { return kernel.size(); }
    void validate() const;
};

// Stack-position chain of one item: from position i the item is
// referenced (to position 1) with probability s(i), pushed down one
// with probability 1 - S(i), and left in place otherwise.
CharacteristicGenerator lrusm_cg(const StackDistribution& dist);

struct ScalarizedSolution {
    // Eviction decision per landing state: after each transition the
    // controller may drop the item knowing where it lands (the
    // disturbance-aware control); meaningful when the current state
    // is not a reference state.
    std::vector<char> evict_on_landing;
    double j_oc = 0.0;      // average occupancy of the solved policy
    double j_ms = 0.0;      // average miss rate of the solved policy
    double lambda = 0.0;    // scalarized average cost
};

// Average-cost solve of the single-item problem under the cost
// cos(theta) * occupancy + sin(theta) * miss, followed by separate
// evaluation of the fixed policy under each cost.
ScalarizedSolution scalarized_solve(const CharacteristicGenerator& cg,
                                    double theta, double tol = 1e-12);

struct SepPoint {
    double eta;   // J_oc
    double zeta;  // J_ms
    std::vector<char> policy;  // evict_on_landing realizing the point
};

using SepList = std::vector<SepPoint>;

// Supported efficient points of the (occupancy, miss) frontier by
// recursive scalarization: solve the two axis extremes, then keep
// bisecting along chord normals while new supported points appear.
SepList sep_sweep(const CharacteristicGenerator& cg, double epsilon = 1e-9);

struct Allocation {
    std::vector<std::size_t> choice;  // per-item SEP index
    // At most one item interpolates between two adjacent SEPs.
    int mixture_item = -1;
    double gamma = 0.0;  // weight on the lower (cheaper) SEP
    double total_occupancy = 0.0;
    double total_miss = 0.0;
};

// Greedy marginal-gain ascent over per-item SEP frontiers; the final
// fractional step becomes a randomized mixture on the last-advanced
// item so the occupancy budget is met exactly.
Allocation greedy_allocate(const std::vector<SepList>& items, double budget);

struct PartitionProcess {
    std::vector<SepList> items;
    double weight;  // pi_i > 0; weights sum to 1
};

struct PartitionResult {
    Allocation allocation;             // over the concatenated items
    std::vector<double> capacities;    // occupancy received per process
    std::vector<double> miss_rates;    // weighted miss total per process
};

// Shared-buffer split: each process's miss costs are scaled by its
// weight, then one greedy allocation runs over the union of items.
PartitionResult partition_buffer(const std::vector<PartitionProcess>& processes,
                                 double budget);

}  // namespace lpr

#endif
