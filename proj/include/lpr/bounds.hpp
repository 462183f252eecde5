#ifndef LPR_BOUNDS_HPP
#define LPR_BOUNDS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lpr/dist.hpp"

namespace lpr {

struct LOptResult {
    std::size_t best_g = 0;  // maximizing window extension G
    double value = 0.0;      // the lower bound on OPT's miss rate
    std::vector<double> per_g;  // bound for G = 1..V-C (index G-1)
};

// Lower bound on the miss rate of the offline optimal policy:
//   G * [ sum_{j=0}^{C+G-1} 1 / (1 - S(j)) ]^{-1},
// maximized over G in [1, V-C].  Positions j with S(j) = 1 make the
// bound for the affected G degenerate to 0; those G are skipped.
LOptResult l_opt(const StackDistribution& dist, std::size_t capacity);

/*
 * Quasi-uniform reduction at capacity C.  With K < C <= L the hull
 * breakpoints bracketing C, the depth law is flattened to
 *   s' = [sigma, eta, ..., eta, eta_prime]
 * over an effective space of W = L + D + 1 positions: eta is the
 * average probability over (K, L], sigma absorbs the excess of the
 * first K positions, and the tail mass beyond L is spread into D
 * further positions of eta plus a remainder eta_prime in (0, eta].
 * The reduction preserves the closed-form miss rate at C and does
 * not increase the OPT lower bound.  When L = V there is no tail to
 * spread (D = -1) and the last flattened entry doubles as eta_prime.
 */
struct QuasiUniform {
    double sigma = 0.0;
    double eta = 0.0;
    double eta_prime = 0.0;
    long long d = 0;     // tail extension count; -1 in the L = V case
    std::size_t w = 0;   // effective space, L + D + 1
    std::size_t k = 0;   // bracketing breakpoints used
    std::size_t l = 0;
    StackDistribution s_prime;
};

QuasiUniform quasi_uniform_transform(const StackDistribution& dist,
                                     std::size_t capacity);

// Closed-form miss rate of the reduced law: (W-1-C) eta + eta_prime.
double quasi_uniform_miss(const QuasiUniform& qu, std::size_t capacity);

struct ChiBound {
    // Upper bound on (miss rate of the computed policy) / (OPT lower
    // bound); the analytic form when w - C > 2, else the direct
    // ratio m_lpr / l_opt_value.
    double chi_tilde = 0.0;
    bool direct_ratio = false;
    double m_lpr = 0.0;        // closed-form miss rate of the input law
    double l_opt_value = 0.0;  // OPT lower bound of the input law
    double ratio = 0.0;        // m_lpr / l_opt_value
    std::size_t w = 0;         // effective space of the reduction
    // Simplified dominating forms (reported, never equated):
    double log_c_form = 0.0;     // 2 + 2 ln(4C), dominates when w - C > 2
    double log_miss_form = 0.0;  // 2 + 2 ln(4 / m_lpr), dominates when
    bool log_miss_valid = false; // w - C >= 4 and m_lpr >= 1/C
};

ChiBound chi_upper_bound(const StackDistribution& dist, std::size_t capacity);

// Miss-count ratio (computed policy) / (offline optimum) on one
// simulated trace of n accesses.
double empirical_chi(const StackDistribution& dist, std::size_t capacity,
                     std::size_t n, std::uint64_t seed);

}  // namespace lpr

#endif
