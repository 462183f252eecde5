#include "lpr/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpr/policies.hpp"
#include "lpr/segments.hpp"

namespace lpr {

namespace {

// Closed-form miss rate of the computed policy at one capacity.
double closed_form_miss(const StackDistribution& dist, std::size_t c) {
    if (c >= dist.space_size()) return 0.0;
    if (c == 1) return 1.0 - dist.S(1);
    Segmentation seg = segmentation(dist);
    KLParams kl = kl_for_capacity(seg, c);
    return kl_miss_rate(dist, kl.K, kl.L, c);
}

}  // namespace

LOptResult l_opt(const StackDistribution& dist, std::size_t capacity) {
    const std::size_t v = dist.space_size();
    if (capacity < 1 || capacity >= v)
        throw std::invalid_argument("l_opt: capacity must satisfy 1 <= C < V");
    LOptResult result;
    result.per_g.assign(v - capacity, 0.0);
    double sum = 0.0;
    bool degenerate = false;
    // Running sum of 1 / (1 - S(j)); the bound for window extension G
    // uses j = 0 .. C+G-1, so the first G shares the prefix up to C-1.
    std::size_t j = 0;
    for (; j < capacity; ++j) {
        double slack = 1.0 - dist.S(j);
        if (slack <= 0.0) {
            degenerate = true;
            break;
        }
        sum += 1.0 / slack;
    }
    for (std::size_t g = 1; g <= v - capacity; ++g) {
        if (!degenerate) {
            double slack = 1.0 - dist.S(capacity + g - 1);
            if (slack <= 0.0)
                degenerate = true;
            else
                sum += 1.0 / slack;
        }
        double value = degenerate ? 0.0 : static_cast<double>(g) / sum;
        result.per_g[g - 1] = value;
        if (value > result.value) {
            result.value = value;
            result.best_g = g;
        }
    }
    if (result.best_g == 0) result.best_g = 1;  // all-degenerate input
    return result;
}

QuasiUniform quasi_uniform_transform(const StackDistribution& dist,
                                     std::size_t capacity) {
    const std::size_t v = dist.space_size();
    if (capacity < 1 || capacity >= v)
        throw std::invalid_argument(
            "quasi_uniform_transform: capacity must satisfy 1 <= C < V");
    Segmentation seg = segmentation(dist);
    std::size_t k, l;
    if (capacity == 1) {
        // No bracketing pair exists below C = 1; the first hull
        // breakpoint above the top position plays the role of L.
        k = 1;
        l = seg.breakpoints()[1];
    } else {
        KLParams kl = kl_for_capacity(seg, capacity);
        k = kl.K;
        l = kl.L;
    }

    QuasiUniform qu;
    qu.k = k;
    qu.l = l;
    qu.eta = dist.mean_range(k + 1, l);
    qu.sigma = dist.S(k) - static_cast<double>(k - 1) * qu.eta;
    double tail = 1.0 - dist.S(l);
    if (tail <= 1e-12) {
        // l = V: nothing beyond the flattened range.
        qu.d = -1;
        qu.eta_prime = qu.eta;
        qu.w = l;
    } else {
        // Smallest m with m * eta >= tail; remainder goes last.
        long long m = static_cast<long long>(
            std::ceil(tail / qu.eta - 1e-12));
        qu.d = m - 1;
        qu.eta_prime = tail - static_cast<double>(qu.d) * qu.eta;
        if (qu.eta_prime > qu.eta) qu.eta_prime = qu.eta;
        qu.w = l + static_cast<std::size_t>(m);
    }

    std::vector<double> raw(qu.w, qu.eta);
    raw.front() = qu.sigma;
    raw.back() = qu.eta_prime;
    qu.s_prime = StackDistribution::from_probabilities(std::move(raw));
    return qu;
}

double quasi_uniform_miss(const QuasiUniform& qu, std::size_t capacity) {
    return static_cast<double>(qu.w - 1 - capacity) * qu.eta + qu.eta_prime;
}

ChiBound chi_upper_bound(const StackDistribution& dist, std::size_t capacity) {
    ChiBound bound;
    bound.m_lpr = closed_form_miss(dist, capacity);
    bound.l_opt_value = l_opt(dist, capacity).value;
    bound.ratio = bound.l_opt_value > 0.0
                      ? bound.m_lpr / bound.l_opt_value
                      : std::numeric_limits<double>::infinity();

    QuasiUniform qu = quasi_uniform_transform(dist, capacity);
    bound.w = qu.w;
    const double c = static_cast<double>(capacity);
    if (qu.w > capacity + 2) {
        double wd = static_cast<double>(qu.w);
        double numer = (wd - 2.0) * qu.eta + qu.eta_prime;
        double denom = (wd - 2.0 - c) / 2.0 * qu.eta + qu.eta_prime;
        bound.chi_tilde = (qu.eta_prime + (wd - 1.0 - c) * qu.eta) / (wd - c) *
                          (2.0 + 2.0 / qu.eta * std::log(numer / denom));
    } else {
        bound.direct_ratio = true;
        bound.chi_tilde = bound.ratio;
    }

    bound.log_c_form = 2.0 + 2.0 * std::log(4.0 * c);
    bound.log_miss_form =
        bound.m_lpr > 0.0 ? 2.0 + 2.0 * std::log(4.0 / bound.m_lpr)
                          : std::numeric_limits<double>::infinity();
    bound.log_miss_valid =
        qu.w >= capacity + 4 && bound.m_lpr >= 1.0 / c;
    return bound;
}

double empirical_chi(const StackDistribution& dist, std::size_t capacity,
                     std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Trace trace =
        generate_trace(dist, LruStack::identity(dist.space_size()), n, rng);
    Segmentation seg = segmentation(dist);
    SimResult policy = simulate(PolicySpec::lpr(seg), trace, capacity);
    SimResult opt = simulate_belady(trace, capacity);
    if (opt.misses == 0)
        return policy.misses == 0
                   ? 1.0
                   : std::numeric_limits<double>::infinity();
    return static_cast<double>(policy.misses) /
           static_cast<double>(opt.misses);
}

}  // namespace lpr
