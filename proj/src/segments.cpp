#include "lpr/segments.hpp"

#include <stdexcept>

#include "lpr/policies.hpp"

namespace lpr {

Segmentation::Segmentation(std::vector<std::size_t> q, std::vector<double> xi,
                           std::size_t v)
    : q_(std::move(q)), xi_(std::move(xi)), v_(v) {
    seg_of_.resize(v_ >= 2 ? v_ - 1 : 0);
    for (std::size_t i = 0; i + 1 < q_.size(); ++i)
        for (std::size_t d = q_[i] + 1; d <= q_[i + 1]; ++d)
            seg_of_[d - 2] = i;
}

Segmentation segmentation(const StackDistribution& dist) {
    const std::size_t v = dist.space_size();
    if (v == 1) return Segmentation({1}, {}, 1);

    // nu[j] = last depth of the group starting at j; pi/delta = group
    // probability mass and length. Backward scan over depths V..2,
    // merging while the group average does not exceed the following
    // group's average (cross-multiplied to avoid division).
    std::vector<std::size_t> nu(v + 2);
    std::vector<double> pi(v + 2), delta(v + 2);
    nu[1] = 1;
    pi[1] = dist.s(1);
    delta[1] = 1.0;
    pi[v + 1] = 0.0;  // sentinel below the stack: average 0, never merged
    delta[v + 1] = 1.0;
    for (std::size_t j = v; j >= 2; --j) {
        nu[j] = j;
        pi[j] = dist.s(j);
        delta[j] = 1.0;
        std::size_t n = j + 1;
        while (n <= v && pi[j] * delta[n] <= pi[n] * delta[j]) {
            nu[j] = nu[n];
            pi[j] += pi[n];
            delta[j] += delta[n];
            n = nu[j] + 1;
        }
    }

    std::vector<std::size_t> q;
    std::vector<double> xi(v - 1);
    std::size_t j = 1;
    while (j <= v) {
        q.push_back(nu[j]);
        if (j >= 2) {
            double avg = pi[j] / delta[j];
            for (std::size_t d = j; d <= nu[j]; ++d) xi[d - 2] = avg;
        }
        j = nu[j] + 1;
    }
    return Segmentation(std::move(q), std::move(xi), v);
}

KLParams kl_for_capacity(const Segmentation& seg, std::size_t C) {
    const std::size_t v = seg.space_size();
    if (C < 1 || C > v)
        throw std::invalid_argument("kl_for_capacity: C out of range");
    if (C == 1) return KLParams{1, 1, 1};
    const auto& q = seg.breakpoints();
    for (std::size_t i = 0; i + 1 < q.size(); ++i)
        if (q[i] < C && C <= q[i + 1]) return KLParams{q[i], q[i + 1], C};
    throw std::logic_error("kl_for_capacity: no bracketing breakpoints");
}

BruteForceKl brute_force_kl(const StackDistribution& dist, std::size_t C) {
    const std::size_t v = dist.space_size();
    if (C < 2 || C > v)
        throw std::invalid_argument("brute_force_kl: C out of range");
    double best = 2.0;
    std::size_t bk = 0, bl = 0;
    for (std::size_t k = 1; k < C; ++k)
        for (std::size_t l = C; l <= v; ++l) {
            double m = kl_miss_rate(dist, k, l, C);
            if (m < best) {
                best = m;
                bk = k;
                bl = l;
            }
        }
    KLParams canon = kl_for_capacity(segmentation(dist), C);
    double canon_rate = kl_miss_rate(dist, canon.K, canon.L, C);
    if (canon_rate <= best + 1e-15) return BruteForceKl{canon.K, canon.L, best};
    return BruteForceKl{bk, bl, best};
}

EvCosts ev_costs(const StackDistribution& dist, std::size_t k) {
    const std::size_t v = dist.space_size();
    if (k < 1 || k > v) throw std::invalid_argument("ev_costs: k out of range");
    double vd = static_cast<double>(v);
    return EvCosts{static_cast<double>(k) / vd, (1.0 - dist.S(k)) / vd};
}

std::vector<std::size_t> sep_hull_oracle(const StackDistribution& dist) {
    const std::size_t v = dist.space_size();
    std::vector<double> oc(v + 1), ms(v + 1);
    for (std::size_t k = 1; k <= v; ++k) {
        EvCosts c = ev_costs(dist, k);
        oc[k] = c.occupancy;
        ms[k] = c.miss;
    }
    // Gift wrapping along the lower-left boundary: from each vertex
    // pick the successor with the least slope, preferring the farther
    // point on (near-)collinear ties so interior points are skipped.
    constexpr double kTol = 1e-12;
    std::vector<std::size_t> hull{1};
    std::size_t cur = 1;
    while (cur < v) {
        std::size_t next = cur + 1;
        for (std::size_t cand = cur + 2; cand <= v; ++cand) {
            // cross < 0 => cand lies below the cur->next line.
            double cross = (oc[next] - oc[cur]) * (ms[cand] - ms[cur]) -
                           (ms[next] - ms[cur]) * (oc[cand] - oc[cur]);
            if (cross < kTol) next = cand;
        }
        hull.push_back(next);
        cur = next;
    }
    return hull;
}

}  // namespace lpr
