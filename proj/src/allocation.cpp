#include "lpr/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpr {

void CharacteristicGenerator::validate() const {
    if (kernel.empty())
        throw std::invalid_argument("CharacteristicGenerator: no states");
    if (reference.size() != kernel.size())
        throw std::invalid_argument(
            "CharacteristicGenerator: reference size mismatch");
    for (const auto& row : kernel) {
        double sum = 0.0;
        for (auto& [next, p] : row) {
            if (next >= kernel.size())
                throw std::invalid_argument(
                    "CharacteristicGenerator: bad successor");
            if (!(p >= 0.0))
                throw std::invalid_argument(
                    "CharacteristicGenerator: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument(
                "CharacteristicGenerator: row does not sum to 1");
    }
}

CharacteristicGenerator lrusm_cg(const StackDistribution& dist) {
    const std::size_t v = dist.space_size();
    CharacteristicGenerator cg;
    cg.kernel.resize(v);
    cg.reference.assign(v, 0);
    cg.reference[0] = 1;  // state 0 = stack position 1
    for (std::size_t i = 1; i <= v; ++i) {
        auto& row = cg.kernel[i - 1];
        double ref = dist.s(i);
        double down = i < v ? 1.0 - dist.S(i) : 0.0;
        double stay = 1.0 - ref - down;
        if (ref > 0.0) row.emplace_back(0, ref);
        if (stay > 0.0) row.emplace_back(i - 1, stay);
        if (down > 0.0) row.emplace_back(i, down);
    }
    cg.validate();
    return cg;
}

namespace {

// State encoding for the single-item problem: index = 2z + beta.
inline std::size_t enc(std::size_t z, int beta) { return 2 * z + beta; }

struct SingleItemCosts {
    double occupancy;  // in buffer during the step (loaded on access)
    double miss;       // referenced while absent
};

SingleItemCosts state_cost(const CharacteristicGenerator& cg, std::size_t z,
                           int beta) {
    bool effective = cg.reference[z] || beta;
    return SingleItemCosts{effective ? 1.0 : 0.0,
                           (cg.reference[z] && beta == 0) ? 1.0 : 0.0};
}

// Average cost of a fixed landing-eviction policy under the given
// per-state cost, via damped relative value iteration without the
// minimum (policy evaluation).
double evaluate_policy(const CharacteristicGenerator& cg,
                       const std::vector<char>& evict_on_landing,
                       bool occupancy_cost, double tol,
                       std::size_t iteration_cap = 1000000) {
    const std::size_t n = 2 * cg.state_count();
    std::vector<double> h(n, 0.0), th(n, 0.0);
    for (std::size_t it = 1; it <= iteration_cap; ++it) {
        for (std::size_t z = 0; z < cg.state_count(); ++z) {
            for (int beta = 0; beta <= 1; ++beta) {
                SingleItemCosts c = state_cost(cg, z, beta);
                double total = occupancy_cost ? c.occupancy : c.miss;
                bool held = cg.reference[z] || beta == 1;
                for (auto& [zn, p] : cg.kernel[z]) {
                    int bn = held ? (evict_on_landing[zn] ? 0 : 1) : 0;
                    total += p * h[enc(zn, bn)];
                }
                th[enc(z, beta)] = total;
            }
        }
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = th[i] - h[i];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        if (hi - lo < tol) return 0.5 * (hi + lo);
        double ref = 0.5 * (th[0] + h[0]);
        for (std::size_t i = 0; i < n; ++i) h[i] = 0.5 * (th[i] + h[i]) - ref;
    }
    throw std::runtime_error("evaluate_policy: no convergence");
}

}  // namespace

ScalarizedSolution scalarized_solve(const CharacteristicGenerator& cg,
                                    double theta, double tol) {
    cg.validate();
    if (!(theta >= 0.0 && theta <= std::acos(-1.0) / 2 + 1e-12))
        throw std::invalid_argument("scalarized_solve: theta outside [0, pi/2]");
    const double co = std::cos(theta), si = std::sin(theta);
    const std::size_t n = 2 * cg.state_count();
    std::vector<double> h(n, 0.0), th(n, 0.0);
    const std::size_t cap = 1000000;
    bool converged = false;
    for (std::size_t it = 1; it <= cap && !converged; ++it) {
        for (std::size_t z = 0; z < cg.state_count(); ++z) {
            for (int beta = 0; beta <= 1; ++beta) {
                SingleItemCosts c = state_cost(cg, z, beta);
                double total = co * c.occupancy + si * c.miss;
                bool held = cg.reference[z] || beta == 1;
                for (auto& [zn, p] : cg.kernel[z]) {
                    // Keep-or-evict decided knowing the landing state; an
                    // item referenced this step is loaded and subject to
                    // the same decision afterwards.
                    double next = held
                                      ? std::min(h[enc(zn, 0)], h[enc(zn, 1)])
                                      : h[enc(zn, 0)];
                    total += p * next;
                }
                th[enc(z, beta)] = total;
            }
        }
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = th[i] - h[i];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        if (hi - lo < tol) converged = true;
        double ref = 0.5 * (th[0] + h[0]);
        for (std::size_t i = 0; i < n; ++i) h[i] = 0.5 * (th[i] + h[i]) - ref;
    }
    if (!converged)
        throw std::runtime_error("scalarized_solve: no convergence");

    ScalarizedSolution sol;
    sol.evict_on_landing.assign(cg.state_count(), 0);
    for (std::size_t z = 0; z < cg.state_count(); ++z)
        sol.evict_on_landing[z] = h[enc(z, 0)] < h[enc(z, 1)] - 1e-12 ? 1 : 0;
    sol.j_oc = evaluate_policy(cg, sol.evict_on_landing, true, tol);
    sol.j_ms = evaluate_policy(cg, sol.evict_on_landing, false, tol);
    sol.lambda = co * sol.j_oc + si * sol.j_ms;
    return sol;
}

namespace {
// Endpoints are taken by value: `out` grows during the recursion and
// references into it would dangle across a reallocation.
void sweep_recurse(const CharacteristicGenerator& cg, SepPoint a, SepPoint b,
                   double epsilon, SepList& out, std::size_t& solves,
                   std::size_t solve_cap) {
    if (solves >= solve_cap) return;
    double dx = b.eta - a.eta;
    double dy = a.zeta - b.zeta;
    if (dx <= epsilon || dy <= epsilon) return;
    double theta = std::atan2(dx, dy);
    ++solves;
    ScalarizedSolution mid = scalarized_solve(cg, theta);
    double chord = std::cos(theta) * a.eta + std::sin(theta) * a.zeta;
    double value = std::cos(theta) * mid.j_oc + std::sin(theta) * mid.j_ms;
    if (value < chord - epsilon) {
        SepPoint p{mid.j_oc, mid.j_ms, mid.evict_on_landing};
        out.push_back(p);
        sweep_recurse(cg, a, p, epsilon, out, solves, solve_cap);
        sweep_recurse(cg, p, b, epsilon, out, solves, solve_cap);
    }
}
}  // namespace

SepList sep_sweep(const CharacteristicGenerator& cg, double epsilon) {
    cg.validate();
    ScalarizedSolution lo = scalarized_solve(cg, 0.0);
    ScalarizedSolution hi = scalarized_solve(cg, std::acos(-1.0) / 2);
    SepList points;
    points.push_back(SepPoint{lo.j_oc, lo.j_ms, lo.evict_on_landing});
    points.push_back(SepPoint{hi.j_oc, hi.j_ms, hi.evict_on_landing});
    std::size_t solves = 2;
    // The supported frontier has at most |Z| vertices for these
    // chains, so this cap is never the binding constraint.
    std::size_t solve_cap = 4 * cg.state_count();
    sweep_recurse(cg, points[0], points[1], epsilon, points, solves,
                  solve_cap);
    std::sort(points.begin(), points.end(),
              [](const SepPoint& x, const SepPoint& y) { return x.eta < y.eta; });
    SepList dedup;
    for (auto& p : points) {
        if (!dedup.empty() && std::abs(dedup.back().eta - p.eta) < 1e-9)
            continue;
        dedup.push_back(std::move(p));
    }
    return dedup;
}

Allocation greedy_allocate(const std::vector<SepList>& items, double budget) {
    if (items.empty())
        throw std::invalid_argument("greedy_allocate: no items");
    for (const auto& list : items) {
        if (list.empty())
            throw std::invalid_argument("greedy_allocate: empty SEP list");
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (!(list[i].eta > list[i - 1].eta) ||
                !(list[i].zeta < list[i - 1].zeta))
                throw std::invalid_argument(
                    "greedy_allocate: SEP list not strictly monotone");
            if (i >= 2) {
                double g1 = (list[i - 2].zeta - list[i - 1].zeta) /
                            (list[i - 1].eta - list[i - 2].eta);
                double g2 = (list[i - 1].zeta - list[i].zeta) /
                            (list[i].eta - list[i - 1].eta);
                if (g2 > g1 + 1e-12)
                    throw std::invalid_argument(
                        "greedy_allocate: SEP list not convex");
            }
        }
    }

    Allocation alloc;
    alloc.choice.assign(items.size(), 0);
    double total = 0.0;
    for (const auto& list : items) total += list[0].eta;
    if (budget < total - 1e-9)
        throw std::invalid_argument("greedy_allocate: infeasible budget");

    int last = -1;
    while (total < budget - 1e-12) {
        int pick = -1;
        double best_gain = -1.0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::size_t c = alloc.choice[i];
            if (c + 1 >= items[i].size()) continue;
            double gain = (items[i][c].zeta - items[i][c + 1].zeta) /
                          (items[i][c + 1].eta - items[i][c].eta);
            if (gain > best_gain) {
                best_gain = gain;
                pick = static_cast<int>(i);
            }
        }
        if (pick < 0) break;  // every item already at its last SEP
        std::size_t c = alloc.choice[pick];
        total += items[pick][c + 1].eta - items[pick][c].eta;
        alloc.choice[pick] = c + 1;
        last = pick;
        if (total > budget + 1e-12) break;
    }

    alloc.total_occupancy = 0.0;
    alloc.total_miss = 0.0;
    if (total > budget + 1e-12) {
        // Fractional final step: mix the last-advanced item between
        // its previous and current SEP so the budget is met exactly.
        std::size_t c = alloc.choice[last];
        double others = total - items[last][c].eta;
        double target = budget - others;
        double gamma = (items[last][c].eta - target) /
                       (items[last][c].eta - items[last][c - 1].eta);
        gamma = std::clamp(gamma, 0.0, 1.0);
        alloc.mixture_item = last;
        alloc.gamma = gamma;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        std::size_t c = alloc.choice[i];
        double eta = items[i][c].eta;
        double zeta = items[i][c].zeta;
        if (static_cast<int>(i) == alloc.mixture_item) {
            eta = alloc.gamma * items[i][c - 1].eta + (1 - alloc.gamma) * eta;
            zeta = alloc.gamma * items[i][c - 1].zeta + (1 - alloc.gamma) * zeta;
        }
        alloc.total_occupancy += eta;
        alloc.total_miss += zeta;
    }
    return alloc;
}

PartitionResult partition_buffer(const std::vector<PartitionProcess>& processes,
                                 double budget) {
    if (processes.empty())
        throw std::invalid_argument("partition_buffer: no processes");
    double wsum = 0.0;
    for (const auto& p : processes) {
        if (!(p.weight > 0.0))
            throw std::invalid_argument("partition_buffer: weights must be > 0");
        wsum += p.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("partition_buffer: weights must sum to 1");

    std::vector<SepList> merged;
    std::vector<std::size_t> owner;
    for (std::size_t pi = 0; pi < processes.size(); ++pi) {
        for (const auto& list : processes[pi].items) {
            SepList scaled = list;
            for (auto& pt : scaled) pt.zeta *= processes[pi].weight;
            merged.push_back(std::move(scaled));
            owner.push_back(pi);
        }
    }
    PartitionResult result;
    result.allocation = greedy_allocate(merged, budget);
    result.capacities.assign(processes.size(), 0.0);
    result.miss_rates.assign(processes.size(), 0.0);
    for (std::size_t i = 0; i < merged.size(); ++i) {
        std::size_t c = result.allocation.choice[i];
        double eta = merged[i][c].eta;
        double zeta = merged[i][c].zeta;
        if (static_cast<int>(i) == result.allocation.mixture_item) {
            double g = result.allocation.gamma;
            eta = g * merged[i][c - 1].eta + (1 - g) * eta;
            zeta = g * merged[i][c - 1].zeta + (1 - g) * zeta;
        }
        result.capacities[owner[i]] += eta;
        result.miss_rates[owner[i]] += zeta;
    }
    return result;
}

}  // namespace lpr
