#include "lpr/control.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpr {

namespace {
constexpr std::size_t kMaxV = 12;
constexpr std::size_t kNpos = std::numeric_limits<std::size_t>::max();
}  // namespace

// --- FiniteMdp ---------------------------------------------------------

FiniteMdp::FiniteMdp(StackDistribution dist, std::size_t capacity)
    : dist_(std::move(dist)), v_(dist_.space_size()), c_(capacity) {
    if (v_ > kMaxV)
        throw std::invalid_argument(
            "FiniteMdp: state space cap exceeded (V must be <= 12)");
    if (c_ < 1 || c_ > v_)
        throw std::invalid_argument("FiniteMdp: need 1 <= C <= V");
    index_.assign(std::size_t{1} << v_, kNpos);
    for (std::uint32_t mask = 0; mask < (1u << v_); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) <= c_) {
            index_[mask] = states_.size();
            states_.push_back(mask);
        }
    }
}

std::size_t FiniteMdp::state_index(std::uint32_t mask) const {
    std::size_t i = index_[mask];
    if (i == kNpos) throw std::invalid_argument("FiniteMdp: not a state");
    return i;
}

std::uint32_t FiniteMdp::rotate(std::uint32_t mask, std::size_t d) const {
    std::uint32_t low = (1u << d) - 1;
    std::uint32_t prefix = mask & low;
    std::uint32_t rotated =
        ((prefix << 1) | (prefix >> (d - 1))) & low;
    return (mask & ~low) | rotated;
}

void FiniteMdp::successors(std::uint32_t mask, std::size_t d,
                           std::vector<std::uint32_t>& out,
                           std::vector<std::size_t>* eviction_depths) const {
    out.clear();
    if (eviction_depths) eviction_depths->clear();
    std::uint32_t y = rotate(mask, d);
    if (hit(mask, d)) {
        out.push_back(y);
        if (eviction_depths) eviction_depths->push_back(0);
        return;
    }
    if (static_cast<std::size_t>(std::popcount(mask)) < c_) {
        out.push_back(y | 1u);
        if (eviction_depths) eviction_depths->push_back(0);
        return;
    }
    for (std::size_t u = 2; u <= v_; ++u) {
        if ((y >> (u - 1)) & 1u) {
            out.push_back((y | 1u) & ~(1u << (u - 1)));
            if (eviction_depths) eviction_depths->push_back(u);
        }
    }
}

FiniteMdp build_mdp(const StackDistribution& dist, std::size_t capacity) {
    return FiniteMdp(dist, capacity);
}

// --- finite-horizon DP -------------------------------------------------

HorizonTable dp_optimal(const FiniteMdp& mdp, std::size_t tau) {
    const std::size_t n = mdp.state_count();
    const std::size_t v = mdp.space_size();
    HorizonTable table;
    table.cost.assign(tau + 1, std::vector<double>(n, 0.0));
    std::vector<std::uint32_t> succ;
    for (std::size_t t = 1; t <= tau; ++t) {
        const auto& prev = table.cost[t - 1];
        auto& cur = table.cost[t];
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t mask = mdp.state_mask(i);
            double total = 0.0;
            for (std::size_t d = 1; d <= v; ++d) {
                double p = mdp.dist().s(d);
                if (p == 0.0) continue;
                mdp.successors(mask, d, succ);
                double best = std::numeric_limits<double>::infinity();
                for (std::uint32_t next : succ)
                    best = std::min(best, prev[mdp.state_index(next)]);
                total += p * (mdp.g(mask, d) + best);
            }
            cur[i] = total;
        }
    }
    return table;
}

std::vector<std::size_t> optimal_evictions(const FiniteMdp& mdp,
                                           const HorizonTable& table,
                                           std::uint32_t mask, std::size_t d,
                                           std::size_t remaining) {
    constexpr double kTol = 1e-12;
    std::vector<std::uint32_t> succ;
    std::vector<std::size_t> depths;
    mdp.successors(mask, d, succ, &depths);
    const auto& J = table.cost[remaining];
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t next : succ)
        best = std::min(best, J[mdp.state_index(next)]);
    std::vector<std::size_t> argmin;
    for (std::size_t i = 0; i < succ.size(); ++i)
        if (J[mdp.state_index(succ[i])] <= best + kTol)
            argmin.push_back(depths[i]);
    return argmin;
}

std::vector<std::vector<double>> policy_cost(const FiniteMdp& mdp,
                                             const EvictionRule& rule,
                                             std::size_t tau) {
    const std::size_t n = mdp.state_count();
    const std::size_t v = mdp.space_size();
    std::vector<std::vector<double>> cost(tau + 1,
                                          std::vector<double>(n, 0.0));
    for (std::size_t t = 1; t <= tau; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t mask = mdp.state_mask(i);
            double total = 0.0;
            for (std::size_t d = 1; d <= v; ++d) {
                double p = mdp.dist().s(d);
                if (p == 0.0) continue;
                std::uint32_t y = mdp.rotate(mask, d);
                std::uint32_t next;
                if (mdp.hit(mask, d)) {
                    next = y;
                } else if (static_cast<std::size_t>(std::popcount(mask)) <
                           mdp.capacity()) {
                    next = y | 1u;
                } else {
                    std::size_t u = rule(mdp, y, d);
                    next = (y | 1u) & ~(1u << (u - 1));
                }
                total +=
                    p * (mdp.g(mask, d) + cost[t - 1][mdp.state_index(next)]);
            }
            cost[t][i] = total;
        }
    }
    return cost;
}

std::size_t lru_rule(const FiniteMdp& mdp, std::uint32_t rotated,
                     std::size_t /*d*/) {
    for (std::size_t u = mdp.space_size(); u >= 2; --u)
        if ((rotated >> (u - 1)) & 1u) return u;
    throw std::logic_error("lru_rule: no resident candidate");
}

std::size_t mru_rule(const FiniteMdp& mdp, std::uint32_t rotated,
                     std::size_t /*d*/) {
    for (std::size_t u = 2; u <= mdp.space_size(); ++u)
        if ((rotated >> (u - 1)) & 1u) return u;
    throw std::logic_error("mru_rule: no resident candidate");
}

HorizonTable dp_state_only(const FiniteMdp& mdp, std::size_t tau) {
    const std::size_t n = mdp.state_count();
    const std::size_t v = mdp.space_size();
    HorizonTable table;
    table.cost.assign(tau + 1, std::vector<double>(n, 0.0));
    for (std::size_t t = 1; t <= tau; ++t) {
        const auto& prev = table.cost[t - 1];
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t mask = mdp.state_mask(i);
            double best = std::numeric_limits<double>::infinity();
            // Commit to one candidate depth before the disturbance.
            for (std::size_t cand = 2; cand <= v; ++cand) {
                double total = 0.0;
                for (std::size_t d = 1; d <= v; ++d) {
                    double p = mdp.dist().s(d);
                    if (p == 0.0) continue;
                    std::uint32_t y = mdp.rotate(mask, d);
                    std::uint32_t next;
                    if (mdp.hit(mask, d)) {
                        next = y;
                    } else if (static_cast<std::size_t>(std::popcount(mask)) <
                               mdp.capacity()) {
                        next = y | 1u;
                    } else {
                        std::size_t u = ((y >> (cand - 1)) & 1u)
                                            ? cand
                                            : lru_rule(mdp, y, d);
                        next = (y | 1u) & ~(1u << (u - 1));
                    }
                    total += p * (mdp.g(mask, d) + prev[mdp.state_index(next)]);
                }
                best = std::min(best, total);
            }
            if (v == 1) {
                // No eviction freedom at all; single successor chain.
                double total = 0.0;
                std::uint32_t next = 1u;
                total = mdp.g(mask, 1) + prev[mdp.state_index(next)];
                best = total;
            }
            table.cost[t][i] = best;
        }
    }
    return table;
}

// --- relative value iteration ------------------------------------------

namespace {
// One application of the disturbance-aware average-cost operator.
void apply_operator(const FiniteMdp& mdp, const std::vector<double>& h,
                    std::vector<double>& out) {
    const std::size_t n = mdp.state_count();
    const std::size_t v = mdp.space_size();
    std::vector<std::uint32_t> succ;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t mask = mdp.state_mask(i);
        double total = 0.0;
        for (std::size_t d = 1; d <= v; ++d) {
            double p = mdp.dist().s(d);
            if (p == 0.0) continue;
            mdp.successors(mask, d, succ);
            double best = std::numeric_limits<double>::infinity();
            for (std::uint32_t next : succ)
                best = std::min(best, h[mdp.state_index(next)]);
            total += p * (mdp.g(mask, d) + best);
        }
        out[i] = total;
    }
}
}  // namespace

AverageCost relative_value_iteration(const FiniteMdp& mdp, double tol,
                                     std::size_t iteration_cap) {
    const std::size_t n = mdp.state_count();
    std::vector<double> h(n, 0.0), th(n, 0.0);
    AverageCost result;
    for (std::size_t it = 1; it <= iteration_cap; ++it) {
        apply_operator(mdp, h, th);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = th[i] - h[i];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        if (hi - lo < tol) {
            result.lambda = 0.5 * (hi + lo);
            result.iterations = it;
            double ref = h[0];
            result.h.resize(n);
            for (std::size_t i = 0; i < n; ++i) result.h[i] = h[i] - ref;
            return result;
        }
        // Damped update (handles periodic chains); renormalized at
        // state 0 so the iterates stay bounded.
        double ref = 0.5 * (th[0] + h[0]);
        for (std::size_t i = 0; i < n; ++i)
            h[i] = 0.5 * (th[i] + h[i]) - ref;
    }
    throw std::runtime_error(
        "relative_value_iteration: no convergence within iteration cap");
}

// --- C = 2 closed form -------------------------------------------------

BellmanC2Solution bellman_c2(const StackDistribution& dist) {
    const std::size_t v = dist.space_size();
    if (v < 2) throw std::invalid_argument("bellman_c2: V must be >= 2");
    BellmanC2Solution sol;
    sol.beta.assign(v + 2, 0.0);
    sol.phi.assign(v + 2, 0.0);
    sol.rho.assign(v + 2, 0.0);
    sol.h.assign(v + 2, 0.0);

    // beta(j) = best moving average of a window starting at j.
    for (std::size_t j = 2; j <= v; ++j) {
        double best = 0.0;
        for (std::size_t end = j; end <= v; ++end)
            best = std::max(best, dist.mean_range(j, end));
        sol.beta[j] = best;
    }
    const double b2 = sol.beta[2];
    sol.lambda = 1.0 - b2;

    // phi(j) = longest window starting at j whose every suffix
    // average is at least beta(2); 0 when none qualifies.
    for (std::size_t j = 2; j <= v; ++j) {
        std::size_t best_l = 0;
        for (std::size_t l = 1; j + l - 1 <= v; ++l) {
            bool ok = true;
            for (std::size_t k = 0; k < l; ++k) {
                if (dist.mean_range(j + k, j + l - 1) < b2) {
                    ok = false;
                    break;
                }
            }
            if (ok) best_l = l;
        }
        sol.phi[j] = static_cast<double>(best_l);
        sol.rho[j] = best_l > 0
                         ? dist.mean_range(j, j + best_l - 1) - b2
                         : sol.beta[j] - b2;
    }
    // Positions past V never participate (weight 1 - S(V) = 0).
    sol.phi[v + 1] = 0.0;
    sol.rho[v + 1] = 0.0;

    for (std::size_t j = 2; j <= v; ++j) {
        double sj1 = dist.S(j - 1);
        sol.h[j] = b2 - dist.s(j) - (sj1 / (1.0 - sj1)) * sol.phi[j] * sol.rho[j] -
                   sol.phi[j + 1] * sol.rho[j + 1];
    }

    // Residual of h(j) = 1 - s(j) - lambda + S(j-1) min{0, h(j)}
    //                    + (1 - S(j)) min{0, h(j+1)}.
    double worst = 0.0;
    for (std::size_t j = 2; j <= v; ++j) {
        double rhs = 1.0 - dist.s(j) - sol.lambda +
                     dist.S(j - 1) * std::min(0.0, sol.h[j]) +
                     (1.0 - dist.S(j)) * std::min(0.0, sol.h[j + 1]);
        worst = std::max(worst, std::abs(sol.h[j] - rhs));
    }
    sol.max_residual = worst;
    return sol;
}

AverageCost c2_chain_value_iteration(const StackDistribution& dist, double tol,
                                     std::size_t iteration_cap) {
    const std::size_t v = dist.space_size();
    if (v < 2)
        throw std::invalid_argument("c2_chain_value_iteration: V must be >= 2");
    // State j in [2, V]: depth of the buffered item that is not on
    // top. Per-step cost 1 - s(j) (only the depth-j access is free).
    auto op = [&](const std::vector<double>& h, std::vector<double>& out) {
        for (std::size_t j = 2; j <= v; ++j) {
            double stay_or_reset =
                std::min(h[j - 2], h[0]);  // evict depth 2 vs companion
            double down = j < v ? std::min(h[j - 1], h[0]) : 0.0;
            out[j - 2] = 1.0 - dist.s(j) + dist.s(j) * h[0] +
                         dist.S(j - 1) * stay_or_reset +
                         (1.0 - dist.S(j)) * down;
        }
    };
    std::vector<double> h(v - 1, 0.0), th(v - 1, 0.0);
    AverageCost result;
    for (std::size_t it = 1; it <= iteration_cap; ++it) {
        op(h, th);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < h.size(); ++i) {
            double diff = th[i] - h[i];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        if (hi - lo < tol) {
            result.lambda = 0.5 * (hi + lo);
            result.iterations = it;
            result.h.resize(h.size());
            for (std::size_t i = 0; i < h.size(); ++i)
                result.h[i] = h[i] - h[0];
            return result;
        }
        double ref = 0.5 * (th[0] + h[0]);
        for (std::size_t i = 0; i < h.size(); ++i)
            h[i] = 0.5 * (th[i] + h[i]) - ref;
    }
    throw std::runtime_error(
        "c2_chain_value_iteration: no convergence within iteration cap");
}

// --- counterexample ----------------------------------------------------

namespace {
// Average-cost optimal eviction depths via the differential costs.
std::vector<std::size_t> bias_optimal_evictions(const FiniteMdp& mdp,
                                                const AverageCost& avg,
                                                std::uint32_t mask,
                                                std::size_t d, double tol) {
    std::vector<std::uint32_t> succ;
    std::vector<std::size_t> depths;
    mdp.successors(mask, d, succ, &depths);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t next : succ)
        best = std::min(best, avg.h[mdp.state_index(next)]);
    std::vector<std::size_t> argmin;
    for (std::size_t i = 0; i < succ.size(); ++i)
        if (avg.h[mdp.state_index(succ[i])] <= best + tol)
            argmin.push_back(depths[i]);
    return argmin;
}

std::uint32_t apply_eviction(const FiniteMdp& mdp, std::uint32_t mask,
                             std::size_t d, std::size_t evict_depth) {
    std::uint32_t y = mdp.rotate(mask, d);
    return (y | 1u) & ~(1u << (evict_depth - 1));
}
}  // namespace

CounterexampleReport counterexample_check() {
    auto dist = StackDistribution::from_probabilities(
        {1.0 / 16, 3.0 / 16, 3.0 / 16, 0.0, 4.0 / 16, 0.0, 0.0, 5.0 / 16});
    CounterexampleReport report;
    report.horizon = 5;
    const std::size_t d = 8;
    const std::uint32_t mask2 = (1u << 0) | (1u << 3);             // {1, 4}
    const std::uint32_t mask3 = (1u << 0) | (1u << 3) | (1u << 6); // {1, 4, 7}

    FiniteMdp mdp2(dist, 2);
    FiniteMdp mdp3(dist, 3);
    // The access itself consumes one step of the horizon.
    HorizonTable t2 = dp_optimal(mdp2, report.horizon - 1);
    HorizonTable t3 = dp_optimal(mdp3, report.horizon - 1);
    auto ev2 = optimal_evictions(mdp2, t2, mask2, d, report.horizon - 1);
    auto ev3 = optimal_evictions(mdp3, t3, mask3, d, report.horizon - 1);
    report.c2_unique = ev2.size() == 1;
    report.c3_unique = ev3.size() == 1;
    report.c2_eviction_depth = ev2.front();
    report.c3_eviction_depth = ev3.front();

    AverageCost avg2 = relative_value_iteration(mdp2);
    AverageCost avg3 = relative_value_iteration(mdp3);
    auto inf2 = bias_optimal_evictions(mdp2, avg2, mask2, d, 1e-9);
    auto inf3 = bias_optimal_evictions(mdp3, avg3, mask3, d, 1e-9);
    report.infinite_horizon_agrees =
        inf2.size() == 1 && inf3.size() == 1 &&
        inf2.front() == report.c2_eviction_depth &&
        inf3.front() == report.c3_eviction_depth;

    std::uint32_t b2 =
        apply_eviction(mdp2, mask2, d, report.c2_eviction_depth);
    std::uint32_t b3 =
        apply_eviction(mdp3, mask3, d, report.c3_eviction_depth);
    report.inclusion_violated = (b2 & ~b3) != 0;
    return report;
}

// --- dependent-process DP ----------------------------------------------

namespace {
struct DependentContext {
    const ConditionalDistribution* conditional;
    const FiniteMdp* mdp;  // used for mask mechanics only
    bool require_nonincreasing;
    std::vector<std::size_t> prefix;
};

std::vector<double> checked_conditional(DependentContext& ctx) {
    std::vector<double> probs = (*ctx.conditional)(ctx.prefix);
    const std::size_t v = ctx.mdp->space_size();
    if (probs.size() != v)
        throw std::invalid_argument("dp_dependent: conditional has wrong size");
    double sum = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        if (!(probs[i] >= 0.0))
            throw std::invalid_argument("dp_dependent: negative probability");
        if (ctx.require_nonincreasing && i > 0 &&
            probs[i] > probs[i - 1] + 1e-12)
            throw std::invalid_argument(
                "dp_dependent: conditional not non-increasing");
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("dp_dependent: conditional does not sum to 1");
    return probs;
}

double dependent_optimal(DependentContext& ctx, std::uint32_t mask,
                         std::size_t remaining) {
    if (remaining == 0) return 0.0;
    const FiniteMdp& mdp = *ctx.mdp;
    std::vector<double> probs = checked_conditional(ctx);
    std::vector<std::uint32_t> succ;
    double total = 0.0;
    for (std::size_t d = 1; d <= mdp.space_size(); ++d) {
        if (probs[d - 1] == 0.0) continue;
        mdp.successors(mask, d, succ);
        ctx.prefix.push_back(d);
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t next : succ)
            best = std::min(best, dependent_optimal(ctx, next, remaining - 1));
        ctx.prefix.pop_back();
        total += probs[d - 1] * (mdp.g(mask, d) + best);
    }
    return total;
}

double dependent_lru(DependentContext& ctx, std::uint32_t mask,
                     std::size_t remaining) {
    if (remaining == 0) return 0.0;
    const FiniteMdp& mdp = *ctx.mdp;
    std::vector<double> probs = checked_conditional(ctx);
    double total = 0.0;
    for (std::size_t d = 1; d <= mdp.space_size(); ++d) {
        if (probs[d - 1] == 0.0) continue;
        std::uint32_t y = mdp.rotate(mask, d);
        std::uint32_t next;
        if (mdp.hit(mask, d)) {
            next = y;
        } else if (static_cast<std::size_t>(std::popcount(mask)) <
                   mdp.capacity()) {
            next = y | 1u;
        } else {
            next = (y | 1u) & ~(1u << (lru_rule(mdp, y, d) - 1));
        }
        ctx.prefix.push_back(d);
        double tail = dependent_lru(ctx, next, remaining - 1);
        ctx.prefix.pop_back();
        total += probs[d - 1] * (mdp.g(mask, d) + tail);
    }
    return total;
}
}  // namespace

DependentDpResult dp_dependent(const ConditionalDistribution& conditional,
                               std::size_t v, std::size_t capacity,
                               std::size_t horizon,
                               bool require_nonincreasing) {
    if (v > 8 || horizon > 8)
        throw std::invalid_argument(
            "dp_dependent: exhaustive prefix recursion needs small V, horizon");
    // Uniform placeholder law: mask mechanics only, probabilities come
    // from the conditional.
    FiniteMdp mdp(StackDistribution::from_probabilities(
                      std::vector<double>(v, 1.0 / static_cast<double>(v)),
                      true),
                  capacity);
    DependentContext ctx{&conditional, &mdp, require_nonincreasing, {}};
    DependentDpResult result;
    result.optimal.resize(mdp.state_count());
    result.lru.resize(mdp.state_count());
    for (std::size_t i = 0; i < mdp.state_count(); ++i) {
        ctx.prefix.clear();
        result.optimal[i] = dependent_optimal(ctx, mdp.state_mask(i), horizon);
        ctx.prefix.clear();
        result.lru[i] = dependent_lru(ctx, mdp.state_mask(i), horizon);
    }
    return result;
}

}  // namespace lpr
