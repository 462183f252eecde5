// End-to-end acceptance checks. Each check prints one PASS/FAIL line;
// the process exits nonzero if any check fails.

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "lpr/allocation.hpp"
#include "lpr/bounds.hpp"
#include "lpr/control.hpp"
#include "lpr/dist.hpp"
#include "lpr/faststack.hpp"
#include "lpr/policies.hpp"
#include "lpr/segments.hpp"

using namespace lpr;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s - %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++g_failures;
}

StackDistribution random_dist(Rng& rng, std::size_t v) {
    std::vector<double> raw(v);
    double sum = 0.0;
    for (auto& x : raw) {
        x = rng.next_unit() + 1e-3;
        sum += x;
    }
    for (auto& x : raw) x /= sum;
    return StackDistribution::from_probabilities(raw, true);
}

StackDistribution monotone_dist(Rng& rng, std::size_t v, bool increasing) {
    std::vector<double> raw(v);
    double sum = 0.0;
    for (auto& x : raw) {
        x = rng.next_unit() + 0.05;
        sum += x;
    }
    for (auto& x : raw) x /= sum;
    std::sort(raw.begin(), raw.end());
    if (!increasing) std::reverse(raw.begin(), raw.end());
    return StackDistribution::from_probabilities(raw, true);
}

const std::vector<double> kFixture8 = {1 / 16., 3 / 16., 3 / 16., 0,
                                       4 / 16., 0,       0,       5 / 16.};

double closed_form_miss(const StackDistribution& d, const Segmentation& seg,
                        std::size_t c) {
    if (c >= d.space_size()) return 0.0;
    if (c == 1) return 1.0 - d.S(1);
    KLParams p = kl_for_capacity(seg, c);
    return kl_miss_rate(d, p.K, p.L, c);
}

// 1. The eviction-depth construction where the optimal finite-horizon
// policy is not a stack policy.
void check_counterexample() {
    CounterexampleReport r = counterexample_check();
    bool ok = r.c2_eviction_depth == 2 && r.c3_eviction_depth == 5 &&
              r.horizon == 5 && r.c2_unique && r.c3_unique &&
              r.infinite_horizon_agrees && r.inclusion_violated;
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "C=2 evicts depth %zu, C=3 evicts depth %zu, horizon %zu",
                  r.c2_eviction_depth, r.c3_eviction_depth, r.horizon);
    report("non-stack optimal eviction counterexample", ok, detail);
}

// 2. The linear-time bracketing parameters minimize the closed-form
// miss rate over all feasible (K, L) at every capacity.
void check_linear_vs_brute() {
    Rng rng(101);
    std::size_t checked = 0, bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        StackDistribution d = random_dist(rng, 2 + rng.next_below(63));
        Segmentation seg = segmentation(d);
        for (std::size_t c = 2; c < d.space_size(); ++c) {
            KLParams p = kl_for_capacity(seg, c);
            double fast = kl_miss_rate(d, p.K, p.L, c);
            BruteForceKl bf = brute_force_kl(d, c);
            ++checked;
            if (std::abs(fast - bf.miss_rate) > 1e-12) ++bad;
        }
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "%zu capacity instances over 1000 laws, %zu mismatches",
                  checked, bad);
    report("linear-scan eviction parameters are brute-force optimal",
           bad == 0, detail);
}

// 3. The all-capacity engine reproduces the reference depth sequence,
// and the one-pass miss curve equals per-capacity simulations.
void check_fast_engine() {
    Rng rng(103);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // Spread V across the range with a few large instances.
        std::size_t v = trial < 90 ? 4 + rng.next_below(97)
                                   : 128 + rng.next_below(385);
        StackDistribution d = random_dist(rng, v);
        Segmentation seg = segmentation(d);
        Rng trng(rng.next_u64());
        Trace t = generate_trace(d, LruStack::identity(d.space_size()),
                                 100000, trng);
        LprSimulator fast(seg);
        NaiveLprOracle naive(seg);
        for (ItemId item : t.accesses)
            if (fast.step(item) != naive.step(item)) ++mismatches;
    }
    std::size_t curve_bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
        StackDistribution d = random_dist(rng, 2 + rng.next_below(31));
        std::size_t v = d.space_size();
        Segmentation seg = segmentation(d);
        Rng trng(rng.next_u64());
        Trace t = generate_trace(d, LruStack::identity(v), 10000, trng);
        MissCurve curve = miss_curve(seg, t);
        for (std::size_t c = 1; c <= v; ++c)
            if (curve.misses[c] != simulate(PolicySpec::lpr(seg), t, c).misses)
                ++curve_bad;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "100 traces x 1e5 depths, %zu mismatches; one-pass curve "
                  "vs per-capacity runs, %zu mismatches",
                  mismatches, curve_bad);
    report("all-capacity engine matches the reference oracle",
           mismatches == 0 && curve_bad == 0, detail);
}

// 4. Simulated bracketing-policy miss rates track the closed form.
void check_closed_form_miss() {
    Rng rng(107);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        StackDistribution d = random_dist(rng, 3 + rng.next_below(30));
        std::size_t v = d.space_size();
        std::size_t c = 2 + rng.next_below(v - 2);
        Segmentation seg = segmentation(d);
        KLParams p = kl_for_capacity(seg, c);
        Rng trng(rng.next_u64());
        Trace t = generate_trace(d, LruStack::identity(v), 1000000, trng);
        double sim = simulate(PolicySpec::kl(p.K, p.L), t, c).miss_rate();
        double want = kl_miss_rate(d, p.K, p.L, c);
        worst = std::max(worst, std::abs(sim - want));
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail),
                  "20 runs of 1e6 accesses, worst deviation %.5f", worst);
    report("closed-form miss rate matches simulation within 0.005",
           worst <= 0.005, detail);
}

// 5. Exhaustive dynamic programming confirms the monotone-law
// optimality of the two depth-extreme eviction rules.
void check_monotone_optimality() {
    Rng rng(109);
    std::size_t bad = 0, instances = 0;
    for (int trial = 0; trial < 50; ++trial) {
        for (bool increasing : {false, true}) {
            std::size_t v = 2 + rng.next_below(6);  // up to 7
            std::size_t c = 1 + rng.next_below(std::min<std::size_t>(3, v));
            StackDistribution d = monotone_dist(rng, v, increasing);
            FiniteMdp mdp = build_mdp(d, c);
            HorizonTable best = dp_optimal(mdp, 8);
            auto fixed = policy_cost(mdp, increasing ? mru_rule : lru_rule, 8);
            ++instances;
            for (std::size_t tau = 0; tau <= 8; ++tau)
                for (std::size_t i = 0; i < mdp.state_count(); ++i)
                    if (std::abs(fixed[tau][i] - best.at(tau, i)) > 1e-12)
                        ++bad;
        }
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "%zu monotone instances, all states and horizons to 8, "
                  "%zu cost mismatches",
                  instances, bad);
    report("depth-extreme rules optimal for monotone laws", bad == 0, detail);
}

// 6. The capacity-2 average-cost closed form solves its fixed-point
// equation and matches value iteration.
void check_c2_closed_form() {
    StackDistribution fix = StackDistribution::from_probabilities(kFixture8);
    BellmanC2Solution fsol = bellman_c2(fix);
    bool fixture_ok = fsol.max_residual <= 1e-12 &&
                      std::abs(fsol.lambda - 13 / 16.) <= 1e-12;
    Rng rng(113);
    double worst_residual = fsol.max_residual, worst_gap = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        StackDistribution d = random_dist(rng, 2 + rng.next_below(31));
        BellmanC2Solution sol = bellman_c2(d);
        worst_residual = std::max(worst_residual, sol.max_residual);
        AverageCost vi = c2_chain_value_iteration(d);
        worst_gap = std::max(worst_gap, std::abs(sol.lambda - vi.lambda));
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "worst residual %.2e, worst gap to value iteration %.2e",
                  worst_residual, worst_gap);
    report("capacity-2 closed form solves the average-cost equation",
           fixture_ok && worst_residual <= 1e-12 && worst_gap <= 1e-9,
           detail);
}

// 7. The bound chain: OPT lower bound below simulated Belady, the
// flattening preserves the achievable miss rate without raising the
// bound, and the empirical ratio respects the analytic bound.
void check_bound_chain() {
    Rng rng(127);
    std::size_t bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        StackDistribution d = random_dist(rng, 3 + rng.next_below(14));
        std::size_t v = d.space_size();
        std::size_t c = 1 + rng.next_below(v - 1);
        Segmentation seg = segmentation(d);
        const std::size_t n = 100000;
        Rng trng(rng.next_u64());
        Trace t = generate_trace(d, LruStack::identity(v), n, trng);
        double belady = simulate_belady(t, c).miss_rate();
        double bound = l_opt(d, c).value;
        double sigma = 1.0 / std::sqrt(double(n));
        if (belady < bound - 3 * sigma) ++bad;
        QuasiUniform qu = quasi_uniform_transform(d, c);
        double m = closed_form_miss(d, seg, c);
        if (std::abs(quasi_uniform_miss(qu, c) - m) > 1e-12) ++bad;
        if (c < qu.w && l_opt(qu.s_prime, c).value > bound + 1e-12) ++bad;
        ChiBound chi = chi_upper_bound(d, c);
        double emp = empirical_chi(d, c, n, rng.next_u64());
        // Statistical slack only: both miss counts are random.
        if (emp > chi.chi_tilde + 0.5) ++bad;
    }
    report("lower bound / flattening / competitive-ratio chain", bad == 0,
           "50 instances, " + std::to_string(bad) + " violations");
}

// 8. The frontier sweep over the single-item chain lands exactly on
// the segment breakpoints of the depth law.
void check_sep_agreement() {
    Rng rng(131);
    std::size_t bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        StackDistribution d = random_dist(rng, 2 + rng.next_below(15));
        std::size_t v = d.space_size();
        Segmentation seg = segmentation(d);
        SepList sweep = sep_sweep(lrusm_cg(d));
        std::vector<std::size_t> kvals;
        for (auto& p : sweep)
            kvals.push_back(
                static_cast<std::size_t>(std::llround(p.eta * double(v))));
        if (kvals != seg.breakpoints()) {
            ++bad;
            continue;
        }
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            EvCosts e = ev_costs(d, kvals[i]);
            if (std::abs(sweep[i].eta - e.occupancy) > 1e-8 ||
                std::abs(sweep[i].zeta - e.miss) > 1e-8)
                ++bad;
        }
    }
    report("frontier sweep recovers the segment breakpoints", bad == 0,
           "100 laws, " + std::to_string(bad) + " disagreements");
}

// 9. Greedy allocation equals exhaustive search with one convex
// mixture allowed.
void check_greedy_optimality() {
    Rng rng(137);
    std::size_t bad = 0, instances = 0;
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t items = 1 + rng.next_below(3);
        std::vector<SepList> frontiers;
        double min_total = 0.0, max_total = 0.0;
        for (std::size_t i = 0; i < items; ++i) {
            std::size_t n = 1 + rng.next_below(4);
            SepList list;
            double eta = rng.next_unit() + 0.1;
            double zeta = rng.next_unit() + 1.0;
            double gain = rng.next_unit() + 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                list.push_back({eta, zeta, {}});
                double de = rng.next_unit() + 0.1;
                eta += de;
                gain *= 0.3 + 0.6 * rng.next_unit();
                zeta -= gain * de;
            }
            min_total += list.front().eta;
            max_total += list.back().eta;
            frontiers.push_back(std::move(list));
        }
        double budget =
            min_total + rng.next_unit() * (max_total - min_total + 0.3);
        Allocation alloc = greedy_allocate(frontiers, budget);
        ++instances;

        // Exhaustive search: all integer choices, plus one interpolated
        // item on top of every choice of the others.
        double best = 1e100;
        std::vector<std::size_t> idx(items, 0);
        while (true) {
            double occ = 0.0, miss = 0.0;
            for (std::size_t i = 0; i < items; ++i) {
                occ += frontiers[i][idx[i]].eta;
                miss += frontiers[i][idx[i]].zeta;
            }
            if (occ <= budget + 1e-9) best = std::min(best, miss);
            for (std::size_t i = 0; i < items; ++i) {
                double room = budget - (occ - frontiers[i][idx[i]].eta);
                double others = miss - frontiers[i][idx[i]].zeta;
                const SepList& f = frontiers[i];
                for (std::size_t j = 0; j + 1 < f.size(); ++j) {
                    if (f[j].eta <= room && room <= f[j + 1].eta) {
                        double g = (f[j + 1].eta - room) /
                                   (f[j + 1].eta - f[j].eta);
                        best = std::min(
                            best,
                            others + g * f[j].zeta + (1 - g) * f[j + 1].zeta);
                    }
                }
                for (std::size_t j = 0; j < f.size(); ++j)
                    if (f[j].eta <= room + 1e-9)
                        best = std::min(best, others + f[j].zeta);
            }
            std::size_t p = 0;
            while (p < items && ++idx[p] == frontiers[p].size()) idx[p++] = 0;
            if (p == items) break;
        }
        if (std::abs(alloc.total_miss - best) > 1e-9) ++bad;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail),
                  "%zu random instances vs exhaustive search, %zu gaps",
                  instances, bad);
    report("greedy allocation is exhaustive-search optimal", bad == 0,
           detail);
}

// 10. Buffers at adjacent capacities stay nested at every step.
void check_inclusion() {
    Rng rng(139);
    std::size_t bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
        StackDistribution d = random_dist(rng, 4 + rng.next_below(13));
        std::size_t v = d.space_size();
        Segmentation seg = segmentation(d);
        Rng trng(rng.next_u64());
        Trace t = generate_trace(d, LruStack::identity(v), 3000, trng);
        std::vector<BufferSimulator> sims;
        for (std::size_t c = 1; c <= v; ++c)
            sims.emplace_back(PolicySpec::lpr(seg), c);
        for (ItemId item : t.accesses) {
            for (auto& sim : sims) sim.step(item);
            for (std::size_t i = 0; i + 1 < sims.size(); ++i) {
                for (ItemId x = 0; x < v; ++x)
                    if (sims[i].resident(x) && !sims[i + 1].resident(x))
                        ++bad;
            }
        }
    }
    report("buffer inclusion holds at every step and capacity", bad == 0,
           "20 traces, " + std::to_string(bad) + " violations");
}

}  // namespace

int main() {
    check_counterexample();
    check_linear_vs_brute();
    check_fast_engine();
    check_closed_form_miss();
    check_monotone_optimality();
    check_c2_closed_form();
    check_bound_chain();
    check_sep_agreement();
    check_greedy_optimality();
    check_inclusion();
    if (g_failures) {
        std::printf("%d check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}
