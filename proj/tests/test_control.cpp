#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lpr/control.hpp"
#include "lpr/segments.hpp"

using namespace lpr;

namespace {
const std::vector<double> kFixture8 = {1 / 16., 3 / 16., 3 / 16., 0,
                                       4 / 16., 0,       0,       5 / 16.};

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
}  // namespace

TEST_CASE("state enumeration of the occupancy MDP") {
    StackDistribution d2 = StackDistribution::from_probabilities({0.4, 0.6});
    FiniteMdp tiny = build_mdp(d2, 1);
    // Occupancy vectors with at most one resident over two positions.
    CHECK(tiny.state_count() == 3);

    StackDistribution d8 = StackDistribution::from_probabilities(kFixture8);
    FiniteMdp mdp = build_mdp(d8, 2);
    CHECK(mdp.state_count() == 1 + 8 + 28);  // masks with <= 2 bits
    // Cost: hit iff the accessed depth is resident.
    std::uint32_t mask = (1u << 0) | (1u << 3);  // depths 1 and 4
    CHECK(mdp.g(mask, 1) == 0.0);
    CHECK(mdp.g(mask, 4) == 0.0);
    CHECK(mdp.g(mask, 2) == 1.0);

    StackDistribution big = StackDistribution::from_probabilities(
        std::vector<double>(13, 1.0 / 13), true);
    CHECK_THROWS(build_mdp(big, 2));  // state-space cap
}

TEST_CASE("rotation matches the stack prefix shift") {
    StackDistribution d = StackDistribution::from_probabilities(kFixture8);
    FiniteMdp mdp = build_mdp(d, 2);
    // Depths {1,4} with an access at depth 8 become {2,5}.
    CHECK(mdp.rotate((1u << 0) | (1u << 3), 8) == ((1u << 1) | (1u << 4)));
    // Access above the resident depths leaves them unchanged.
    CHECK(mdp.rotate((1u << 4) | (1u << 6), 3) == ((1u << 4) | (1u << 6)));
    // Accessed resident depth moves to the top.
    CHECK(mdp.rotate(1u << 3, 4) == 1u << 0);
}

TEST_CASE("one-step optimal cost is the unresident mass") {
    Rng rng(3);
    StackDistribution d = random_dist(rng, 6);
    FiniteMdp mdp = build_mdp(d, 3);
    HorizonTable table = dp_optimal(mdp, 1);
    for (std::size_t i = 0; i < mdp.state_count(); ++i) {
        double want = 0.0;
        for (std::size_t j = 1; j <= 6; ++j)
            if (!(mdp.state_mask(i) >> (j - 1) & 1u)) want += d.s(j);
        REQUIRE(table.at(1, i) == doctest::Approx(want).epsilon(1e-12));
        REQUIRE(table.at(0, i) == 0.0);
    }
}

TEST_CASE("optimal cost is monotone in horizon and below fixed rules") {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        StackDistribution d = random_dist(rng, 2 + rng.next_below(6));
        std::size_t c =
            1 + rng.next_below(std::min<std::size_t>(3, d.space_size()));
        FiniteMdp mdp = build_mdp(d, c);
        HorizonTable table = dp_optimal(mdp, 6);
        auto lru = policy_cost(mdp, lru_rule, 6);
        auto mru = policy_cost(mdp, mru_rule, 6);
        HorizonTable state_only = dp_state_only(mdp, 6);
        for (std::size_t i = 0; i < mdp.state_count(); ++i) {
            for (std::size_t tau = 1; tau <= 6; ++tau) {
                REQUIRE(table.at(tau, i) >= table.at(tau - 1, i) - 1e-12);
                REQUIRE(table.at(tau, i) <= lru[tau][i] + 1e-12);
                REQUIRE(table.at(tau, i) <= mru[tau][i] + 1e-12);
                // Seeing the disturbance before choosing can only help.
                REQUIRE(table.at(tau, i) <= state_only.at(tau, i) + 1e-12);
            }
        }
    }
}

TEST_CASE("LRU optimal for non-increasing laws, MRU for non-decreasing") {
    Rng rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        std::size_t v = 2 + rng.next_below(6);  // up to 7
        std::size_t c = 1 + rng.next_below(std::min<std::size_t>(3, v));
        for (bool increasing : {false, true}) {
            StackDistribution d = monotone_dist(rng, v, increasing);
            FiniteMdp mdp = build_mdp(d, c);
            HorizonTable best = dp_optimal(mdp, 8);
            auto fixed =
                policy_cost(mdp, increasing ? mru_rule : lru_rule, 8);
            for (std::size_t tau = 0; tau <= 8; ++tau)
                for (std::size_t i = 0; i < mdp.state_count(); ++i)
                    REQUIRE(fixed[tau][i] ==
                            doctest::Approx(best.at(tau, i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("relative value iteration on tiny instances") {
    StackDistribution d2 =
        StackDistribution::from_probabilities({0.35, 0.65});
    AverageCost ac = relative_value_iteration(build_mdp(d2, 1));
    CHECK(ac.lambda == doctest::Approx(0.65).epsilon(1e-8));

    StackDistribution d8 = StackDistribution::from_probabilities(kFixture8);
    AverageCost ac8 = relative_value_iteration(build_mdp(d8, 2));
    // Gain-optimal miss rate = the best bracketing-policy closed form.
    CHECK(ac8.lambda == doctest::Approx(12 / 16.).epsilon(1e-8));
}

TEST_CASE("finite-horizon average converges to the iteration gain") {
    Rng rng(13);
    StackDistribution d = random_dist(rng, 5);
    FiniteMdp mdp = build_mdp(d, 2);
    AverageCost ac = relative_value_iteration(mdp);
    HorizonTable table = dp_optimal(mdp, 400);
    // The per-step increment converges to the gain geometrically; the
    // window difference cancels the transient bias of J/tau.
    double increment = (table.at(400, 0) - table.at(200, 0)) / 200.0;
    CHECK(increment == doctest::Approx(ac.lambda).epsilon(1e-8));
}

TEST_CASE("capacity-2 closed form on the fixture") {
    StackDistribution d = StackDistribution::from_probabilities(kFixture8);
    BellmanC2Solution sol = bellman_c2(d);
    CHECK(sol.beta[2] == doctest::Approx(3 / 16.).epsilon(1e-12));
    CHECK(sol.lambda == doctest::Approx(13 / 16.).epsilon(1e-12));
    CHECK(sol.max_residual <= 1e-12);
    // The solved equation charges depth-1 accesses too; subtracting
    // s(1) gives the steady-state miss rate.
    CHECK(sol.lambda - d.s(1) == doctest::Approx(12 / 16.).epsilon(1e-12));
}

TEST_CASE("capacity-2 closed form against independent solvers") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        StackDistribution d = random_dist(rng, 2 + rng.next_below(31));
        BellmanC2Solution sol = bellman_c2(d);
        REQUIRE(sol.max_residual <= 1e-12);
        AverageCost chain = c2_chain_value_iteration(d);
        REQUIRE(std::abs(sol.lambda - chain.lambda) < 1e-9);
        if (d.space_size() >= 2) {
            // Gain-optimal miss rate at C=2 equals the best closed form.
            BruteForceKl bf = brute_force_kl(d, 2);
            REQUIRE(sol.lambda - d.s(1) ==
                    doctest::Approx(bf.miss_rate).epsilon(1e-9));
        }
    }
}

TEST_CASE("non-stack-policy counterexample") {
    CounterexampleReport r = counterexample_check();
    CHECK(r.c2_eviction_depth == 2);
    CHECK(r.c3_eviction_depth == 5);
    CHECK(r.horizon == 5);
    CHECK(r.c2_unique);
    CHECK(r.c3_unique);
    CHECK(r.infinite_horizon_agrees);
    CHECK(r.inclusion_violated);
}

TEST_CASE("dependent DP reduces to the i.i.d. case") {
    Rng rng(19);
    StackDistribution d = random_dist(rng, 4);
    ConditionalDistribution constant =
        [&](const std::vector<std::size_t>&) { return d.probabilities(); };
    DependentDpResult dep = dp_dependent(constant, 4, 2, 4, false);
    FiniteMdp mdp = build_mdp(d, 2);
    HorizonTable table = dp_optimal(mdp, 4);
    for (std::size_t i = 0; i < mdp.state_count(); ++i)
        REQUIRE(dep.optimal[i] ==
                doctest::Approx(table.at(4, i)).epsilon(1e-12));
}

TEST_CASE("LRU optimal under non-increasing conditional laws") {
    Rng rng(23);
    for (int trial = 0; trial < 8; ++trial) {
        std::size_t v = 3 + rng.next_below(3);  // up to 5
        std::uint64_t salt = rng.next_u64();
        // Prefix-dependent but always non-increasing in depth.
        ConditionalDistribution cond =
            [v, salt](const std::vector<std::size_t>& prefix) {
                Rng local(salt ^ (prefix.size() * 0x9e37u) ^
                          (prefix.empty() ? 0 : prefix.back()));
                std::vector<double> raw(v);
                double sum = 0.0;
                for (auto& x : raw) {
                    x = local.next_unit() + 0.05;
                    sum += x;
                }
                for (auto& x : raw) x /= sum;
                std::sort(raw.rbegin(), raw.rend());
                return raw;
            };
        DependentDpResult dep = dp_dependent(cond, v, 2, 4, true);
        for (std::size_t i = 0; i < dep.optimal.size(); ++i)
            REQUIRE(dep.lru[i] ==
                    doctest::Approx(dep.optimal[i]).epsilon(1e-12));
    }
}

TEST_CASE("dependent DP validates its conditional") {
    ConditionalDistribution bad_sum = [](const std::vector<std::size_t>&) {
        return std::vector<double>{0.5, 0.4};
    };
    CHECK_THROWS(dp_dependent(bad_sum, 2, 1, 2, false));
    ConditionalDistribution increasing =
        [](const std::vector<std::size_t>&) {
            return std::vector<double>{0.2, 0.8};
        };
    CHECK_THROWS(dp_dependent(increasing, 2, 1, 2, true));
    // Allowed when monotonicity is not required; LRU can only be
    // matched or beaten by the optimum.
    DependentDpResult dep = dp_dependent(increasing, 2, 1, 3, false);
    for (std::size_t i = 0; i < dep.optimal.size(); ++i)
        CHECK(dep.lru[i] >= dep.optimal[i] - 1e-12);
}
