#include <doctest.h>

#include <cmath>
#include <vector>

#include "clockauct/bayes.hpp"
#include "clockauct/evaluation.hpp"
#include "clockauct/generators.hpp"

using namespace clockauct;

namespace {

Instance iid_instance(int n, const ValueDistribution& d) {
    std::vector<ValueDistribution> ds(static_cast<std::size_t>(n), d);
    return Instance(ds, FeasibilitySystem::from_maximal_sets(n, {all_bidders(n)}), "iid");
}

} // namespace

TEST_CASE("threshold: 8 i.i.d. uniforms at target 2 solves 8(1-t) = 2") {
    auto inst = iid_instance(8, ValueDistribution::uniform(0.0, 1.0));
    CHECK(compute_threshold(inst, all_bidders(8), 2.0) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("threshold: singleton set already under target") {
    auto inst = iid_instance(1, ValueDistribution::uniform(0.0, 1.0));
    CHECK(compute_threshold(inst, {0}, 2.0) == 0.0);
}

TEST_CASE("threshold: tail-count jump lands exactly on the atom") {
    auto inst = iid_instance(8, ValueDistribution::discrete({0.0, 1.0}, {0.5, 0.5}));
    CHECK(compute_threshold(inst, all_bidders(8), 2.0) == 1.0);
}

TEST_CASE("threshold bisection invariant on random instances") {
    RngStream rng(31);
    for (int iter = 0; iter < 60; ++iter) {
        auto inst = make_mixed_random(2 + static_cast<int>(rng.next_u64() % 8),
                                      rng.next_u64(), /*bounded_only=*/true);
        const auto sets = inst.feasibility.enumerate_maximal_sets();
        const double target = std::max(1.0, std::log2(static_cast<double>(sets.size()) + 1.0));
        for (const auto& S : sets) {
            const double t = compute_threshold(inst, S, target);
            auto g = [&](double x) {
                double s = 0.0;
                for (int i : S) s += inst.distributions[static_cast<std::size_t>(i)].tail_prob(x);
                return s;
            };
            CHECK(g(t) <= target + 1e-12);
            if (t > 0.0) {
                bool is_atom = false;
                for (int i : S) {
                    auto sup = inst.distributions[static_cast<std::size_t>(i)].support();
                    if (!sup) continue;
                    for (double a : *sup)
                        if (a == t) is_atom = true;
                }
                CHECK((g(t - 1e-9) > target || is_atom));
            }
        }
    }
}

TEST_CASE("estimate_opt: lower-bound instance enumerates to 58/45 exactly") {
    auto e = estimate_opt(lower_bound_instance(), 10, 1);
    CHECK(e.exact);
    CHECK(e.value == doctest::Approx(58.0 / 45.0).epsilon(1e-12));
}

TEST_CASE("estimate_opt: deterministic instances have no noise") {
    std::vector<ValueDistribution> ds = {ValueDistribution::point_mass(1.0),
                                         ValueDistribution::point_mass(2.0),
                                         ValueDistribution::point_mass(4.0)};
    Instance inst(ds, FeasibilitySystem::from_maximal_sets(3, {{0, 1}, {2}}), "pm");
    auto e = estimate_opt(inst, 10, 1);
    CHECK(e.exact);
    CHECK(e.value == doctest::Approx(4.0));
}

TEST_CASE("Monte-Carlo opt estimates are unbiased around the enumerated value") {
    auto inst = make_discrete_random(5, 3, 2024);
    const double truth = estimate_opt(inst, 10, 1).value;
    int covered = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        auto mc = estimate_opt(inst, 1500, 5000 + static_cast<std::uint64_t>(s), /*joint_cap=*/0);
        CHECK_FALSE(mc.exact);
        const double three_sigma = 3.0 * mc.ci_half / 1.96;
        if (std::abs(mc.value - truth) <= three_sigma) ++covered;
    }
    CHECK(covered >= 96); // 3-sigma coverage is 99.7%
}

TEST_CASE("compute_delta examples") {
    SUBCASE("two point-mass bidders above a forced zero threshold") {
        auto inst = iid_instance(2, ValueDistribution::point_mass(1.0));
        auto sets = inst.feasibility.enumerate_maximal_sets();
        auto d = compute_delta(inst, sets, {0.0}, 2, 10, 1);
        CHECK(d.exact);
        CHECK(d.value == doctest::Approx(2.0));
    }
    SUBCASE("values never above the threshold kill every term") {
        auto inst = iid_instance(3, ValueDistribution::uniform(0.0, 1.0));
        auto sets = inst.feasibility.enumerate_maximal_sets();
        auto d = compute_delta(inst, sets, {1.0}, 3, 400, 7);
        CHECK(d.value == 0.0);
    }
    SUBCASE("Monte Carlo matches exact enumeration within the CI") {
        auto inst = make_discrete_random(5, 2, 99);
        auto sets = inst.feasibility.enumerate_maximal_sets();
        auto thresholds = compute_thresholds(inst, sets);
        auto exact = compute_delta(inst, sets, thresholds, 11, 10, 1);
        REQUIRE(exact.exact);
        auto mc = compute_delta(inst, sets, thresholds, 11, 20000, 123, /*joint_cap=*/0);
        CHECK(std::abs(mc.value - exact.value) <= std::max(3.0 * mc.ci_half / 1.96, 1e-9));
    }
}

TEST_CASE("decomposition estimators") {
    SUBCASE("all values below every threshold: the high side vanishes") {
        auto inst = iid_instance(3, ValueDistribution::point_mass(1.0));
        auto sets = inst.feasibility.enumerate_maximal_sets();
        auto d = estimate_decomposition(inst, sets, {2.0}, 5, 50, 3);
        CHECK(d.high.value == 0.0);
        CHECK(d.high_core.value == 0.0);
        CHECK(d.high_tail.value == 0.0);
        CHECK(d.low.value == doctest::Approx(3.0)); // min(1, 2) each
    }
    SUBCASE("single bidder with threshold zero: all mass is high") {
        auto inst = iid_instance(1, ValueDistribution::point_mass(5.0));
        auto sets = inst.feasibility.enumerate_maximal_sets();
        auto d = estimate_decomposition(inst, sets, {0.0}, 1, 50, 3);
        CHECK(d.high.value == doctest::Approx(5.0));
        CHECK(d.low.value == 0.0);
    }
    SUBCASE("low + high bounds opt from above on random discrete instances") {
        RngStream rng(5150);
        for (int iter = 0; iter < 25; ++iter) {
            auto inst = make_discrete_random(4 + static_cast<int>(rng.next_u64() % 3), 2,
                                             rng.next_u64());
            auto sets = inst.feasibility.enumerate_maximal_sets();
            auto thresholds = compute_thresholds(inst, sets);
            const long m = 10 * static_cast<long>(std::ceil(std::log2(
                               std::max(2.0, static_cast<double>(sets.size()))))) + 1;
            auto d = estimate_decomposition(inst, sets, thresholds, m, 50, rng.next_u64());
            auto opt = estimate_opt(inst, 50, 17);
            REQUIRE(opt.exact);
            const double slack = 2.0 * (d.low.ci_half + d.high.ci_half) + 1e-9;
            CHECK(d.low.value + d.high.value >= opt.value - slack);
            CHECK(d.low.value >= -1e-12);
            CHECK(d.high_core.value >= -1e-12);
            CHECK(d.low_tail.value >= -1e-12);
            CHECK(d.high_tail.value >= -1e-12);
        }
    }
}

TEST_CASE("derived quantities on the lower-bound instance, by hand") {
    // sets in canonical order: {1,2} (the two random bidders), {0} (value 1)
    auto inst = lower_bound_instance();
    auto sets = inst.feasibility.enumerate_maximal_sets();
    REQUIRE(sets == std::vector<BidderSet>{{1, 2}, {0}});
    auto thresholds = compute_thresholds(inst, sets);
    // {1,2}: 2 P[v > t] <= 1 first holds at the 0.4 atom; {0}: P[1 > 0] = 1 <= 1
    CHECK(thresholds[0] == 0.4);
    CHECK(thresholds[1] == 0.0);

    // delta: the {0} term is always 1; the {1,2} term counts value-1 bidders,
    // so E[max] = (4/9 + 2/9 + 2/9) * 1 + (1/9) * 2 = 10/9
    auto delta = compute_delta(inst, sets, thresholds, 11, 10, 1);
    REQUIRE(delta.exact);
    CHECK(delta.value == doctest::Approx(10.0 / 9.0).epsilon(1e-12));

    auto d = estimate_decomposition(inst, sets, thresholds, 11, 10, 1);
    CHECK(d.low.value == doctest::Approx(0.8).epsilon(1e-12));      // 2 * min(v, 0.4)
    CHECK(d.high.value == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
    CHECK(d.high_core.value == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
    CHECK(d.high_tail.value == 0.0); // three bidders can never exceed count 10
    CHECK(d.low_tail.value == 0.0);
    CHECK(d.low_core.value == doctest::Approx(d.low.value).epsilon(1e-12));
}

TEST_CASE("mechanism2 parameter defaults") {
    BayesParams bp;
    SUBCASE("k = 2 gives m = 11, alpha = 12, g = opt/48") {
        fill_mechanism2_params(bp, 96.0, 2);
        CHECK(bp.m == 11);
        CHECK(bp.alpha == doctest::Approx(12.0));
        CHECK(bp.goal == doctest::Approx(2.0));
        CHECK(bp.goal * 4.0 * bp.alpha == doctest::Approx(96.0).epsilon(1e-9));
    }
    SUBCASE("alpha override") {
        fill_mechanism2_params(bp, 8.0, 2, 1.0);
        CHECK(bp.goal == doctest::Approx(2.0));
    }
    SUBCASE("zero opt degenerates the goal") {
        fill_mechanism2_params(bp, 0.0, 4);
        CHECK(bp.goal == 0.0);
    }
}

TEST_CASE("poisson binomial tail recurrence") {
    // 3 fair coins: P[count > 1] = P[2] + P[3] = 1/2
    CHECK(poisson_binomial_tail_gt({0.5, 0.5, 0.5}, 1) == doctest::Approx(0.5));
    CHECK(poisson_binomial_tail_gt({0.5, 0.5}, -1) == doctest::Approx(1.0));
    CHECK(poisson_binomial_tail_gt({0.3, 0.3}, 2) == 0.0);
    // mixed probabilities against direct enumeration
    const std::vector<double> ps = {0.2, 0.7, 0.4};
    double direct = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        int c = 0;
        double q = 1.0;
        for (int i = 0; i < 3; ++i) {
            if (mask & (1 << i)) {
                ++c;
                q *= ps[static_cast<std::size_t>(i)];
            } else {
                q *= 1.0 - ps[static_cast<std::size_t>(i)];
            }
        }
        if (c > 1) direct += q;
    }
    CHECK(poisson_binomial_tail_gt(ps, 1) == doctest::Approx(direct).epsilon(1e-12));
}
