#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "clockauct/rng.hpp"
#include "clockauct/valuation.hpp"

using namespace clockauct;

namespace {

double empirical_mean(const ValueDistribution& d, long n, std::uint64_t seed) {
    RngStream rng(seed);
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += d.sample(rng);
    return s / static_cast<double>(n);
}

/// Exact sup-distance between the empirical CDF of `n` samples and the
/// analytic CDF, evaluated at the sample points and their left limits.
double ks_statistic(const ValueDistribution& d, long n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = d.sample(rng);
    std::sort(xs.begin(), xs.end());
    double worst = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        const double below = static_cast<double>(i) / static_cast<double>(n);
        const double upto = static_cast<double>(j) / static_cast<double>(n);
        const double cdf = 1.0 - d.tail_prob(xs[i]);
        const double cdf_left = 1.0 - d.tail_prob_weak(xs[i]);
        worst = std::max({worst, std::abs(upto - cdf), std::abs(below - cdf_left)});
        i = j;
    }
    return worst;
}

const std::vector<ValueDistribution>& all_variants() {
    static const std::vector<ValueDistribution> v = {
        ValueDistribution::point_mass(1.0),
        ValueDistribution::discrete({0.4, 1.0}, {2.0 / 3.0, 1.0 / 3.0}),
        ValueDistribution::uniform(0.0, 1.0),
        ValueDistribution::exponential(1.5),
    };
    return v;
}

} // namespace

TEST_CASE("sampling matches the declared law") {
    RngStream rng(1);
    auto pm = ValueDistribution::point_mass(1.0);
    for (int i = 0; i < 100; ++i) CHECK(pm.sample(rng) == 1.0);

    // two-point prior from the lower-bound instance: low value w.p. 2/3
    auto d = ValueDistribution::discrete({0.4, 1.0}, {2.0 / 3.0, 1.0 / 3.0});
    const long n = 100000;
    RngStream rng2(2);
    long lows = 0;
    for (long i = 0; i < n; ++i)
        if (d.sample(rng2) == 0.4) ++lows;
    const double freq = static_cast<double>(lows) / static_cast<double>(n);
    const double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / static_cast<double>(n));
    CHECK(std::abs(freq - 2.0 / 3.0) <= 3.0 * sigma);

    const double mean = empirical_mean(ValueDistribution::uniform(0.0, 1.0), n, 3);
    const double usigma = std::sqrt(1.0 / 12.0 / static_cast<double>(n));
    CHECK(std::abs(mean - 0.5) <= 3.0 * usigma);
}

TEST_CASE("tail_prob is strict") {
    CHECK(ValueDistribution::point_mass(1.0).tail_prob(1.0) == 0.0);
    CHECK(ValueDistribution::point_mass(1.0).tail_prob_weak(1.0) == 1.0);
    auto d = ValueDistribution::discrete({0.4, 1.0}, {2.0 / 3.0, 1.0 / 3.0});
    CHECK(d.tail_prob(0.4) == doctest::Approx(1.0 / 3.0));
    CHECK(d.tail_prob_weak(0.4) == doctest::Approx(1.0));
    CHECK(ValueDistribution::uniform(0.0, 1.0).tail_prob(0.25) == doctest::Approx(0.75));
}

TEST_CASE("conditional tail expectation") {
    CHECK(ValueDistribution::uniform(0.0, 1.0).cte(0.5) == doctest::Approx(0.75));
    CHECK(ValueDistribution::point_mass(3.0).cte(2.0) == 3.0);
    auto d = ValueDistribution::discrete({1.0, 2.0, 4.0}, {0.5, 0.25, 0.25});
    CHECK(d.cte(2.0) == doctest::Approx(3.0)); // (2*.25 + 4*.25) / .5
    CHECK_THROWS_AS(ValueDistribution::point_mass(1.0).cte(2.0), InputError);
    CHECK_THROWS_AS(d.cte(5.0), InputError);
}

TEST_CASE("support enumeration") {
    CHECK(*ValueDistribution::point_mass(1.0).support() == std::vector<double>{1.0});
    auto d = ValueDistribution::discrete({0.4, 1.0}, {2.0 / 3.0, 1.0 / 3.0});
    CHECK(*d.support() == std::vector<double>{0.4, 1.0});
    CHECK_FALSE(ValueDistribution::uniform(0.0, 1.0).support().has_value());
    CHECK_FALSE(ValueDistribution::exponential(1.0).support().has_value());
}

TEST_CASE("empirical CDF tracks the analytic CDF (KS <= 0.02) for every variant") {
    std::uint64_t seed = 1000;
    for (const auto& d : all_variants()) CHECK(ks_statistic(d, 100000, seed++) <= 0.02);
}

TEST_CASE("cte * weak tail recovers the tail expectation") {
    // cte(p) * Pr[v >= p] == E[v 1{v > p}] + p Pr[v = p], which rearranges to
    // the mean identity cte(p) Pr[v >= p] + E[v 1{v < p}] = E[v].
    RngStream rng(99);
    for (const auto& d : all_variants()) {
        for (int rep = 0; rep < 50; ++rep) {
            const double p = rng.uniform01() * 2.0;
            const double weak = d.tail_prob_weak(p);
            if (weak <= 0.0) continue;
            const double lhs = d.cte(p) * weak;
            const double rhs = d.tail_expectation(p) + p * d.atom_prob(p);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
            const double below = d.expected_value() - rhs;
            CHECK(lhs + below == doctest::Approx(d.expected_value()).epsilon(1e-9));
        }
    }
}

TEST_CASE("tail_prob is nonincreasing") {
    RngStream rng(123);
    for (const auto& d : all_variants()) {
        for (int rep = 0; rep < 200; ++rep) {
            double p1 = rng.uniform01() * 3.0;
            double p2 = rng.uniform01() * 3.0;
            if (p1 > p2) std::swap(p1, p2);
            CHECK(d.tail_prob(p1) >= d.tail_prob(p2));
        }
    }
}

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(ValueDistribution::discrete({1.0, 1.0}, {0.5, 0.5}), InputError);
    CHECK_THROWS_AS(ValueDistribution::discrete({1.0, 2.0}, {0.5, 0.4}), InputError);
    CHECK_THROWS_AS(ValueDistribution::uniform(2.0, 1.0), InputError);
    CHECK_THROWS_AS(ValueDistribution::exponential(0.0), InputError);
    CHECK_THROWS_AS(ValueDistribution::point_mass(-1.0), InputError);
}

TEST_CASE("instance wiring") {
    auto sys = FeasibilitySystem::from_maximal_sets(2, {{0}, {1}});
    std::vector<ValueDistribution> ds = {ValueDistribution::point_mass(1.0)};
    CHECK_THROWS_AS(Instance(ds, sys), InputError); // count mismatch
    ds.push_back(ValueDistribution::uniform(0.0, 1.0));
    Instance inst(ds, sys);
    CHECK(inst.n() == 2);
    CHECK_FALSE(inst.all_discrete());
    CHECK(*inst.max_support() == doctest::Approx(1.0));
    RngStream rng(5);
    auto v = inst.sample_valuation(rng);
    CHECK(v.size() == 2);
    CHECK(v[0] == 1.0);
}
