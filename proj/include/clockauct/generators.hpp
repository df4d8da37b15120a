#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "clockauct/common.hpp"
#include "clockauct/evaluation.hpp"
#include "clockauct/feasibility.hpp"
#include "clockauct/rng.hpp"
#include "clockauct/valuation.hpp"

namespace clockauct {

/// k disjoint groups of `set_size` i.i.d. Uniform(0,1) bidders.
inline Instance make_disjoint_iid_uniform(int k, int set_size = 8) {
    require(k >= 1 && set_size >= 1, "generator: k and set_size must be >= 1");
    const int n = k * set_size;
    std::vector<BidderSet> sets;
    sets.reserve(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
        BidderSet g;
        for (int i = 0; i < set_size; ++i) g.push_back(s * set_size + i);
        sets.push_back(std::move(g));
    }
    std::vector<ValueDistribution> dists(static_cast<std::size_t>(n),
                                         ValueDistribution::uniform(0.0, 1.0));
    return Instance(std::move(dists), FeasibilitySystem::from_maximal_sets(n, std::move(sets)),
                    "disjoint-iid-uniform-k" + std::to_string(k));
}

/// k disjoint groups of deterministic (point-mass) bidders with values drawn
/// once from the stream: deterministic instances with nontrivial structure.
inline Instance make_pointmass_family(int k, int set_size, std::uint64_t seed) {
    require(k >= 1 && set_size >= 1, "generator: k and set_size must be >= 1");
    const int n = k * set_size;
    RngStream rng = derive_stream(seed, 0x9d);
    std::vector<BidderSet> sets;
    for (int s = 0; s < k; ++s) {
        BidderSet g;
        for (int i = 0; i < set_size; ++i) g.push_back(s * set_size + i);
        sets.push_back(std::move(g));
    }
    std::vector<ValueDistribution> dists;
    dists.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        dists.push_back(ValueDistribution::point_mass(std::floor(rng.uniform01() * 100.0) / 100.0));
    return Instance(std::move(dists), FeasibilitySystem::from_maximal_sets(n, std::move(sets)),
                    "pointmass-k" + std::to_string(k));
}

namespace detail {

/// Random antichain covering all n bidders, never more than k_max sets: up
/// to k_max - 1 random sets (deduplicated, dominated ones dropped) plus one
/// disjoint set of the leftover uncovered bidders.
inline std::vector<BidderSet> random_antichain(int n, int k_max, RngStream& rng) {
    std::vector<BidderSet> sets;
    const int attempts = std::max(k_max - 1, 1);
    for (int a = 0; a < attempts; ++a) {
        BidderSet s;
        for (int i = 0; i < n; ++i)
            if (rng.uniform01() < 0.4) s.push_back(i);
        if (s.empty()) s.push_back(static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n)));
        sets.push_back(std::move(s));
    }
    std::vector<BidderSet> maximal;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < sets.size() && !dominated; ++j) {
            if (i == j) continue;
            if (sets[i] == sets[j] && j < i) dominated = true;
            else if (sets[i] != sets[j] && subset_of(sets[i], sets[j])) dominated = true;
        }
        if (!dominated) maximal.push_back(sets[i]);
    }
    BidderSet uncovered;
    std::vector<char> covered(static_cast<std::size_t>(n), 0);
    for (const auto& s : maximal)
        for (int i : s) covered[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n; ++i)
        if (!covered[static_cast<std::size_t>(i)]) uncovered.push_back(i);
    if (!uncovered.empty()) maximal.push_back(std::move(uncovered));
    return maximal;
}

inline ValueDistribution random_distribution(RngStream& rng, bool bounded_only) {
    // Atoms land on a coarse lattice so auto grid steps stay reasonable.
    auto lattice = [&](double lo, double hi) {
        double raw = lo + rng.uniform01() * (hi - lo);
        return std::max(lo, std::round(raw * 4.0) / 4.0);
    };
    const double u = rng.uniform01();
    if (u < 0.3) return ValueDistribution::point_mass(lattice(0.0, 2.0));
    if (u < 0.6) {
        double a = lattice(0.0, 1.0);
        double b = a + std::max(0.25, lattice(0.25, 1.5));
        return ValueDistribution::uniform(a, b);
    }
    if (u < 0.9 || bounded_only) {
        const int atoms = 2 + static_cast<int>(rng.next_u64() % 2);
        std::vector<double> values;
        double v = lattice(0.0, 0.75);
        for (int i = 0; i < atoms; ++i) {
            values.push_back(v);
            v += std::max(0.25, lattice(0.25, 1.0));
        }
        std::vector<double> probs(static_cast<std::size_t>(atoms));
        double rem = 1.0;
        for (int i = 0; i < atoms - 1; ++i) {
            probs[static_cast<std::size_t>(i)] = rem * (0.2 + 0.6 * rng.uniform01());
            rem -= probs[static_cast<std::size_t>(i)];
        }
        probs[static_cast<std::size_t>(atoms - 1)] = rem;
        return ValueDistribution::discrete(std::move(values), std::move(probs));
    }
    return ValueDistribution::exponential(1.0 + rng.uniform01());
}

} // namespace detail

/// Random downward-closed instance: explicit antichain or knapsack, with a
/// mix of value distributions. Used by the property suites.
inline Instance make_mixed_random(int n, std::uint64_t seed, bool bounded_only = false) {
    require(n >= 1, "generator: n must be >= 1");
    RngStream rng = derive_stream(seed, 0x3c);
    FeasibilitySystem sys = [&] {
        if (rng.uniform01() < 0.5) {
            return FeasibilitySystem::from_maximal_sets(n, detail::random_antichain(n, 6, rng));
        }
        std::vector<double> demands(static_cast<std::size_t>(n));
        for (auto& c : demands) c = 0.15 + 0.85 * rng.uniform01();
        return FeasibilitySystem::from_knapsack(std::move(demands));
    }();
    std::vector<ValueDistribution> dists;
    dists.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) dists.push_back(detail::random_distribution(rng, bounded_only));
    return Instance(std::move(dists), std::move(sys), "mixed-random-n" + std::to_string(n));
}

/// Random instance with binary {0,1} values and a random antichain of at
/// most k_max maximal sets.
inline Instance make_binary_random(int n, int k_max, std::uint64_t seed) {
    require(n >= 1, "generator: n must be >= 1");
    RngStream rng = derive_stream(seed, 0xb1);
    auto sets = detail::random_antichain(n, k_max, rng);
    std::vector<ValueDistribution> dists;
    dists.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double q = 0.2 + 0.6 * rng.uniform01(); // P[v = 1]
        dists.push_back(ValueDistribution::discrete({0.0, 1.0}, {1.0 - q, q}));
    }
    return Instance(std::move(dists), FeasibilitySystem::from_maximal_sets(n, std::move(sets)),
                    "binary-random-n" + std::to_string(n));
}

/// Random knapsack instance with uniform-value bidders.
inline Instance make_knapsack_random(int n, std::uint64_t seed) {
    require(n >= 1, "generator: n must be >= 1");
    RngStream rng = derive_stream(seed, 0x6b);
    std::vector<double> demands(static_cast<std::size_t>(n));
    for (auto& c : demands) c = 0.15 + 0.85 * rng.uniform01();
    std::vector<ValueDistribution> dists(static_cast<std::size_t>(n),
                                         ValueDistribution::uniform(0.0, 1.0));
    return Instance(std::move(dists), FeasibilitySystem::from_knapsack(std::move(demands)),
                    "knapsack-random-n" + std::to_string(n));
}

/// Random discrete instance with support size at most `max_support` per
/// bidder (exact joint enumeration stays cheap for small n).
inline Instance make_discrete_random(int n, int max_support, std::uint64_t seed) {
    require(n >= 1 && max_support >= 1, "generator: n and max_support must be >= 1");
    RngStream rng = derive_stream(seed, 0xd5);
    auto sets = detail::random_antichain(n, 5, rng);
    if (sets.size() < 2 && n >= 2) {
        // force k >= 2 so log-based thresholds stay meaningful
        sets.assign(2, BidderSet{});
        for (int i = 0; i < n; ++i) (i % 2 == 0 ? sets[0] : sets[1]).push_back(i);
    }
    std::vector<ValueDistribution> dists;
    dists.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int atoms = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_support));
        if (atoms == 1) {
            dists.push_back(ValueDistribution::point_mass(std::round(rng.uniform01() * 8.0) / 4.0));
            continue;
        }
        std::vector<double> values;
        double v = std::round(rng.uniform01() * 4.0) / 4.0;
        for (int a = 0; a < atoms; ++a) {
            values.push_back(v);
            v += 0.25 + std::round(rng.uniform01() * 4.0) / 4.0;
        }
        std::vector<double> probs(static_cast<std::size_t>(atoms));
        double rem = 1.0;
        for (int a = 0; a < atoms - 1; ++a) {
            probs[static_cast<std::size_t>(a)] = rem * (0.2 + 0.6 * rng.uniform01());
            rem -= probs[static_cast<std::size_t>(a)];
        }
        probs[static_cast<std::size_t>(atoms - 1)] = rem;
        dists.push_back(ValueDistribution::discrete(std::move(values), std::move(probs)));
    }
    return Instance(std::move(dists), FeasibilitySystem::from_maximal_sets(n, std::move(sets)),
                    "discrete-random-n" + std::to_string(n));
}

/// Named generator dispatch used by the CLI; `k` parameterizes family size.
inline Instance make_named_instance(const std::string& name, int k, std::uint64_t seed,
                                    int set_size = 8) {
    if (name == "disjoint-iid-uniform") return make_disjoint_iid_uniform(std::max(k, 1), set_size);
    if (name == "pointmass") return make_pointmass_family(std::max(k, 1), set_size, seed);
    if (name == "binary-random") return make_binary_random(std::max(2 * k, 4), std::max(k, 2), seed);
    if (name == "knapsack-random") return make_knapsack_random(std::max(k, 2), seed);
    if (name == "mixed-random") return make_mixed_random(std::max(k, 2), seed);
    if (name == "lowerbound") return lower_bound_instance();
    throw InputError("unknown generator '" + name +
                     "' (try disjoint-iid-uniform, pointmass, binary-random, knapsack-random, "
                     "mixed-random, lowerbound)");
}

} // namespace clockauct
