#pragma once

#include <utility>
#include <vector>

#include "clockauct/common.hpp"
#include "clockauct/feasibility.hpp"

namespace clockauct {

/// Optimal-welfare benchmark: argmax over maximal feasible sets of the value
/// sum. Values are nonnegative, so a maximal set always attains the optimum.
/// The cached-sets overload exists so Monte-Carlo loops enumerate knapsack
/// maximal sets once, not per trial.
inline std::pair<BidderSet, double> brute_force_opt(const std::vector<BidderSet>& maximal_sets,
                                                    const Valuation& v) {
    BidderSet best;
    double best_w = -1.0;
    for (const auto& s : maximal_sets) {
        double w = 0.0;
        for (int i : s) w += v[static_cast<std::size_t>(i)];
        if (best_w < 0.0 || beats(w, s, best_w, best)) {
            best_w = w;
            best = s;
        }
    }
    return {best, std::max(best_w, 0.0)};
}

inline std::pair<BidderSet, double> brute_force_opt(const FeasibilitySystem& sys, const Valuation& v) {
    return brute_force_opt(sys.enumerate_maximal_sets(), v);
}

} // namespace clockauct
