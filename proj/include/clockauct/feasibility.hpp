#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "clockauct/common.hpp"

namespace clockauct {

enum class FeasibilityKind { ExplicitMaximalSets, Knapsack };

/// A downward-closed feasibility constraint over bidders 0..n-1, in one of
/// two concrete representations:
///  - ExplicitMaximalSets: an antichain of maximal feasible sets; a set is
///    feasible iff it is contained in one of them.
///  - Knapsack: per-bidder demands c_i in (0,1] against unit capacity; a set
///    is feasible iff its total demand is at most 1.
/// Systems are immutable after construction; all queries are const and safe
/// for concurrent readers.
class FeasibilitySystem {
  public:
    static FeasibilitySystem from_maximal_sets(int n, std::vector<BidderSet> sets) {
        require(n >= 1, "feasibility: n must be >= 1");
        require(!sets.empty(), "feasibility: need at least one maximal set");
        for (auto& s : sets) {
            std::sort(s.begin(), s.end());
            require(is_sorted_unique(s), "feasibility: duplicate index inside a maximal set");
            require(!s.empty(), "feasibility: maximal sets must be nonempty");
            require(s.front() >= 0 && s.back() < n, "feasibility: bidder index out of range [0, n)");
        }
        // Canonical order: size descending, then lexicographic on sorted indices.
        std::sort(sets.begin(), sets.end(), [](const BidderSet& a, const BidderSet& b) {
            if (a.size() != b.size()) return a.size() > b.size();
            return a < b;
        });
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (std::size_t j = 0; j < sets.size(); ++j)
                require(i == j || !subset_of(sets[i], sets[j]),
                        "feasibility: maximal sets must form an antichain");
        std::vector<char> covered(static_cast<std::size_t>(n), 0);
        for (const auto& s : sets)
            for (int i : s) covered[static_cast<std::size_t>(i)] = 1;
        for (int i = 0; i < n; ++i)
            require(covered[static_cast<std::size_t>(i)] != 0,
                    "feasibility: bidder " + std::to_string(i) + " belongs to no feasible set");
        FeasibilitySystem sys;
        sys.kind_ = FeasibilityKind::ExplicitMaximalSets;
        sys.n_ = n;
        sys.maximal_sets_ = std::move(sets);
        return sys;
    }

    static FeasibilitySystem from_knapsack(std::vector<double> demands) {
        require(!demands.empty(), "feasibility: need at least one bidder");
        for (double c : demands)
            require(c > 0.0 && c <= 1.0, "feasibility: knapsack demands must lie in (0, 1]");
        FeasibilitySystem sys;
        sys.kind_ = FeasibilityKind::Knapsack;
        sys.n_ = static_cast<int>(demands.size());
        sys.demands_ = std::move(demands);
        return sys;
    }

    FeasibilityKind kind() const { return kind_; }
    int n() const { return n_; }
    const std::vector<BidderSet>& maximal_sets_explicit() const { return maximal_sets_; }
    const std::vector<double>& demands() const { return demands_; }

    bool is_feasible(const BidderSet& subset) const {
        check_indices(subset);
        if (subset.empty()) return true;
        if (kind_ == FeasibilityKind::ExplicitMaximalSets) {
            for (const auto& s : maximal_sets_)
                if (subset_of(subset, s)) return true;
            return false;
        }
        double total = 0.0;
        for (int i : subset) total += demands_[static_cast<std::size_t>(i)];
        return total <= 1.0 + kKnapsackEps;
    }

    /// The exact antichain of inclusion-maximal feasible sets in canonical
    /// order. For knapsack systems this exhaustively searches all subsets,
    /// so it is capped; larger instances should use the explicit form.
    std::vector<BidderSet> enumerate_maximal_sets(int knapsack_cap = 24) const {
        if (kind_ == FeasibilityKind::ExplicitMaximalSets) return maximal_sets_;
        if (n_ > knapsack_cap)
            throw InputError("feasibility: knapsack maximal-set enumeration capped at n = " +
                             std::to_string(knapsack_cap) +
                             " (got n = " + std::to_string(n_) +
                             "); provide explicit maximal sets instead");
        // A feasible knapsack set is maximal iff no single further bidder fits.
        std::vector<BidderSet> out;
        const std::uint32_t total = 1u << n_;
        for (std::uint32_t mask = 1; mask < total; ++mask) {
            double load = 0.0;
            for (int i = 0; i < n_; ++i)
                if (mask & (1u << i)) load += demands_[static_cast<std::size_t>(i)];
            if (load > 1.0 + kKnapsackEps) continue;
            bool maximal = true;
            for (int i = 0; i < n_ && maximal; ++i)
                if (!(mask & (1u << i)) && load + demands_[static_cast<std::size_t>(i)] <= 1.0 + kKnapsackEps)
                    maximal = false;
            if (!maximal) continue;
            BidderSet s;
            for (int i = 0; i < n_; ++i)
                if (mask & (1u << i)) s.push_back(i);
            out.push_back(std::move(s));
        }
        std::sort(out.begin(), out.end(), [](const BidderSet& a, const BidderSet& b) {
            if (a.size() != b.size()) return a.size() > b.size();
            return a < b;
        });
        return out;
    }

    /// Number of maximal feasible sets (distinct sets; symmetric duplicates
    /// from equal demands are counted separately).
    int k(int knapsack_cap = 24) const {
        if (kind_ == FeasibilityKind::ExplicitMaximalSets)
            return static_cast<int>(maximal_sets_.size());
        return static_cast<int>(enumerate_maximal_sets(knapsack_cap).size());
    }

    /// Feasible subset of `active` maximizing total weight; ties resolved by
    /// the global (weight, cardinality, lexicographic) rule. Weights must be
    /// nonnegative. Exact in both representations: per-maximal-set
    /// intersections for explicit systems, branch-and-bound for knapsack.
    std::pair<BidderSet, double> max_weight_feasible_subset(const BidderSet& active,
                                                            const std::vector<double>& weights) const {
        check_indices(active);
        require(static_cast<int>(weights.size()) == n_, "feasibility: weights length must equal n");
        for (double w : weights) require(w >= 0.0, "feasibility: weights must be nonnegative");
        if (kind_ == FeasibilityKind::ExplicitMaximalSets) {
            BidderSet best;
            double best_w = -1.0;
            for (const auto& s : maximal_sets_) {
                BidderSet cand = set_intersect(s, active);
                double w = 0.0;
                for (int i : cand) w += weights[static_cast<std::size_t>(i)];
                if (best_w < 0.0 || beats(w, cand, best_w, best)) {
                    best_w = w;
                    best = std::move(cand);
                }
            }
            return {best, std::max(best_w, 0.0)};
        }
        return knapsack_branch_and_bound(active, weights);
    }

    /// Maximum-cardinality feasible subset of `active` (unit weights).
    BidderSet largest_feasible_subset(const BidderSet& active) const {
        std::vector<double> unit(static_cast<std::size_t>(n_), 1.0);
        return max_weight_feasible_subset(active, unit).first;
    }

  private:
    void check_indices(const BidderSet& subset) const {
        require(is_sorted_unique(subset), "feasibility: subsets must be sorted and duplicate-free");
        for (int i : subset)
            require(i >= 0 && i < n_, "feasibility: bidder index out of range [0, n)");
    }

    /// Depth-first search in index order, include-branch first, pruned by a
    /// fractional relaxation bound. Exploring ties (bound == incumbent) is
    /// required so the cardinality/lexicographic tie-break stays exact; the
    /// first solution found within a (weight, cardinality) class is already
    /// the lexicographically smallest one reachable.
    std::pair<BidderSet, double> knapsack_branch_and_bound(const BidderSet& active,
                                                           const std::vector<double>& weights) const {
        const std::size_t m = active.size();
        std::vector<double> dem(m), wt(m);
        for (std::size_t j = 0; j < m; ++j) {
            dem[j] = demands_[static_cast<std::size_t>(active[j])];
            wt[j] = weights[static_cast<std::size_t>(active[j])];
        }
        // suffix[j] = items j.. sorted by density, for the fractional bound
        std::vector<std::vector<std::size_t>> suffix_order(m + 1);
        for (std::size_t j = 0; j <= m; ++j) {
            std::vector<std::size_t> idx;
            for (std::size_t t = j; t < m; ++t) idx.push_back(t);
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return wt[a] * dem[b] > wt[b] * dem[a];
            });
            suffix_order[j] = std::move(idx);
        }
        BidderSet best;
        double best_w = -1.0;
        BidderSet cur;
        auto fractional_bound = [&](std::size_t j, double load) {
            double cap = 1.0 + kKnapsackEps - load;
            double b = 0.0;
            for (std::size_t t : suffix_order[j]) {
                if (cap <= 0.0) break;
                if (dem[t] <= cap) {
                    b += wt[t];
                    cap -= dem[t];
                } else {
                    b += wt[t] * (cap / dem[t]);
                    cap = 0.0;
                }
            }
            return b;
        };
        auto dfs = [&](auto&& self, std::size_t j, double cur_w, double load) -> void {
            if (best_w >= 0.0 && cur_w + fractional_bound(j, load) < best_w) return;
            if (j == m) {
                if (best_w < 0.0 || beats(cur_w, cur, best_w, best)) {
                    best_w = cur_w;
                    best = cur;
                }
                return;
            }
            if (load + dem[j] <= 1.0 + kKnapsackEps) {
                cur.push_back(active[j]);
                self(self, j + 1, cur_w + wt[j], load + dem[j]);
                cur.pop_back();
            }
            self(self, j + 1, cur_w, load);
        };
        dfs(dfs, 0, 0.0, 0.0);
        return {best, std::max(best_w, 0.0)};
    }

    FeasibilityKind kind_ = FeasibilityKind::ExplicitMaximalSets;
    int n_ = 0;
    std::vector<BidderSet> maximal_sets_;
    std::vector<double> demands_;
};

inline bool is_feasible(const FeasibilitySystem& sys, const BidderSet& subset) {
    return sys.is_feasible(subset);
}

inline BidderSet all_bidders(int n) {
    BidderSet s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
}

} // namespace clockauct
