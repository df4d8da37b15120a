#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace clockauct {

/// Raised when user-supplied data (instances, configs, CLI flags) is malformed.
/// Maps to exit code 2 at the CLI boundary.
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a mechanism or caller breaks an internal protocol contract
/// (e.g. offering a bidder a lower price than before). Indicates a bug in the
/// auction code, not bad input. Maps to exit code 3.
class ContractViolation : public std::logic_error {
  public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Raised when an ascending mechanism hits its price cap before terminating.
class AbortError : public std::runtime_error {
  public:
    explicit AbortError(const std::string& what) : std::runtime_error(what) {}
};

using BidderSet = std::vector<int>;      // sorted, unique bidder indices
using Valuation = std::vector<double>;   // one nonnegative value per bidder
using PriceVector = std::vector<double>; // one nonnegative price per bidder

// Slack used when comparing accumulated floating-point demand sums against
// the unit knapsack capacity. Every feasibility route shares this constant.
inline constexpr double kKnapsackEps = 1e-9;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

inline bool is_sorted_unique(const BidderSet& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1]) return false;
    return true;
}

inline BidderSet sorted_unique(BidderSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

/// a \subseteq b for sorted unique sets.
inline bool subset_of(const BidderSet& a, const BidderSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline BidderSet set_intersect(const BidderSet& a, const BidderSet& b) {
    BidderSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline BidderSet set_minus(const BidderSet& a, const BidderSet& b) {
    BidderSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Global tie-break used by every subset-selection routine: higher total
/// weight wins, then larger cardinality, then lexicographically smaller
/// sorted index sequence. Returns true when (wa, a) beats (wb, b).
inline bool beats(double wa, const BidderSet& a, double wb, const BidderSet& b) {
    if (wa != wb) return wa > wb;
    if (a.size() != b.size()) return a.size() > b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace clockauct
