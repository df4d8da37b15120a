#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clockauct/common.hpp"
#include "clockauct/feasibility.hpp"
#include "clockauct/valuation.hpp"

namespace clockauct {

/// One clock round: the prices offered to a subset of the active bidders (in
/// processing order) with each bidder's accept/reject response, and the
/// active set after the round.
struct RoundRecord {
    std::vector<int> bidders;
    std::vector<double> prices;
    std::vector<char> accepted;
    BidderSet active_after;
};

/// Complete, sealed record of one auction run.
struct Transcript {
    int n = 0;
    std::vector<RoundRecord> rounds;
    BidderSet served;
    std::vector<double> payments;
    std::map<int, double> revealed_values;          // bidders whose drop exposed their value
    std::vector<std::pair<std::string, std::string>> meta; // mechanism-specific annotations

    double welfare(const Valuation& v) const {
        double w = 0.0;
        for (int i : served) w += v[static_cast<std::size_t>(i)];
        return w;
    }

    double revenue() const {
        double r = 0.0;
        for (double p : payments) r += p;
        return r;
    }

    void annotate(std::string key, std::string value) {
        meta.emplace_back(std::move(key), std::move(value));
    }

    const std::string* find_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return &v;
        return nullptr;
    }
};

/// The clock-auction state machine. Clocks start at 0 (which every truthful
/// bidder with a nonnegative value accepts implicitly), rise monotonically
/// per bidder, and responses are simulated truthfully: a bidder drops exactly
/// when the offered price exceeds her value. Mechanisms drive this machine
/// and must never lower a bidder's clock; doing so throws ContractViolation.
class AuctionState {
  public:
    AuctionState(const FeasibilitySystem& sys, const Valuation& valuation)
        : sys_(&sys), valuation_(valuation) {
        check_valuation(valuation, sys.n());
        const int n = sys.n();
        active_.assign(static_cast<std::size_t>(n), 1);
        last_offered_.assign(static_cast<std::size_t>(n), 0.0);
        last_accepted_.assign(static_cast<std::size_t>(n), 0.0);
        transcript_.n = n;
    }

    int n() const { return sys_->n(); }
    bool is_active(int i) const { return active_[static_cast<std::size_t>(i)] != 0; }
    double last_offered(int i) const { return last_offered_[static_cast<std::size_t>(i)]; }

    BidderSet active_set() const {
        BidderSet a;
        for (int i = 0; i < n(); ++i)
            if (is_active(i)) a.push_back(i);
        return a;
    }

    /// Offers `offers[j] = (bidder, price)` sequentially in list order.
    /// Returns the per-offer accept flags. Offering an inactive bidder or a
    /// price below the bidder's current clock is a contract violation.
    std::vector<char> offer_round(const std::vector<std::pair<int, double>>& offers) {
        RoundRecord rec;
        rec.bidders.reserve(offers.size());
        rec.prices.reserve(offers.size());
        rec.accepted.reserve(offers.size());
        for (const auto& [i, p] : offers) {
            if (i < 0 || i >= n()) throw ContractViolation("engine: offer to bidder index out of range");
            if (!is_active(i)) throw ContractViolation("engine: offer to inactive bidder " + std::to_string(i));
            if (!(p >= 0.0)) throw ContractViolation("engine: negative or NaN price offered");
            if (p < last_offered_[static_cast<std::size_t>(i)])
                throw ContractViolation("engine: clock price decreased for bidder " + std::to_string(i));
            last_offered_[static_cast<std::size_t>(i)] = p;
            const bool accept = p <= valuation_[static_cast<std::size_t>(i)];
            if (accept) {
                last_accepted_[static_cast<std::size_t>(i)] = p;
            } else {
                active_[static_cast<std::size_t>(i)] = 0;
            }
            rec.bidders.push_back(i);
            rec.prices.push_back(p);
            rec.accepted.push_back(accept ? 1 : 0);
        }
        rec.active_after = active_set();
        transcript_.rounds.push_back(std::move(rec));
        return transcript_.rounds.back().accepted;
    }

    /// Uniform-price convenience: offers `price` to every active bidder,
    /// one at a time in ascending index order.
    std::vector<char> offer_uniform(double price) {
        std::vector<std::pair<int, double>> offers;
        for (int i = 0; i < n(); ++i)
            if (is_active(i)) offers.emplace_back(i, price);
        return offer_round(offers);
    }

    /// Same, processed in the caller's bidder order.
    std::vector<char> offer_uniform(double price, const std::vector<int>& order) {
        std::vector<std::pair<int, double>> offers;
        for (int i : order)
            if (is_active(i)) offers.emplace_back(i, price);
        return offer_round(offers);
    }

    /// Marks a dropped bidder's exact value as publicly revealed (sampling
    /// auction bookkeeping; the engine itself never leaks values).
    void reveal_value(int i) {
        transcript_.revealed_values[i] = valuation_[static_cast<std::size_t>(i)];
    }

    /// Records a learned value estimate instead (grid-quantized reveals).
    void reveal_value(int i, double learned) { transcript_.revealed_values[i] = learned; }

    /// Seals the run: serves `served` at each bidder's last accepted price,
    /// everyone else pays nothing.
    Transcript finalize(const BidderSet& served) {
        for (int i : served) {
            if (!is_active(i))
                throw ContractViolation("engine: cannot serve dropped bidder " + std::to_string(i));
        }
        if (!sys_->is_feasible(served))
            throw ContractViolation("engine: served set is not feasible");
        transcript_.served = served;
        transcript_.payments.assign(static_cast<std::size_t>(n()), 0.0);
        for (int i : served)
            transcript_.payments[static_cast<std::size_t>(i)] = last_accepted_[static_cast<std::size_t>(i)];
        return std::move(transcript_);
    }

    const FeasibilitySystem& system() const { return *sys_; }
    const Valuation& valuation() const { return valuation_; }

  private:
    const FeasibilitySystem* sys_;
    Valuation valuation_;
    std::vector<char> active_;
    std::vector<double> last_offered_;
    std::vector<double> last_accepted_;
    Transcript transcript_;
};

inline double welfare(const Transcript& t, const Valuation& v) { return t.welfare(v); }
inline double revenue(const Transcript& t) { return t.revenue(); }

/// Replays a sealed transcript against the valuation and feasibility system
/// it was produced from, returning every violated invariant (empty = clean):
/// monotone per-bidder clocks, truthful responses, feasible served set,
/// served within the final active set, last-accepted-price payments, and
/// individual rationality.
inline std::vector<std::string> check_transcript(const Transcript& t,
                                                 const FeasibilitySystem& sys,
                                                 const Valuation& v) {
    std::vector<std::string> bad;
    const int n = t.n;
    if (n != sys.n()) {
        bad.push_back("transcript n mismatch");
        return bad;
    }
    std::vector<double> clock(static_cast<std::size_t>(n), 0.0);
    std::vector<double> last_accepted(static_cast<std::size_t>(n), 0.0);
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    for (std::size_t r = 0; r < t.rounds.size(); ++r) {
        const auto& rec = t.rounds[r];
        for (std::size_t j = 0; j < rec.bidders.size(); ++j) {
            const int i = rec.bidders[j];
            const double p = rec.prices[j];
            if (!active[static_cast<std::size_t>(i)])
                bad.push_back("round " + std::to_string(r) + ": offer to inactive bidder " + std::to_string(i));
            if (p < clock[static_cast<std::size_t>(i)])
                bad.push_back("round " + std::to_string(r) + ": clock decreased for bidder " + std::to_string(i));
            clock[static_cast<std::size_t>(i)] = p;
            const bool should_accept = p <= v[static_cast<std::size_t>(i)];
            const bool did_accept = rec.accepted[j] != 0;
            if (should_accept != did_accept)
                bad.push_back("round " + std::to_string(r) + ": untruthful response from bidder " + std::to_string(i));
            if (did_accept)
                last_accepted[static_cast<std::size_t>(i)] = p;
            else
                active[static_cast<std::size_t>(i)] = 0;
        }
    }
    for (int i : t.served) {
        if (!active[static_cast<std::size_t>(i)])
            bad.push_back("served bidder " + std::to_string(i) + " is not in the final active set");
        if (t.payments[static_cast<std::size_t>(i)] != last_accepted[static_cast<std::size_t>(i)])
            bad.push_back("payment of served bidder " + std::to_string(i) + " is not the last accepted price");
        if (t.payments[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i)])
            bad.push_back("payment of bidder " + std::to_string(i) + " exceeds value (IR violation)");
    }
    std::vector<char> in_served(static_cast<std::size_t>(n), 0);
    for (int i : t.served) in_served[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n; ++i)
        if (!in_served[static_cast<std::size_t>(i)] && t.payments[static_cast<std::size_t>(i)] != 0.0)
            bad.push_back("unserved bidder " + std::to_string(i) + " pays nonzero");
    if (!sys.is_feasible(t.served)) bad.push_back("served set is infeasible");
    return bad;
}

} // namespace clockauct
