#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "clockauct/bayes.hpp"
#include "clockauct/common.hpp"
#include "clockauct/engine.hpp"
#include "clockauct/feasibility.hpp"
#include "clockauct/rng.hpp"
#include "clockauct/valuation.hpp"

namespace clockauct {

/// Thrown when an ascending mechanism would exceed its price cap (only
/// possible with unbounded supports or a user-set cap). Carries the partial
/// transcript accumulated so far.
class MechanismAbort : public AbortError {
  public:
    MechanismAbort(const std::string& what, Transcript partial)
        : AbortError(what), partial_transcript(std::move(partial)) {}
    Transcript partial_transcript;
};

struct MechanismConfig {
    double delta_step = 0.0; // uniform ascending increment; 0 = auto
    double epsilon = 0.0;    // water-filling grid step; 0 = auto
    double price_cap = 0.0;  // 0 = auto (top of bounded support, else 1e6)
    std::uint64_t seed = 0;
    bool sampling_grid = false; // quantize sampling-auction reveals to the grid
    double goal_override = -1.0; // >= 0 replaces g; +inf disables the goal exit
    std::vector<int> bidder_order; // within-round offer order; empty = ascending
};

struct ResolvedMechanismConfig {
    double delta_step = 0.0;
    double epsilon = 0.0;
    double price_cap = 0.0;
    std::uint64_t seed = 0;
    bool sampling_grid = false;
    double goal_override = -1.0;
    std::vector<int> bidder_order; // always a full permutation after resolve

    /// Cap test with an ulp-scale tolerance: grid points are products
    /// step * count and may differ from the cap by rounding noise.
    bool over_cap(double price) const {
        return price > price_cap + 1e-9 * std::max(1.0, price_cap);
    }
};

/// Auto steps are 0.01 times the smallest positive gap between consecutive
/// support atoms (1 when no such gap exists, e.g. continuous or point-mass
/// priors). The cap sits one step above the top of a bounded support.
inline ResolvedMechanismConfig resolve_config(const MechanismConfig& cfg, const Instance& inst) {
    ResolvedMechanismConfig r;
    double min_gap = 0.0;
    for (const auto& d : inst.distributions) {
        auto sup = d.support();
        if (!sup) continue;
        for (std::size_t i = 1; i < sup->size(); ++i) {
            double gap = (*sup)[i] - (*sup)[i - 1];
            if (gap > 0.0 && (min_gap == 0.0 || gap < min_gap)) min_gap = gap;
        }
    }
    const double base = min_gap > 0.0 ? min_gap : 1.0;
    r.delta_step = cfg.delta_step > 0.0 ? cfg.delta_step : 0.01 * base;
    r.epsilon = cfg.epsilon > 0.0 ? cfg.epsilon : 0.01 * base;
    if (cfg.price_cap > 0.0) {
        r.price_cap = cfg.price_cap;
    } else {
        auto ms = inst.max_support();
        r.price_cap = ms ? *ms + std::max(r.delta_step, r.epsilon) : 1e6;
    }
    auto ms = inst.max_support();
    require(!ms || r.price_cap >= *ms, "config: price cap below the top of a bounded support");
    r.seed = cfg.seed;
    r.sampling_grid = cfg.sampling_grid;
    r.goal_override = cfg.goal_override;
    if (cfg.bidder_order.empty()) {
        r.bidder_order = all_bidders(inst.n());
    } else {
        require(static_cast<int>(cfg.bidder_order.size()) == inst.n() &&
                    sorted_unique(cfg.bidder_order) == all_bidders(inst.n()),
                "config: bidder_order must be a permutation of 0..n-1");
        r.bidder_order = cfg.bidder_order;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Single-price clock auctions (one offer per bidder, deferred selection)
// ---------------------------------------------------------------------------

enum class SinglePriceSelection { MaxPriceWeight, FixedPreferredSet };

inline Transcript run_single_price(const FeasibilitySystem& sys, const Valuation& valuation,
                                   const PriceVector& prices, SinglePriceSelection selection,
                                   const BidderSet& preferred = {}) {
    require(static_cast<int>(prices.size()) == sys.n(), "single_price: one price per bidder");
    for (double p : prices) require(p >= 0.0, "single_price: prices must be nonnegative");
    if (selection == SinglePriceSelection::FixedPreferredSet)
        require(sys.is_feasible(preferred), "single_price: preferred set must be feasible");
    AuctionState st(sys, valuation);
    std::vector<std::pair<int, double>> offers;
    offers.reserve(prices.size());
    for (int i = 0; i < sys.n(); ++i) offers.emplace_back(i, prices[static_cast<std::size_t>(i)]);
    st.offer_round(offers);
    const BidderSet accepters = st.active_set();
    BidderSet served;
    if (selection == SinglePriceSelection::MaxPriceWeight) {
        served = sys.max_weight_feasible_subset(accepters, prices).first;
    } else {
        served = set_intersect(preferred, accepters);
    }
    Transcript t = st.finalize(served);
    t.annotate("mechanism", "single_price");
    return t;
}

/// One fully-specified single-price auction together with its estimated
/// objective (expected welfare for the price ladders, expected revenue for
/// the bounded-support construction).
struct SinglePriceCandidate {
    std::string label;
    PriceVector prices;
    SinglePriceSelection selection = SinglePriceSelection::MaxPriceWeight;
    BidderSet preferred;
    Estimate objective;
};

/// A selected-candidate auction: the argmax candidate plus the full list.
struct CandidateAuction {
    std::vector<SinglePriceCandidate> candidates;
    std::size_t chosen = 0;

    const SinglePriceCandidate& best() const { return candidates[chosen]; }

    Transcript run(const FeasibilitySystem& sys, const Valuation& valuation) const {
        const auto& c = candidates[chosen];
        Transcript t = run_single_price(sys, valuation, c.prices, c.selection, c.preferred);
        t.annotate("candidate", c.label);
        return t;
    }
};

namespace detail {

/// Expected welfare of a single-price auction, as a pure statistic of the
/// sampled valuation (matches the engine's accept rule p <= v).
inline Estimate single_price_expected_welfare(const Instance& inst, const PriceVector& prices,
                                              SinglePriceSelection sel, const BidderSet& preferred,
                                              long trials, std::uint64_t seed) {
    auto stat = [&](const Valuation& v) {
        BidderSet accepters;
        for (int i = 0; i < inst.n(); ++i)
            if (prices[static_cast<std::size_t>(i)] <= v[static_cast<std::size_t>(i)]) accepters.push_back(i);
        BidderSet served = sel == SinglePriceSelection::MaxPriceWeight
                               ? inst.feasibility.max_weight_feasible_subset(accepters, prices).first
                               : set_intersect(preferred, accepters);
        double w = 0.0;
        for (int i : served) w += v[static_cast<std::size_t>(i)];
        return w;
    };
    return estimate_expectation(inst, stat, trials, seed);
}

/// argmax_S sum_{i in S} E[v_i] under the global tie-break.
inline std::pair<BidderSet, double> best_expected_set(const Instance& inst,
                                                      const std::vector<BidderSet>& maximal_sets) {
    BidderSet best;
    double best_w = -1.0;
    for (const auto& s : maximal_sets) {
        double w = 0.0;
        for (int i : s) w += inst.distributions[static_cast<std::size_t>(i)].expected_value();
        if (best_w < 0.0 || beats(w, s, best_w, best)) {
            best_w = w;
            best = s;
        }
    }
    return {best, std::max(best_w, 0.0)};
}

/// Candidate list of the ladder construction: the zero-price auction that
/// serves the best expected set, plus uniform prices delta * 2^(1-j) for
/// j = 0..ceil(log2 m), selected by estimated expected welfare.
inline CandidateAuction build_ladder_auction(const Instance& inst,
                                             const std::vector<BidderSet>& maximal_sets,
                                             double delta, long m, long trials, std::uint64_t seed) {
    require(m >= 1, "ladder: m must be >= 1");
    CandidateAuction out;
    auto [zero_set, zero_welfare] = best_expected_set(inst, maximal_sets);
    SinglePriceCandidate zero;
    zero.label = "zero_price";
    zero.prices.assign(static_cast<std::size_t>(inst.n()), 0.0);
    zero.selection = SinglePriceSelection::FixedPreferredSet;
    zero.preferred = zero_set;
    zero.objective = Estimate{zero_welfare, 0.0, 1, true}; // price 0 is always accepted
    out.candidates.push_back(std::move(zero));
    if (delta > 0.0) {
        long levels = 0;
        while ((1L << levels) < m) ++levels; // ceil(log2 m)
        for (long j = 0; j <= levels; ++j) {
            SinglePriceCandidate c;
            c.label = "uniform_j" + std::to_string(j);
            const double price = delta * std::pow(2.0, 1.0 - static_cast<double>(j));
            c.prices.assign(static_cast<std::size_t>(inst.n()), price);
            c.selection = SinglePriceSelection::MaxPriceWeight;
            c.objective = single_price_expected_welfare(inst, c.prices, c.selection, {}, trials,
                                                        derive_stream(seed, static_cast<std::uint64_t>(j)).next_u64());
            out.candidates.push_back(std::move(c));
        }
    }
    out.chosen = 0;
    for (std::size_t i = 1; i < out.candidates.size(); ++i)
        if (out.candidates[i].objective.value > out.candidates[out.chosen].objective.value) out.chosen = i;
    return out;
}

} // namespace detail

/// The theorem1 single-price auction: zero prices or a uniform price from
/// the ladder delta * 2^(1-j), whichever has the highest estimated expected
/// welfare, with delta the high-core constant and m = 10 log2 k + 1.
inline CandidateAuction run_theorem1_auction(const Instance& inst, const BayesParams& bayes,
                                             long trials, std::uint64_t seed) {
    return detail::build_ladder_auction(inst, bayes.maximal_sets, bayes.delta.value, bayes.m, trials,
                                        seed);
}

/// The alternative parameterization: delta = OPT, m = r (the largest feasible
/// set size), thresholds pinned at zero.
inline CandidateAuction run_theorem1_variant_r(const Instance& inst, double opt_estimate,
                                               long trials, std::uint64_t seed) {
    auto sets = inst.feasibility.enumerate_maximal_sets();
    std::size_t r = 1;
    for (const auto& s : sets) r = std::max(r, s.size());
    return detail::build_ladder_auction(inst, sets, opt_estimate, static_cast<long>(r), trials, seed);
}

// ---------------------------------------------------------------------------
// Mechanism 2: uniform ascending clock with limited information
// ---------------------------------------------------------------------------

/// Uniform-price ascending auction using only per-bidder expectations and the
/// OPT estimate. Either serves the best expected set at price zero (when its
/// expectation already reaches OPT / log2 log2 k), or sweeps a uniform price
/// upward until the active set is feasible or some feasible subset reaches
/// the revenue goal g. Exactly one exit reason is recorded in the transcript
/// meta ("exit" = "zero_price" | "feasible" | "goal").
inline Transcript run_mechanism2(const Instance& inst, const BayesParams& bayes,
                                 const Valuation& valuation, const MechanismConfig& config) {
    const ResolvedMechanismConfig cfg = resolve_config(config, inst);
    const int k = static_cast<int>(bayes.maximal_sets.size());
    auto [best_set, best_expectation] = detail::best_expected_set(inst, bayes.maximal_sets);
    const double loglog = k > 2 ? std::log2(std::log2(static_cast<double>(k))) : 1.0;
    AuctionState st(inst.feasibility, valuation);
    if (best_expectation >= bayes.opt.value / loglog) {
        st.offer_uniform(0.0, cfg.bidder_order);
        Transcript t = st.finalize(best_set);
        t.annotate("mechanism", "mechanism2");
        t.annotate("exit", "zero_price");
        return t;
    }
    const double g = cfg.goal_override >= 0.0 ? cfg.goal_override : bayes.goal;
    const double delta = cfg.delta_step;
    long step = 0;
    for (;;) {
        ++step;
        const double p = static_cast<double>(step) * delta;
        if (cfg.over_cap(p))
            throw MechanismAbort("mechanism2: price " + std::to_string(p) + " exceeded cap " +
                                     std::to_string(cfg.price_cap) + " before termination",
                                 st.finalize(BidderSet{}));
        st.offer_uniform(p, cfg.bidder_order);
        const BidderSet active = st.active_set();
        if (inst.feasibility.is_feasible(active)) {
            Transcript t = st.finalize(active);
            t.annotate("mechanism", "mechanism2");
            t.annotate("exit", "feasible");
            t.annotate("goal", std::to_string(g));
            return t;
        }
        const BidderSet f = inst.feasibility.largest_feasible_subset(active);
        if (static_cast<double>(f.size()) * p >= g) {
            Transcript t = st.finalize(f);
            t.annotate("mechanism", "mechanism2");
            t.annotate("exit", "goal");
            t.annotate("goal", std::to_string(g));
            return t;
        }
    }
}

// ---------------------------------------------------------------------------
// Prior-free auctions: WFCA, sampling, hedging
// ---------------------------------------------------------------------------

/// Water-filling clock auction: while the active set is infeasible, the
/// cheapest conditional losers get their clocks raised by epsilon; bidders
/// priced past their value drop. Serves the active set once feasible, at the
/// standing prices. Prices are tracked as integer multiples of epsilon.
inline Transcript run_wfca(const FeasibilitySystem& sys, const Valuation& valuation,
                           const ResolvedMechanismConfig& cfg) {
    require(cfg.epsilon > 0.0, "wfca: epsilon must be positive");
    AuctionState st(sys, valuation);
    const int n = sys.n();
    const std::vector<int> order = cfg.bidder_order.empty() ? all_bidders(n) : cfg.bidder_order;
    std::vector<long> level(static_cast<std::size_t>(n), 0);
    std::vector<double> prices(static_cast<std::size_t>(n), 0.0);
    for (;;) {
        const BidderSet active = st.active_set();
        if (sys.is_feasible(active)) break;
        const BidderSet winners = sys.max_weight_feasible_subset(active, prices).first;
        const BidderSet losers = set_minus(active, winners);
        if (losers.empty())
            throw ContractViolation("wfca: infeasible active set with no conditional losers");
        long min_level = level[static_cast<std::size_t>(losers.front())];
        for (int i : losers) min_level = std::min(min_level, level[static_cast<std::size_t>(i)]);
        std::vector<std::pair<int, double>> offers;
        const double next_price = static_cast<double>(min_level + 1) * cfg.epsilon;
        if (cfg.over_cap(next_price))
            throw MechanismAbort("wfca: price " + std::to_string(next_price) + " exceeded cap " +
                                     std::to_string(cfg.price_cap),
                                 st.finalize(BidderSet{}));
        std::vector<char> is_loser(static_cast<std::size_t>(n), 0);
        for (int i : losers) is_loser[static_cast<std::size_t>(i)] = 1;
        for (int i : order)
            if (is_loser[static_cast<std::size_t>(i)] && level[static_cast<std::size_t>(i)] == min_level)
                offers.emplace_back(i, next_price);
        const auto responses = st.offer_round(offers);
        for (std::size_t j = 0; j < offers.size(); ++j) {
            const int i = offers[j].first;
            if (responses[j]) {
                level[static_cast<std::size_t>(i)] = min_level + 1;
                prices[static_cast<std::size_t>(i)] = next_price;
            }
        }
    }
    Transcript t = st.finalize(st.active_set());
    t.annotate("mechanism", "wfca");
    return t;
}

struct SamplingState {
    BidderSet sampled;   // T
    BidderSet unsampled; // U = N \ T
    BidderSet chosen;    // R, the maximal set with the highest sampled value
};

/// Sampling auction: each bidder is sampled into T with probability 1/2 (or
/// by a fixed mask); sampled clocks rise until rejection, revealing values;
/// the unsampled part of the maximal set with the highest sampled value is
/// served at price zero. Idealized reveals learn v_i exactly; grid mode
/// walks the epsilon grid and learns the last accepted grid price.
inline std::pair<Transcript, SamplingState> run_sampling(const FeasibilitySystem& sys,
                                                         const Valuation& valuation,
                                                         const std::vector<char>& mask,
                                                         const ResolvedMechanismConfig& cfg) {
    require(static_cast<int>(mask.size()) == sys.n(), "sampling: mask length must equal n");
    AuctionState st(sys, valuation);
    SamplingState state;
    for (int i = 0; i < sys.n(); ++i)
        (mask[static_cast<std::size_t>(i)] ? state.sampled : state.unsampled).push_back(i);

    std::vector<double> revealed(static_cast<std::size_t>(sys.n()), 0.0);
    if (!state.sampled.empty()) {
        if (cfg.sampling_grid) {
            require(cfg.epsilon > 0.0, "sampling: grid mode needs positive epsilon");
            std::vector<long> level(static_cast<std::size_t>(sys.n()), 0);
            std::vector<char> is_sampled(static_cast<std::size_t>(sys.n()), 0);
            for (int i : state.sampled) is_sampled[static_cast<std::size_t>(i)] = 1;
            const std::vector<int> order =
                cfg.bidder_order.empty() ? all_bidders(sys.n()) : cfg.bidder_order;
            for (;;) {
                std::vector<std::pair<int, double>> offers;
                for (int i : order) {
                    if (!is_sampled[static_cast<std::size_t>(i)] || !st.is_active(i)) continue;
                    const double p = static_cast<double>(level[static_cast<std::size_t>(i)] + 1) * cfg.epsilon;
                    if (cfg.over_cap(p))
                        throw MechanismAbort("sampling: price exceeded cap", st.finalize(BidderSet{}));
                    offers.emplace_back(i, p);
                }
                if (offers.empty()) break;
                const auto responses = st.offer_round(offers);
                for (std::size_t j = 0; j < offers.size(); ++j) {
                    const int i = offers[j].first;
                    if (responses[j]) {
                        ++level[static_cast<std::size_t>(i)];
                        revealed[static_cast<std::size_t>(i)] = offers[j].second;
                    } else {
                        st.reveal_value(i, revealed[static_cast<std::size_t>(i)]);
                    }
                }
            }
        } else {
            std::vector<std::pair<int, double>> accept_offers, reject_offers;
            for (int i : state.sampled) {
                accept_offers.emplace_back(i, valuation[static_cast<std::size_t>(i)]);
                reject_offers.emplace_back(
                    i, std::nextafter(valuation[static_cast<std::size_t>(i)],
                                      std::numeric_limits<double>::infinity()));
                revealed[static_cast<std::size_t>(i)] = valuation[static_cast<std::size_t>(i)];
            }
            st.offer_round(accept_offers);
            st.offer_round(reject_offers);
            for (int i : state.sampled) st.reveal_value(i);
        }
    }

    // R = argmax_S v(S cap T), first maximal set in canonical order on ties.
    const auto sets = sys.enumerate_maximal_sets();
    double best_v = -1.0;
    for (const auto& s : sets) {
        double w = 0.0;
        for (int i : s)
            if (mask[static_cast<std::size_t>(i)]) w += revealed[static_cast<std::size_t>(i)];
        if (w > best_v) {
            best_v = w;
            state.chosen = s;
        }
    }
    const BidderSet served = set_minus(state.chosen, state.sampled);
    Transcript t = st.finalize(served);
    t.annotate("mechanism", "sampling");
    std::string tstr, rstr;
    for (int i : state.sampled) tstr += (tstr.empty() ? "" : " ") + std::to_string(i);
    for (int i : state.chosen) rstr += (rstr.empty() ? "" : " ") + std::to_string(i);
    t.annotate("sampled", tstr);
    t.annotate("chosen", rstr);
    return {std::move(t), std::move(state)};
}

inline std::pair<Transcript, SamplingState> run_sampling(const FeasibilitySystem& sys,
                                                         const Valuation& valuation,
                                                         std::uint64_t seed,
                                                         const ResolvedMechanismConfig& cfg) {
    RngStream rng = derive_stream(seed, 0x5a3d);
    std::vector<char> mask(static_cast<std::size_t>(sys.n()), 0);
    for (auto& m : mask) m = rng.uniform01() < 0.5 ? 1 : 0;
    return run_sampling(sys, valuation, mask, cfg);
}

/// Hedging auction: a fair coin picks the WFCA or the sampling auction. The
/// coin is recorded in the transcript meta ("coin" = "wfca" | "sampling").
inline Transcript run_hedging(const FeasibilitySystem& sys, const Valuation& valuation,
                              std::uint64_t seed, const ResolvedMechanismConfig& cfg) {
    RngStream rng = derive_stream(seed, 0x4edd);
    const bool use_wfca = rng.uniform01() < 0.5;
    Transcript t;
    if (use_wfca) {
        t = run_wfca(sys, valuation, cfg);
    } else {
        t = run_sampling(sys, valuation, derive_stream(seed, 0x4edd, 1).next_u64(), cfg).first;
    }
    t.annotate("mechanism", "hedging");
    t.annotate("coin", use_wfca ? "wfca" : "sampling");
    return t;
}

// ---------------------------------------------------------------------------
// Bounded-support and binary single-price auctions
// ---------------------------------------------------------------------------

/// The bounded-support construction: for each level j = 1..l (l = largest
/// support size, shorter supports padded with their top value), a single
/// price auction posts theta_{i,j} to bidder i and serves the accepting
/// feasible subset with maximal revenue; the level with the highest expected
/// revenue is selected.
inline CandidateAuction run_bounded_support(const Instance& inst, long trials, std::uint64_t seed) {
    std::size_t levels = 0;
    std::vector<std::vector<double>> sup(static_cast<std::size_t>(inst.n()));
    for (int i = 0; i < inst.n(); ++i) {
        auto s = inst.distributions[static_cast<std::size_t>(i)].support();
        require(s.has_value(), "bounded_support: every distribution must have finite support");
        sup[static_cast<std::size_t>(i)] = *s;
        levels = std::max(levels, s->size());
    }
    CandidateAuction out;
    for (std::size_t j = 1; j <= levels; ++j) {
        SinglePriceCandidate c;
        c.label = "level_" + std::to_string(j);
        c.prices.resize(static_cast<std::size_t>(inst.n()));
        for (int i = 0; i < inst.n(); ++i) {
            const auto& s = sup[static_cast<std::size_t>(i)];
            c.prices[static_cast<std::size_t>(i)] = s[std::min(j, s.size()) - 1];
        }
        c.selection = SinglePriceSelection::MaxPriceWeight;
        auto revenue_stat = [&](const Valuation& v) {
            BidderSet accepters;
            for (int i = 0; i < inst.n(); ++i)
                if (c.prices[static_cast<std::size_t>(i)] <= v[static_cast<std::size_t>(i)])
                    accepters.push_back(i);
            return inst.feasibility.max_weight_feasible_subset(accepters, c.prices).second;
        };
        c.objective = estimate_expectation(inst, revenue_stat, trials,
                                           derive_stream(seed, j).next_u64());
        out.candidates.push_back(std::move(c));
    }
    out.chosen = 0;
    for (std::size_t i = 1; i < out.candidates.size(); ++i)
        if (out.candidates[i].objective.value > out.candidates[out.chosen].objective.value) out.chosen = i;
    return out;
}

/// Binary-valuation optimum: a uniform price of 1/2 separates the 1s from
/// the 0s, then the largest feasible subset of the survivors is served.
inline Transcript run_binary_optimal(const FeasibilitySystem& sys, const Valuation& valuation) {
    for (double v : valuation)
        require(v == 0.0 || v == 1.0, "binary_optimal: all values must be 0 or 1");
    AuctionState st(sys, valuation);
    st.offer_uniform(0.5);
    const BidderSet accepters = st.active_set();
    Transcript t = st.finalize(sys.largest_feasible_subset(accepters));
    t.annotate("mechanism", "binary_optimal");
    return t;
}

} // namespace clockauct
