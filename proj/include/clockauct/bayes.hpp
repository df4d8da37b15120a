#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "clockauct/common.hpp"
#include "clockauct/oracle.hpp"
#include "clockauct/parallel.hpp"
#include "clockauct/rng.hpp"
#include "clockauct/valuation.hpp"

namespace clockauct {

/// A scalar estimate with a 95% normal-approximation confidence half-width.
/// Exact computations carry ci_half = 0 and exact = true.
struct Estimate {
    double value = 0.0;
    double ci_half = 0.0;
    long trials = 0;
    bool exact = false;
};

inline Estimate mc_estimate(const std::vector<double>& samples) {
    Estimate e;
    e.trials = static_cast<long>(samples.size());
    if (samples.empty()) return e;
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    if (samples.size() > 1) var /= static_cast<double>(samples.size() - 1);
    e.value = mean;
    e.ci_half = 1.96 * std::sqrt(var / static_cast<double>(samples.size()));
    return e;
}

enum class LogBase { Two, Natural };

inline double log_of(double x, LogBase base) {
    return base == LogBase::Two ? std::log2(x) : std::log(x);
}

/// Upper limit on joint-support size for exact expectation by enumeration.
inline constexpr std::size_t kJointSupportCap = 1'000'000;

/// Visits every outcome of the product of finite supports as (valuation,
/// probability). Returns false without calling fn when some distribution is
/// continuous or the joint support exceeds `cap`.
template <typename Fn>
bool for_each_joint_outcome(const std::vector<ValueDistribution>& dists, Fn&& fn,
                            std::size_t cap = kJointSupportCap) {
    const std::size_t n = dists.size();
    std::vector<std::vector<double>> values(n);
    std::vector<std::vector<double>> probs(n);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        auto sup = dists[i].support();
        if (!sup) return false;
        values[i] = *sup;
        probs[i].reserve(values[i].size());
        for (double v : values[i]) probs[i].push_back(dists[i].atom_prob(v));
        if (total > cap / std::max<std::size_t>(values[i].size(), 1)) return false;
        total *= values[i].size();
    }
    if (total > cap) return false;
    std::vector<std::size_t> idx(n, 0);
    Valuation v(n);
    for (;;) {
        double q = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = values[i][idx[i]];
            q *= probs[i][idx[i]];
        }
        fn(static_cast<const Valuation&>(v), q);
        std::size_t pos = 0;
        while (pos < n && ++idx[pos] == values[pos].size()) {
            idx[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    return true;
}

/// Expectation of an arbitrary per-valuation statistic: exact joint-support
/// enumeration when possible, otherwise Monte Carlo over `trials` samples
/// with per-trial streams derived from (seed, trial).
template <typename Fn>
Estimate estimate_expectation(const Instance& inst, Fn&& fn, long trials, std::uint64_t seed,
                              std::size_t joint_cap = kJointSupportCap) {
    double exact = 0.0;
    const bool did_exact = for_each_joint_outcome(
        inst.distributions, [&](const Valuation& v, double q) { exact += q * fn(v); }, joint_cap);
    if (did_exact) return Estimate{exact, 0.0, 1, true};
    auto samples = parallel_trials<double>(trials, [&](long t) {
        RngStream rng = derive_stream(seed, static_cast<std::uint64_t>(t));
        return fn(inst.sample_valuation(rng));
    });
    return mc_estimate(samples);
}

/// Smallest t >= 0 with sum_{i in S} Pr[v_i > t] <= target. Continuous parts
/// are located by bisection; a jump caused by a discrete atom is snapped to
/// the atom itself, implementing the infimum rule for thresholds that have
/// no exact solution.
inline double compute_threshold(const Instance& inst, const BidderSet& S, double target) {
    require(target > 0.0, "compute_threshold: target must be positive");
    auto g = [&](double t) {
        double s = 0.0;
        for (int i : S) s += inst.distributions[static_cast<std::size_t>(i)].tail_prob(t);
        return s;
    };
    if (S.empty() || g(0.0) <= target) return 0.0;
    double hi = 1.0;
    bool bounded = true;
    double max_sup = 0.0;
    for (int i : S) {
        auto m = inst.distributions[static_cast<std::size_t>(i)].support_max();
        if (!m) {
            bounded = false;
            break;
        }
        max_sup = std::max(max_sup, *m);
    }
    if (bounded) {
        hi = max_sup; // strict tail vanishes at the top of the support
    } else {
        while (g(hi) > target) hi *= 2.0;
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    // Snap onto a support atom when the bisection bracket closed on a jump.
    double best_atom = hi;
    bool snapped = false;
    const double tol = 1e-9 * std::max(1.0, std::abs(hi));
    for (int i : S) {
        auto sup = inst.distributions[static_cast<std::size_t>(i)].support();
        if (!sup) continue;
        for (double a : *sup) {
            if (a >= lo - tol && a <= hi + tol && g(a) <= target) {
                if (!snapped || a < best_atom) best_atom = a;
                snapped = true;
            }
        }
    }
    return snapped ? best_atom : hi;
}

/// Per-maximal-set thresholds at the standard target log(k).
inline std::vector<double> compute_thresholds(const Instance& inst,
                                              const std::vector<BidderSet>& maximal_sets,
                                              LogBase base = LogBase::Two) {
    const double k = static_cast<double>(maximal_sets.size());
    const double target = std::max(log_of(k, base), 0.0);
    std::vector<double> ts;
    ts.reserve(maximal_sets.size());
    for (const auto& S : maximal_sets) {
        if (target <= 0.0) {
            // k = 1: expected strict-tail count must vanish, i.e. the top of
            // the support.
            double m = 0.0;
            for (int i : S) {
                auto sm = inst.distributions[static_cast<std::size_t>(i)].support_max();
                m = std::max(m, sm ? *sm : 0.0);
            }
            if (!S.empty()) {
                bool bounded = true;
                for (int i : S)
                    if (!inst.distributions[static_cast<std::size_t>(i)].support_max()) bounded = false;
                require(bounded, "compute_thresholds: k = 1 with unbounded support has no finite threshold");
            }
            ts.push_back(m);
        } else {
            ts.push_back(compute_threshold(inst, S, target));
        }
    }
    return ts;
}

/// E[OPT] = E[max over feasible sets of the value sum].
inline Estimate estimate_opt(const Instance& inst, long trials, std::uint64_t seed,
                             std::size_t joint_cap = kJointSupportCap) {
    auto sets = inst.feasibility.enumerate_maximal_sets();
    return estimate_expectation(
        inst, [&](const Valuation& v) { return brute_force_opt(sets, v).second; }, trials, seed,
        joint_cap);
}

/// Number of members of S with value strictly above t.
inline int strict_exceed_count(const BidderSet& S, const Valuation& v, double t) {
    int c = 0;
    for (int i : S)
        if (v[static_cast<std::size_t>(i)] > t) ++c;
    return c;
}

/// Delta = E[max_S sum_{i in S} v_i 1{v_i > t_S} 1{|S(t_S, v)| <= m}], the
/// high-core benchmark constant that prices the doubling price ladder.
inline Estimate compute_delta(const Instance& inst, const std::vector<BidderSet>& maximal_sets,
                              const std::vector<double>& thresholds, long m, long trials,
                              std::uint64_t seed, std::size_t joint_cap = kJointSupportCap) {
    require(m >= 1, "compute_delta: m must be >= 1");
    require(maximal_sets.size() == thresholds.size(), "compute_delta: one threshold per maximal set");
    auto statistic = [&](const Valuation& v) {
        double best = 0.0;
        for (std::size_t s = 0; s < maximal_sets.size(); ++s) {
            const double t = thresholds[s];
            int count = 0;
            double sum = 0.0;
            for (int i : maximal_sets[s]) {
                if (v[static_cast<std::size_t>(i)] > t) {
                    ++count;
                    sum += v[static_cast<std::size_t>(i)];
                }
            }
            if (count <= m) best = std::max(best, sum);
        }
        return best;
    };
    return estimate_expectation(inst, statistic, trials, seed, joint_cap);
}

/// True when there is an x in [0, t_end) at which the number of members of S
/// (optionally excluding one) with value above x exceeds 10 times the
/// expected count over all of S (optionally plus one). Checked exactly at the
/// finitely many breakpoints where the count changes; on each interval the
/// binding comparison uses the expected count's infimum, i.e. the weak tail
/// at the interval's right endpoint.
inline bool count_excess_event(const BidderSet& S, const Valuation& v,
                               const std::vector<ValueDistribution>& dists, int exclude,
                               double t_end, bool plus_one) {
    if (t_end <= 0.0 || S.empty()) return false;
    std::vector<double> vals;
    vals.reserve(S.size());
    for (int i : S)
        if (i != exclude) vals.push_back(v[static_cast<std::size_t>(i)]);
    std::vector<double> brk;
    brk.reserve(vals.size() + 2);
    brk.push_back(0.0);
    for (double x : vals)
        if (x >= 0.0 && x < t_end) brk.push_back(x);
    brk.push_back(t_end);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    auto expected_weak = [&](double x) {
        double s = 0.0;
        for (int i : S) s += dists[static_cast<std::size_t>(i)].tail_prob_weak(x);
        return s;
    };
    for (std::size_t j = 0; j + 1 < brk.size(); ++j) {
        int count = 0;
        for (double x : vals)
            if (x > brk[j]) ++count;
        double bound = 10.0 * expected_weak(brk[j + 1]) + (plus_one ? 1.0 : 0.0);
        if (static_cast<double>(count) > bound + 1e-9) return true;
    }
    return false;
}

/// Pr[sum of independent Bernoulli(tail_i) > threshold] by the exact
/// Poisson-binomial recurrence.
inline double poisson_binomial_tail_gt(const std::vector<double>& ps, long threshold) {
    if (threshold < 0) return 1.0;
    if (static_cast<long>(ps.size()) <= threshold) return 0.0;
    std::vector<double> pmf(ps.size() + 1, 0.0);
    pmf[0] = 1.0;
    std::size_t upto = 0;
    for (double p : ps) {
        ++upto;
        for (std::size_t c = upto; c > 0; --c) pmf[c] = pmf[c] * (1.0 - p) + pmf[c - 1] * p;
        pmf[0] *= (1.0 - p);
    }
    double s = 0.0;
    for (std::size_t c = static_cast<std::size_t>(threshold) + 1; c < pmf.size(); ++c) s += pmf[c];
    return std::min(std::max(s, 0.0), 1.0);
}

struct DecompositionEstimate {
    Estimate low, low_core, low_tail, high, high_core, high_tail;
};

/// Estimators for the benchmark decomposition OPT <= LOW + HIGH, the
/// core-tail split of HIGH at count m, and the core-tail split of LOW at the
/// 10x-expected-count event. LOW/HIGH/cores are joint expectations (exact
/// enumeration when the joint support allows, Monte Carlo otherwise);
/// HIGH-TAIL is exact via Poisson-binomial tails; LOW-TAIL estimates its
/// per-set event probabilities by per-set enumeration or Monte Carlo.
inline DecompositionEstimate estimate_decomposition(const Instance& inst,
                                                    const std::vector<BidderSet>& maximal_sets,
                                                    const std::vector<double>& thresholds, long m,
                                                    long trials, std::uint64_t seed) {
    require(maximal_sets.size() == thresholds.size(), "decomposition: one threshold per maximal set");
    DecompositionEstimate out;
    auto low_fn = [&](const Valuation& v) {
        double best = 0.0;
        for (std::size_t s = 0; s < maximal_sets.size(); ++s) {
            double sum = 0.0;
            for (int i : maximal_sets[s]) sum += std::min(v[static_cast<std::size_t>(i)], thresholds[s]);
            best = std::max(best, sum);
        }
        return best;
    };
    auto high_fn = [&](const Valuation& v) {
        double best = 0.0;
        for (std::size_t s = 0; s < maximal_sets.size(); ++s) {
            double sum = 0.0;
            for (int i : maximal_sets[s])
                if (v[static_cast<std::size_t>(i)] > thresholds[s]) sum += v[static_cast<std::size_t>(i)];
            best = std::max(best, sum);
        }
        return best;
    };
    auto low_core_fn = [&](const Valuation& v) {
        double best = 0.0;
        for (std::size_t s = 0; s < maximal_sets.size(); ++s) {
            if (count_excess_event(maximal_sets[s], v, inst.distributions, -1, thresholds[s], true))
                continue;
            double sum = 0.0;
            for (int i : maximal_sets[s]) sum += std::min(v[static_cast<std::size_t>(i)], thresholds[s]);
            best = std::max(best, sum);
        }
        return best;
    };
    out.low = estimate_expectation(inst, low_fn, trials, seed);
    out.high = estimate_expectation(inst, high_fn, trials, derive_stream(seed, 1).next_u64());
    out.low_core = estimate_expectation(inst, low_core_fn, trials, derive_stream(seed, 2).next_u64());
    out.high_core =
        compute_delta(inst, maximal_sets, thresholds, m, trials, derive_stream(seed, 3).next_u64());

    // HIGH-TAIL = sum_S sum_{i in S} E[v_i] * Pr[|S(t_S, v) - {i}| > m - 1]
    double ht = 0.0;
    for (std::size_t s = 0; s < maximal_sets.size(); ++s) {
        for (int i : maximal_sets[s]) {
            std::vector<double> ps;
            ps.reserve(maximal_sets[s].size());
            for (int j : maximal_sets[s])
                if (j != i) ps.push_back(inst.distributions[static_cast<std::size_t>(j)].tail_prob(thresholds[s]));
            ht += inst.distributions[static_cast<std::size_t>(i)].expected_value() *
                  poisson_binomial_tail_gt(ps, m - 1);
        }
    }
    out.high_tail = Estimate{ht, 0.0, 1, true};

    // LOW-TAIL = sum_S sum_{i in S} E[v_i] * Pr[exists x in [0, t_S):
    //            |S(x, v) - {i}| > 10 E|S(x, v)|]
    double lt_value = 0.0;
    double lt_var = 0.0;
    bool lt_exact = true;
    for (std::size_t s = 0; s < maximal_sets.size(); ++s) {
        const auto& S = maximal_sets[s];
        std::vector<ValueDistribution> sub;
        sub.reserve(S.size());
        for (int i : S) sub.push_back(inst.distributions[static_cast<std::size_t>(i)]);
        auto per_outcome = [&](const Valuation& vs) {
            Valuation full(static_cast<std::size_t>(inst.n()), 0.0);
            for (std::size_t j = 0; j < S.size(); ++j) full[static_cast<std::size_t>(S[j])] = vs[j];
            double c = 0.0;
            for (int i : S)
                if (count_excess_event(S, full, inst.distributions, i, thresholds[s], false))
                    c += inst.distributions[static_cast<std::size_t>(i)].expected_value();
            return c;
        };
        double exact_val = 0.0;
        if (for_each_joint_outcome(sub, [&](const Valuation& vs, double q) { exact_val += q * per_outcome(vs); })) {
            lt_value += exact_val;
        } else {
            lt_exact = false;
            auto samples = parallel_trials<double>(trials, [&](long t) {
                RngStream rng = derive_stream(seed, 1000 + s, static_cast<std::uint64_t>(t));
                Valuation vs(S.size());
                for (std::size_t j = 0; j < S.size(); ++j) vs[j] = sub[j].sample(rng);
                return per_outcome(vs);
            });
            Estimate e = mc_estimate(samples);
            lt_value += e.value;
            lt_var += e.ci_half * e.ci_half;
        }
    }
    out.low_tail = Estimate{lt_value, std::sqrt(lt_var), trials, lt_exact};
    return out;
}

/// All Bayesian quantities a mechanism needs, computed once per instance.
struct BayesParams {
    std::vector<BidderSet> maximal_sets;
    std::vector<double> thresholds; // t_S, aligned with maximal_sets
    Estimate delta;
    Estimate opt;
    long m = 1;
    double alpha = 1.0;
    double goal = 0.0; // g = opt / (4 alpha)
};

/// m = 10 log2(k) + 1 rounded up; alpha defaults to 2 (ceil(log2 m) + 2),
/// the concrete stand-in for the O(log m) bucket bound; g = opt / (4 alpha).
inline void fill_mechanism2_params(BayesParams& bp, double opt_estimate, int k,
                                   double alpha_override = 0.0) {
    require(opt_estimate >= 0.0, "mechanism2_params: opt estimate must be nonnegative");
    const double raw = 10.0 * std::log2(std::max(1.0, static_cast<double>(k))) + 1.0;
    bp.m = std::max<long>(1, static_cast<long>(std::ceil(raw - 1e-9)));
    if (alpha_override > 0.0) {
        bp.alpha = alpha_override;
    } else {
        long lg = 0;
        while ((1L << lg) < bp.m) ++lg; // ceil(log2 m)
        bp.alpha = 2.0 * (static_cast<double>(lg) + 2.0);
    }
    bp.goal = opt_estimate / (4.0 * bp.alpha);
}

inline BayesParams compute_bayes(const Instance& inst, long trials, std::uint64_t seed,
                                 LogBase base = LogBase::Two, double alpha_override = 0.0) {
    BayesParams bp;
    bp.maximal_sets = inst.feasibility.enumerate_maximal_sets();
    bp.thresholds = compute_thresholds(inst, bp.maximal_sets, base);
    const int k = static_cast<int>(bp.maximal_sets.size());
    bp.opt = estimate_opt(inst, trials, seed);
    fill_mechanism2_params(bp, bp.opt.value, k, alpha_override);
    bp.delta = compute_delta(inst, bp.maximal_sets, bp.thresholds, bp.m, trials,
                             derive_stream(seed, 7).next_u64());
    return bp;
}

} // namespace clockauct
