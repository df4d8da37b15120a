#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clockauct/common.hpp"
#include "clockauct/feasibility.hpp"
#include "clockauct/rng.hpp"

namespace clockauct {

struct PointMass {
    double value = 0.0;
};

struct DiscreteFinite {
    std::vector<double> values; // strictly increasing, >= 0
    std::vector<double> probs;  // > 0, sum to 1 within 1e-12
};

struct UniformReal {
    double a = 0.0;
    double b = 1.0;
};

struct ExponentialRate {
    double rate = 1.0;
};

/// Value-prior of a single bidder. Four variants cover every experiment the
/// library runs; tail probabilities, conditional tail expectations, and means
/// are all closed-form, never sampled.
///
/// Tail convention: tail_prob uses the strict event {v > p} (the S(t, v)
/// counting convention), tail_prob_weak uses {v >= p} (the clock-acceptance
/// convention, since a bidder drops only when the price exceeds the value).
/// Call sites state which one they rely on.
class ValueDistribution {
  public:
    ValueDistribution() : var_(PointMass{0.0}) {}

    static ValueDistribution point_mass(double v) {
        require(v >= 0.0, "distribution: point mass must be nonnegative");
        return ValueDistribution(PointMass{v});
    }

    static ValueDistribution discrete(std::vector<double> values, std::vector<double> probs) {
        require(!values.empty() && values.size() == probs.size(),
                "distribution: discrete needs matching nonempty values/probs");
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            require(values[i] >= 0.0, "distribution: discrete values must be nonnegative");
            if (i > 0)
                require(values[i] > values[i - 1], "distribution: discrete values must be strictly increasing");
            require(probs[i] > 0.0, "distribution: discrete probabilities must be positive");
            sum += probs[i];
        }
        require(std::abs(sum - 1.0) <= 1e-12, "distribution: discrete probabilities must sum to 1");
        return ValueDistribution(DiscreteFinite{std::move(values), std::move(probs)});
    }

    static ValueDistribution uniform(double a, double b) {
        require(a >= 0.0 && b >= a, "distribution: uniform needs 0 <= a <= b");
        return ValueDistribution(UniformReal{a, b});
    }

    static ValueDistribution exponential(double rate) {
        require(rate > 0.0, "distribution: exponential rate must be positive");
        return ValueDistribution(ExponentialRate{rate});
    }

    double sample(RngStream& rng) const {
        if (const auto* p = std::get_if<PointMass>(&var_)) return p->value;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            double u = rng.uniform01();
            double acc = 0.0;
            for (std::size_t i = 0; i < d->values.size(); ++i) {
                acc += d->probs[i];
                if (u < acc) return d->values[i];
            }
            return d->values.back();
        }
        if (const auto* u = std::get_if<UniformReal>(&var_))
            return u->a + rng.uniform01() * (u->b - u->a);
        const auto& e = std::get<ExponentialRate>(var_);
        return -std::log1p(-rng.uniform01()) / e.rate;
    }

    /// Pr[v > p], strict.
    double tail_prob(double p) const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return pm->value > p ? 1.0 : 0.0;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < d->values.size(); ++i)
                if (d->values[i] > p) s += d->probs[i];
            return s;
        }
        if (const auto* u = std::get_if<UniformReal>(&var_)) {
            if (p < u->a) return 1.0;
            if (p >= u->b) return 0.0;
            return (u->b - p) / (u->b - u->a);
        }
        const auto& e = std::get<ExponentialRate>(var_);
        return p <= 0.0 ? 1.0 : std::exp(-e.rate * p);
    }

    /// Pr[v >= p], weak.
    double tail_prob_weak(double p) const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return pm->value >= p ? 1.0 : 0.0;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < d->values.size(); ++i)
                if (d->values[i] >= p) s += d->probs[i];
            return s;
        }
        return tail_prob(p); // continuous variants: atomless
    }

    /// E[v | v >= p]. Requires Pr[v >= p] > 0.
    double cte(double p) const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) {
            if (pm->value < p) throw InputError("cte: conditioning event {v >= p} has probability 0");
            return pm->value;
        }
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            double mass = 0.0, ev = 0.0;
            for (std::size_t i = 0; i < d->values.size(); ++i)
                if (d->values[i] >= p) {
                    mass += d->probs[i];
                    ev += d->values[i] * d->probs[i];
                }
            if (mass <= 0.0) throw InputError("cte: conditioning event {v >= p} has probability 0");
            return ev / mass;
        }
        if (const auto* u = std::get_if<UniformReal>(&var_)) {
            if (p > u->b) throw InputError("cte: conditioning event {v >= p} has probability 0");
            return (std::max(p, u->a) + u->b) / 2.0;
        }
        const auto& e = std::get<ExponentialRate>(var_);
        return std::max(p, 0.0) + 1.0 / e.rate; // memoryless
    }

    /// Increasing support values, or nullopt for continuous variants.
    std::optional<std::vector<double>> support() const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return std::vector<double>{pm->value};
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) return d->values;
        return std::nullopt;
    }

    double expected_value() const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return pm->value;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            double ev = 0.0;
            for (std::size_t i = 0; i < d->values.size(); ++i) ev += d->values[i] * d->probs[i];
            return ev;
        }
        if (const auto* u = std::get_if<UniformReal>(&var_)) return (u->a + u->b) / 2.0;
        return 1.0 / std::get<ExponentialRate>(var_).rate;
    }

    /// E[v * 1{v > p}], strict.
    double tail_expectation(double p) const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return pm->value > p ? pm->value : 0.0;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < d->values.size(); ++i)
                if (d->values[i] > p) s += d->values[i] * d->probs[i];
            return s;
        }
        if (const auto* u = std::get_if<UniformReal>(&var_)) {
            if (p >= u->b) return 0.0;
            double q = std::max(p, u->a);
            return (u->b * u->b - q * q) / (2.0 * (u->b - u->a));
        }
        const auto& e = std::get<ExponentialRate>(var_);
        if (p <= 0.0) return 1.0 / e.rate;
        return std::exp(-e.rate * p) * (p + 1.0 / e.rate);
    }

    /// Pr[v = p]; zero for continuous variants.
    double atom_prob(double p) const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return pm->value == p ? 1.0 : 0.0;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) {
            for (std::size_t i = 0; i < d->values.size(); ++i)
                if (d->values[i] == p) return d->probs[i];
            return 0.0;
        }
        return 0.0;
    }

    bool is_discrete() const {
        return std::holds_alternative<PointMass>(var_) || std::holds_alternative<DiscreteFinite>(var_);
    }

    /// Largest support value for bounded variants, nullopt for exponential.
    std::optional<double> support_max() const {
        if (const auto* pm = std::get_if<PointMass>(&var_)) return pm->value;
        if (const auto* d = std::get_if<DiscreteFinite>(&var_)) return d->values.back();
        if (const auto* u = std::get_if<UniformReal>(&var_)) return u->b;
        return std::nullopt;
    }

    const std::variant<PointMass, DiscreteFinite, UniformReal, ExponentialRate>& raw() const { return var_; }

  private:
    explicit ValueDistribution(std::variant<PointMass, DiscreteFinite, UniformReal, ExponentialRate> v)
        : var_(std::move(v)) {}
    std::variant<PointMass, DiscreteFinite, UniformReal, ExponentialRate> var_;
};

/// A full problem instance: value priors plus the feasibility constraint.
struct Instance {
    std::vector<ValueDistribution> distributions;
    FeasibilitySystem feasibility;
    std::string id = "instance";

    Instance(std::vector<ValueDistribution> dists, FeasibilitySystem sys, std::string name = "instance")
        : distributions(std::move(dists)), feasibility(std::move(sys)), id(std::move(name)) {
        require(static_cast<int>(distributions.size()) == feasibility.n(),
                "instance: distribution count must equal feasibility ground-set size");
    }

    int n() const { return feasibility.n(); }

    Valuation sample_valuation(RngStream& rng) const {
        Valuation v(distributions.size());
        for (std::size_t i = 0; i < distributions.size(); ++i) v[i] = distributions[i].sample(rng);
        return v;
    }

    /// True when every bidder's prior has finite support.
    bool all_discrete() const {
        for (const auto& d : distributions)
            if (!d.is_discrete()) return false;
        return true;
    }

    /// Largest bounded support value across bidders; nullopt if any prior is
    /// unbounded.
    std::optional<double> max_support() const {
        double m = 0.0;
        for (const auto& d : distributions) {
            auto s = d.support_max();
            if (!s) return std::nullopt;
            m = std::max(m, *s);
        }
        return m;
    }
};

inline void check_valuation(const Valuation& v, int n) {
    require(static_cast<int>(v.size()) == n, "valuation: length must equal bidder count");
    for (double x : v) require(x >= 0.0, "valuation: values must be nonnegative");
}

} // namespace clockauct
