#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "clockauct/common.hpp"
#include "clockauct/engine.hpp"
#include "clockauct/feasibility.hpp"
#include "clockauct/valuation.hpp"

namespace clockauct {

using nlohmann::json;

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(ctx + ": missing field '" + key + "'");
    return *it;
}

inline double num_field(const json& j, const std::string& key, const std::string& ctx) {
    const json& f = field(j, key, ctx);
    if (!f.is_number()) throw InputError(ctx + "." + key + ": expected a number");
    return f.get<double>();
}

inline std::vector<double> num_array(const json& j, const std::string& key, const std::string& ctx) {
    const json& f = field(j, key, ctx);
    if (!f.is_array()) throw InputError(ctx + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& x : f) {
        if (!x.is_number()) throw InputError(ctx + "." + key + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace detail

inline ValueDistribution distribution_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw InputError(ctx + ": expected a distribution object");
    const json& var = detail::field(j, "variant", ctx);
    if (!var.is_string()) throw InputError(ctx + ".variant: expected a string");
    const std::string v = var.get<std::string>();
    try {
        if (v == "point") return ValueDistribution::point_mass(detail::num_field(j, "value", ctx));
        if (v == "discrete")
            return ValueDistribution::discrete(detail::num_array(j, "values", ctx),
                                               detail::num_array(j, "probs", ctx));
        if (v == "uniform")
            return ValueDistribution::uniform(detail::num_field(j, "a", ctx),
                                              detail::num_field(j, "b", ctx));
        if (v == "exponential")
            return ValueDistribution::exponential(detail::num_field(j, "rate", ctx));
    } catch (const InputError& e) {
        throw InputError(ctx + ": " + e.what());
    }
    throw InputError(ctx + ".variant: unknown variant '" + v +
                     "' (point, discrete, uniform, exponential)");
}

inline json distribution_to_json(const ValueDistribution& d) {
    json j;
    if (const auto* pm = std::get_if<PointMass>(&d.raw())) {
        j["variant"] = "point";
        j["value"] = pm->value;
    } else if (const auto* df = std::get_if<DiscreteFinite>(&d.raw())) {
        j["variant"] = "discrete";
        j["values"] = df->values;
        j["probs"] = df->probs;
    } else if (const auto* u = std::get_if<UniformReal>(&d.raw())) {
        j["variant"] = "uniform";
        j["a"] = u->a;
        j["b"] = u->b;
    } else {
        j["variant"] = "exponential";
        j["rate"] = std::get<ExponentialRate>(d.raw()).rate;
    }
    return j;
}

inline FeasibilitySystem feasibility_from_json(const json& j, int n, const std::string& ctx) {
    if (!j.is_object()) throw InputError(ctx + ": expected a feasibility object");
    const json& kind = detail::field(j, "kind", ctx);
    if (!kind.is_string()) throw InputError(ctx + ".kind: expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "maximal_sets") {
        const json& sets = detail::field(j, "sets", ctx);
        if (!sets.is_array()) throw InputError(ctx + ".sets: expected an array of index arrays");
        std::vector<BidderSet> out;
        for (const auto& s : sets) {
            if (!s.is_array()) throw InputError(ctx + ".sets: expected an array of index arrays");
            BidderSet b;
            for (const auto& x : s) {
                if (!x.is_number_integer()) throw InputError(ctx + ".sets: indices must be integers");
                b.push_back(x.get<int>());
            }
            out.push_back(std::move(b));
        }
        return FeasibilitySystem::from_maximal_sets(n, std::move(out));
    }
    if (k == "knapsack") {
        auto demands = detail::num_array(j, "demands", ctx);
        if (static_cast<int>(demands.size()) != n)
            throw InputError(ctx + ".demands: expected " + std::to_string(n) + " entries");
        return FeasibilitySystem::from_knapsack(std::move(demands));
    }
    throw InputError(ctx + ".kind: unknown kind '" + k + "' (maximal_sets, knapsack)");
}

inline json feasibility_to_json(const FeasibilitySystem& sys) {
    json j;
    if (sys.kind() == FeasibilityKind::ExplicitMaximalSets) {
        j["kind"] = "maximal_sets";
        j["sets"] = sys.maximal_sets_explicit();
    } else {
        j["kind"] = "knapsack";
        j["demands"] = sys.demands();
    }
    return j;
}

inline Instance instance_from_json(const json& j) {
    if (!j.is_object()) throw InputError("instance: expected a JSON object");
    const json& dists = detail::field(j, "distributions", "instance");
    if (!dists.is_array() || dists.empty())
        throw InputError("instance.distributions: expected a nonempty array");
    std::vector<ValueDistribution> ds;
    for (std::size_t i = 0; i < dists.size(); ++i)
        ds.push_back(distribution_from_json(dists[i],
                                            "instance.distributions[" + std::to_string(i) + "]"));
    const int n = static_cast<int>(ds.size());
    FeasibilitySystem sys =
        feasibility_from_json(detail::field(j, "feasibility", "instance"), n, "instance.feasibility");
    std::string id = j.value("id", std::string("instance"));
    return Instance(std::move(ds), std::move(sys), std::move(id));
}

inline json instance_to_json(const Instance& inst) {
    json j;
    j["id"] = inst.id;
    j["distributions"] = json::array();
    for (const auto& d : inst.distributions) j["distributions"].push_back(distribution_to_json(d));
    j["feasibility"] = feasibility_to_json(inst.feasibility);
    return j;
}

inline json transcript_to_json(const Transcript& t) {
    json j;
    j["n"] = t.n;
    j["rounds"] = json::array();
    for (const auto& r : t.rounds) {
        json jr;
        jr["bidders"] = r.bidders;
        jr["prices"] = r.prices;
        json acc = json::array();
        for (char a : r.accepted) acc.push_back(a != 0);
        jr["accepted"] = std::move(acc);
        jr["active_after"] = r.active_after;
        j["rounds"].push_back(std::move(jr));
    }
    j["served"] = t.served;
    j["payments"] = t.payments;
    json rv = json::object();
    for (const auto& [i, v] : t.revealed_values) rv[std::to_string(i)] = v;
    j["revealed_values"] = std::move(rv);
    json meta = json::object();
    for (const auto& [k, v] : t.meta) meta[k] = v;
    j["meta"] = std::move(meta);
    return j;
}

} // namespace clockauct
