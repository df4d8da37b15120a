#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "clockauct/evaluation.hpp"
#include "clockauct/generators.hpp"
#include "clockauct/json_io.hpp"

namespace clockauct {

/// Exit codes contract: 0 success, 2 input error, 3 invariant or assertion
/// failure. Stable for CI pipelines.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInvariant = 3;

struct ExperimentConfig {
    // instance source: exactly one of file path, inline JSON, named generator
    std::string instance_path;
    std::string instance_inline;
    std::string generator;
    int set_size = 8;

    std::string mechanism;
    bool has_mechanism = false;
    MechanismConfig mech;

    long trials = 10000;
    std::uint64_t seed = 0;
    bool has_seed = false;

    std::vector<int> k_list; // sweep points for named generators

    std::string out_report;      // CSV
    std::string out_transcripts; // JSONL
    bool strict = false;

    std::string verify_target;
    int verify_set_size = 200;

    std::string valuation_json; // fixed valuation for `run`
};

namespace detail {

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["instance_path"] = cfg.instance_path;
    j["instance_inline"] = cfg.instance_inline;
    j["generator"] = cfg.generator;
    j["set_size"] = cfg.set_size;
    j["mechanism"] = cfg.mechanism;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["k_list"] = cfg.k_list;
    j["strict"] = cfg.strict;
    j["delta_step"] = cfg.mech.delta_step;
    j["epsilon"] = cfg.mech.epsilon;
    j["price_cap"] = cfg.mech.price_cap;
    j["sampling_grid"] = cfg.mech.sampling_grid;
    return j;
}

inline void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open output file '" + path + "'");
    out << body;
    if (!out) throw InputError("failed writing output file '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(what + ": JSON parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
}

} // namespace detail

inline void require_seed(const ExperimentConfig& cfg) {
    require(cfg.has_seed,
            "no seed given: pass --seed or set CLOCKAUCT_SEED (runs must be reproducible)");
}

/// Applies a JSON experiment config (e.g. {"mechanism":"hedging",
/// "epsilon":0.01,"seed":42}) onto `cfg`. Command-line flags parsed after
/// this override individual fields.
inline void apply_config_json(const json& j, ExperimentConfig& cfg) {
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    auto str = [&](const char* key, std::string& out) {
        if (!j.contains(key)) return false;
        if (!j[key].is_string()) throw InputError(std::string("config.") + key + ": expected a string");
        out = j[key].get<std::string>();
        return true;
    };
    if (str("mechanism", cfg.mechanism)) cfg.has_mechanism = true;
    str("generator", cfg.generator);
    str("instance_path", cfg.instance_path);
    str("out_report", cfg.out_report);
    str("out_transcripts", cfg.out_transcripts);
    if (j.contains("instance")) cfg.instance_inline = j["instance"].dump();
    if (j.contains("valuation")) cfg.valuation_json = j["valuation"].dump();
    if (j.contains("trials")) cfg.trials = j["trials"].get<long>();
    if (j.contains("seed")) {
        cfg.seed = j["seed"].get<std::uint64_t>();
        cfg.has_seed = true;
    }
    if (j.contains("k")) {
        cfg.k_list.clear();
        if (j["k"].is_array())
            for (const auto& x : j["k"]) cfg.k_list.push_back(x.get<int>());
        else
            cfg.k_list.push_back(j["k"].get<int>());
    }
    if (j.contains("set_size")) cfg.set_size = j["set_size"].get<int>();
    if (j.contains("epsilon")) cfg.mech.epsilon = j["epsilon"].get<double>();
    if (j.contains("delta")) cfg.mech.delta_step = j["delta"].get<double>();
    if (j.contains("price_cap")) cfg.mech.price_cap = j["price_cap"].get<double>();
    if (j.contains("grid")) cfg.mech.sampling_grid = j["grid"].get<bool>();
    if (j.contains("strict")) cfg.strict = j["strict"].get<bool>();
    if (j.contains("bidder_order")) {
        cfg.mech.bidder_order.clear();
        for (const auto& x : j["bidder_order"]) cfg.mech.bidder_order.push_back(x.get<int>());
    }
}

inline void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    apply_config_json(detail::parse_json(detail::read_file(path), path), cfg);
}

inline Instance resolve_instance(const ExperimentConfig& cfg, int k) {
    const int sources = (cfg.instance_path.empty() ? 0 : 1) + (cfg.instance_inline.empty() ? 0 : 1) +
                        (cfg.generator.empty() ? 0 : 1);
    require(sources == 1, "give exactly one instance source: --instance, --inline, or --generator");
    if (!cfg.instance_path.empty())
        return instance_from_json(
            detail::parse_json(detail::read_file(cfg.instance_path), cfg.instance_path));
    if (!cfg.instance_inline.empty())
        return instance_from_json(detail::parse_json(cfg.instance_inline, "--inline"));
    return make_named_instance(cfg.generator, k, cfg.seed, cfg.set_size);
}

/// `run`: one mechanism execution on one valuation (sampled from the priors
/// unless --valuation pins it), transcript to JSONL, summary to `out`.
inline int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
    require_seed(cfg);
    require(cfg.has_mechanism, "run: --mechanism is required");
    const int k0 = cfg.k_list.empty() ? 2 : cfg.k_list.front();
    const Instance inst = resolve_instance(cfg, k0);
    const MechanismId id = mechanism_from_string(cfg.mechanism);

    Valuation v;
    if (!cfg.valuation_json.empty()) {
        auto j = detail::parse_json(cfg.valuation_json, "--valuation");
        require(j.is_array(), "--valuation: expected a JSON array of numbers");
        for (const auto& x : j) v.push_back(x.get<double>());
        check_valuation(v, inst.n());
    } else {
        RngStream rng = derive_stream(cfg.seed, 0);
        v = inst.sample_valuation(rng);
    }

    const PreparedMechanism prep = prepare_mechanism(id, inst, cfg.mech, cfg.trials, cfg.seed);
    const std::uint64_t run_seed = derive_stream(cfg.seed, 0, 1).next_u64();
    Transcript t = run_prepared(prep, inst, v, run_seed, cfg.mech);

    auto bad = check_transcript(t, inst.feasibility, v);
    auto extra = detail::mechanism_violations(t, inst.feasibility, v, prep.cfg.epsilon);
    bad.insert(bad.end(), extra.begin(), extra.end());

    const auto [opt_set, opt_w] = brute_force_opt(inst.feasibility, v);
    const double w = t.welfare(v);

    json line;
    line["config"] = detail::config_to_json(cfg);
    line["instance"] = instance_to_json(inst);
    line["seed"] = cfg.seed;
    line["transcript"] = transcript_to_json(t);
    if (!cfg.out_transcripts.empty()) detail::write_file(cfg.out_transcripts, line.dump() + "\n");

    out << "mechanism: " << mechanism_name(id) << "\n";
    out << "served:";
    for (int i : t.served) out << ' ' << i;
    out << "\nwelfare: " << fmt_stat(w) << "\nrevenue: " << fmt_stat(t.revenue())
        << "\nopt: " << fmt_stat(opt_w)
        << "\nratio: " << fmt_stat(w > 0.0 ? opt_w / w : std::numeric_limits<double>::infinity())
        << "\n";
    const std::string* mech_meta = t.find_meta("mechanism");
    const std::string* coin = t.find_meta("coin");
    if ((mech_meta && *mech_meta == "wfca") || (coin && *coin == "wfca")) {
        const double rstar = compute_rstar(inst.feasibility, v, prep.cfg.epsilon);
        out << "rstar: " << fmt_stat(rstar) << "\n";
        out << "welfare_ge_half_rstar: " << (w + 1e-9 >= rstar / 2.0 ? "true" : "false") << "\n";
    }
    if (!bad.empty()) {
        out << "violations: " << bad.size() << " (" << bad.front() << ")\n";
        if (cfg.strict) return kExitInvariant;
    } else {
        out << "violations: 0\n";
    }
    return kExitOk;
}

inline std::string lower_bound_text() { return lower_bound_experiment().to_text(); }

/// `eval` / `sweep`: Monte-Carlo evaluation, one CSV row per instance (one
/// per k when sweeping a named generator).
inline int cmd_eval(const ExperimentConfig& cfg, std::ostream& out) {
    require_seed(cfg);
    if (cfg.generator == "lowerbound" && !cfg.has_mechanism) {
        out << lower_bound_text();
        return kExitOk;
    }
    require(cfg.has_mechanism, "eval: --mechanism is required");
    const MechanismId id = mechanism_from_string(cfg.mechanism);

    std::vector<EvalReport> rows;
    if (!cfg.k_list.empty() && !cfg.generator.empty()) {
        rows = ratio_sweep(
            id, [&](int k) { return make_named_instance(cfg.generator, k, cfg.seed, cfg.set_size); },
            cfg.k_list, cfg.trials, cfg.seed, cfg.mech);
    } else {
        const Instance inst = resolve_instance(cfg, cfg.k_list.empty() ? 2 : cfg.k_list.front());
        if (!cfg.out_transcripts.empty()) {
            // batch mode: one JSONL line per trial, after a config line
            std::ofstream jsonl(cfg.out_transcripts, std::ios::binary | std::ios::trunc);
            require(static_cast<bool>(jsonl),
                    "cannot open output file '" + cfg.out_transcripts + "'");
            json head;
            head["config"] = detail::config_to_json(cfg);
            head["instance"] = instance_to_json(inst);
            head["seed"] = cfg.seed;
            jsonl << head.dump() << "\n";
            auto sink = [&](long trial, const Transcript& t) {
                json line;
                line["trial"] = trial;
                line["transcript"] = transcript_to_json(t);
                jsonl << line.dump() << "\n";
            };
            rows.push_back(evaluate(id, inst, cfg.trials, cfg.seed, cfg.mech, cfg.strict, sink));
        } else {
            rows.push_back(evaluate(id, inst, cfg.trials, cfg.seed, cfg.mech, cfg.strict));
        }
    }
    std::string csv = "# config: " + detail::config_to_json(cfg).dump() + "\n" + reports_to_csv(rows);
    if (!cfg.out_report.empty()) detail::write_file(cfg.out_report, csv);
    out << csv;
    if (cfg.generator == "lowerbound") out << lower_bound_text();
    for (const auto& r : rows)
        if (r.violations > 0) return kExitInvariant;
    return kExitOk;
}

/// `verify`: lemma-level statistical checks with the declared desk-scale
/// ceilings. Nonzero exit when an assertion fails.
inline int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
    require_seed(cfg);
    require(!cfg.verify_target.empty(),
            "verify: give a target (lemma3.2, lemma5.2, cor5.3, claims-appendix)");
    const int k = cfg.k_list.empty() ? 16 : cfg.k_list.front();
    if (cfg.verify_target == "lemma3.2") {
        auto rep = check_lemma32(k, cfg.verify_set_size, cfg.trials, cfg.seed);
        const bool pass = rep.frequency <= 0.01;
        out << "lemma3.2: k=" << rep.k << " set_size=" << rep.set_size << " trials=" << rep.trials
            << " t_S=" << fmt_stat(rep.threshold) << " frequency=" << fmt_stat(rep.frequency)
            << " ci=" << fmt_stat(rep.ci_half) << " ceiling=0.01 -> " << (pass ? "PASS" : "FAIL")
            << "\n";
        return pass ? kExitOk : kExitInvariant;
    }
    if (cfg.verify_target == "lemma5.2") {
        auto rep = check_lemma52(k, cfg.verify_set_size, cfg.trials, cfg.seed);
        const bool pass = rep.frequency <= 0.01;
        out << "lemma5.2: k=" << rep.k << " set_size=" << rep.set_size << " trials=" << rep.trials
            << " frequency=" << fmt_stat(rep.frequency) << " ci=" << fmt_stat(rep.ci_half)
            << " ceiling=0.01 -> " << (pass ? "PASS" : "FAIL") << "\n";
        return pass ? kExitOk : kExitInvariant;
    }
    if (cfg.verify_target == "cor5.3") {
        auto rep = check_cor53(cfg.k_list.empty() ? 8 : k, cfg.verify_set_size, cfg.trials, cfg.seed);
        const bool pass = rep.frequency >= 0.9;
        out << "cor5.3: k=" << rep.k << " set_size=" << rep.set_size << " trials=" << rep.trials
            << " conjunction_frequency=" << fmt_stat(rep.frequency) << " ci=" << fmt_stat(rep.ci_half)
            << " floor=0.9 -> " << (pass ? "PASS" : "FAIL") << "\n";
        return pass ? kExitOk : kExitInvariant;
    }
    if (cfg.verify_target == "claims-appendix") {
        bool all_ok = true;
        RngStream rng(cfg.seed);
        const int instances = 20;
        for (int i = 0; i < instances; ++i) {
            auto inst = make_discrete_random(4 + static_cast<int>(rng.next_u64() % 4), 2,
                                             rng.next_u64());
            auto rep = verify_appendix_claims(inst, cfg.trials, rng.next_u64());
            if (!rep.high_tail_ok || !rep.low_ok) {
                all_ok = false;
                out << "claims-appendix FAIL on " << inst.id << ": high_tail="
                    << fmt_stat(rep.high_tail) << " low=" << fmt_stat(rep.low.value)
                    << " auc0=" << fmt_stat(rep.auc_zero) << "\n";
            }
        }
        out << "claims-appendix: " << instances << " instances, HIGH-TAIL <= E[auc_o] and "
            << "LOW <= 12 E[auc_o] " << (all_ok ? "hold everywhere -> PASS" : "-> FAIL") << "\n";
        return all_ok ? kExitOk : kExitInvariant;
    }
    throw InputError("verify: unknown target '" + cfg.verify_target + "'");
}

inline int cmd_lowerbound(std::ostream& out) {
    out << lower_bound_text();
    return kExitOk;
}

} // namespace clockauct
