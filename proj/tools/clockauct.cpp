#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clockauct/cli.hpp"

using namespace clockauct;

namespace {

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& seed_str) {
    // consumed by the pre-scan in main(); registered here so parsing accepts it
    cmd->add_option(
        "--config", [](const CLI::results_t&) { return true; },
        "experiment config JSON file (flags override)");
    cmd->add_option("--instance", cfg.instance_path, "instance JSON file");
    cmd->add_option("--inline", cfg.instance_inline, "instance JSON given inline");
    cmd->add_option("--generator", cfg.generator,
                    "named family: disjoint-iid-uniform, pointmass, binary-random, "
                    "knapsack-random, mixed-random, lowerbound");
    cmd->add_option("--set-size", cfg.set_size, "bidders per set for generated families");
    cmd->add_option("--seed", seed_str, "master seed (fallback: CLOCKAUCT_SEED)");
    cmd->add_option("--trials", cfg.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    cmd->add_option("--k", cfg.k_list, "k values (comma separated for sweeps)")->delimiter(',');
    cmd->add_option("--epsilon", cfg.mech.epsilon, "water-filling grid step");
    cmd->add_option("--delta", cfg.mech.delta_step, "uniform ascending increment");
    cmd->add_option("--price-cap", cfg.mech.price_cap, "clock price cap");
    cmd->add_flag("--grid", cfg.mech.sampling_grid, "grid-quantized sampling reveals");
    cmd->add_flag("--strict", cfg.strict, "abort on any invariant violation");
}

void finalize_seed(ExperimentConfig& cfg, const std::string& seed_str) {
    if (!seed_str.empty()) {
        cfg.seed = std::stoull(seed_str);
        cfg.has_seed = true;
    } else if (const char* env = std::getenv("CLOCKAUCT_SEED")) {
        cfg.seed = std::stoull(env);
        cfg.has_seed = true;
    }
    cfg.mech.seed = cfg.seed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"clockauct: deferred-acceptance clock auction simulations"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string seed_str;
    std::string mechanism;

    // A JSON config provides defaults; explicit flags override it, so it is
    // applied before CLI11 binds any flag values.
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc)
                load_config_file(argv[i + 1], cfg);
            else if (arg.rfind("--config=", 0) == 0)
                load_config_file(arg.substr(9), cfg);
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }

    auto* run = app.add_subcommand("run", "run one mechanism on one valuation");
    add_common_options(run, cfg, seed_str);
    run->add_option("--mechanism", mechanism, "mechanism id");
    run->add_option("--valuation", cfg.valuation_json, "fixed valuation (JSON array)");
    run->add_option("--out", cfg.out_transcripts, "transcript JSONL path");

    auto* eval = app.add_subcommand("eval", "Monte-Carlo evaluation against the OPT oracle");
    add_common_options(eval, cfg, seed_str);
    eval->add_option("--mechanism", mechanism, "mechanism id");
    eval->add_option("--out", cfg.out_report, "report CSV path");
    eval->add_option("--out-transcripts", cfg.out_transcripts, "per-trial transcript JSONL path");

    auto* sweep = app.add_subcommand("sweep", "ratio sweep over k (eval with --k list)");
    add_common_options(sweep, cfg, seed_str);
    sweep->add_option("--mechanism", mechanism, "mechanism id");
    sweep->add_option("--out", cfg.out_report, "report CSV path");

    auto* verify = app.add_subcommand("verify", "statistical lemma/claim checks");
    verify->add_option("target", cfg.verify_target,
                       "lemma3.2 | lemma5.2 | cor5.3 | claims-appendix")
        ->required();
    add_common_options(verify, cfg, seed_str);
    verify->add_option("--verify-set-size", cfg.verify_set_size, "bidders per set");

    auto* lowerbound = app.add_subcommand("lowerbound", "exact lower-bound reproduction");
    (void)lowerbound;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        finalize_seed(cfg, seed_str);
        if (!mechanism.empty()) {
            cfg.mechanism = mechanism;
            cfg.has_mechanism = true;
        }
        if (run->parsed()) return cmd_run(cfg, std::cout);
        if (eval->parsed()) return cmd_eval(cfg, std::cout);
        if (sweep->parsed()) {
            require(!cfg.k_list.empty(), "sweep: --k list is required");
            require(!cfg.generator.empty(), "sweep: --generator is required");
            return cmd_eval(cfg, std::cout);
        }
        if (verify->parsed()) return cmd_verify(cfg, std::cout);
        if (lowerbound->parsed()) return cmd_lowerbound(std::cout);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ContractViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const AbortError& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
