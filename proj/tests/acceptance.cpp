// Acceptance suite: one criterion per function, one PASS/FAIL line each,
// nonzero exit if any selected criterion fails. Run with a criterion number
// (1..10) or no argument for the full suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "clockauct/cli.hpp"
#include "clockauct/evaluation.hpp"
#include "clockauct/generators.hpp"
#include "clockauct/mechanisms.hpp"

using namespace clockauct;

namespace {

struct Check {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
    void expect(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

std::pair<BidderSet, double> exhaustive_all_subsets(const FeasibilitySystem& sys,
                                                    const Valuation& v) {
    const int n = sys.n();
    BidderSet best;
    double best_w = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        BidderSet s;
        double w = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                s.push_back(i);
                w += v[static_cast<std::size_t>(i)];
            }
        if (!sys.is_feasible(s)) continue;
        if (best_w < 0.0 || beats(w, s, best_w, best)) {
            best_w = w;
            best = s;
        }
    }
    return {best, std::max(best_w, 0.0)};
}

// 1. Exact reproduction of the lower-bound numbers.
Check criterion1() {
    Check c;
    auto rep = lower_bound_experiment();
    c.expect(rep.opt == Rational(58, 45), "E[OPT] != 58/45, got " + rep.opt.str());
    c.expect(rep.serve_t == Rational(54, 45), "serve-T welfare != 54/45, got " + rep.serve_t.str());
    c.expect(rep.raise_clock == Rational(54, 45),
             "raise-clock welfare != 54/45, got " + rep.raise_clock.str());
    c.expect(rep.ratio == Rational(29, 27), "ratio != 29/27, got " + rep.ratio.str());
    c.detail = c.ok ? "E[OPT]=58/45 serve-T=54/45 raise-clock=54/45 ratio=29/27" : c.detail;
    return c;
}

// 2. Binary optimality on 200 random downward-closed instances.
Check criterion2() {
    Check c;
    RngStream rng(20001);
    for (int iter = 0; iter < 200 && c.ok; ++iter) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 9); // n <= 10
        auto inst = make_binary_random(n, 8, rng.next_u64());
        RngStream vr(rng.next_u64());
        const Valuation v = inst.sample_valuation(vr);
        Transcript t = run_binary_optimal(inst.feasibility, v);
        const double opt = brute_force_opt(inst.feasibility, v).second;
        c.expect(t.welfare(v) == opt, "welfare != OPT on instance " + std::to_string(iter));
        c.expect(check_transcript(t, inst.feasibility, v).empty(), "transcript violation");
    }
    if (c.ok) c.detail = "welfare = OPT on all 200 instances";
    return c;
}

// 3. Bounded-support auction earns at least OPT / l, exactly.
Check criterion3() {
    Check c;
    RngStream rng(30003);
    int done = 0;
    while (done < 100 && c.ok) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 6); // n <= 8
        auto inst = make_discrete_random(n, 2 + static_cast<int>(rng.next_u64() % 2), rng.next_u64());
        std::size_t ell = 0;
        for (const auto& d : inst.distributions) ell = std::max(ell, d.support()->size());
        if (ell < 2) continue; // family is l in {2, 3}
        ++done;
        auto auction = run_bounded_support(inst, 10, rng.next_u64());
        c.expect(auction.best().objective.exact, "candidate revenue was not enumerated exactly");
        auto welfare = detail::single_price_expected_welfare(inst, auction.best().prices,
                                                             auction.best().selection,
                                                             auction.best().preferred, 10, 1);
        auto opt = estimate_opt(inst, 10, 1);
        c.expect(welfare.exact && opt.exact, "joint-support enumeration unavailable");
        c.expect(welfare.value >= opt.value / static_cast<double>(ell) - 1e-9,
                 "expected welfare below OPT/l on " + inst.id);
        for (const auto& cand : auction.candidates)
            c.expect(auction.best().objective.value >= cand.objective.value - 1e-12,
                     "selected candidate is not the revenue argmax");
    }
    if (c.ok) c.detail = "chosen level earns >= OPT/l on all 100 instances (exact)";
    return c;
}

// 4. WFCA clears r*/2 on every one of 500 random runs.
Check criterion4() {
    Check c;
    RngStream rng(40004);
    for (int iter = 0; iter < 500 && c.ok; ++iter) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 11); // n <= 12
        auto inst = make_mixed_random(n, rng.next_u64());
        auto cfg = resolve_config({}, inst);
        RngStream vr(rng.next_u64());
        const Valuation v = inst.sample_valuation(vr);
        Transcript t = run_wfca(inst.feasibility, v, cfg);
        const double rstar = compute_rstar(inst.feasibility, v, cfg.epsilon);
        c.expect(t.welfare(v) + 1e-9 >= rstar / 2.0,
                 "welfare " + fmt_stat(t.welfare(v)) + " < r*/2 = " + fmt_stat(rstar / 2.0) +
                     " on run " + std::to_string(iter));
        c.expect(check_transcript(t, inst.feasibility, v).empty(), "transcript violation");
    }
    if (c.ok) c.detail = "welfare >= r*/2 on all 500 runs";
    return c;
}

// 5. Transcript invariant suite: 10^4 runs across all mechanisms.
Check criterion5() {
    Check c;
    long violations = 0;
    long runs = 0;
    auto tally = [&](const EvalReport& rep) {
        violations += rep.violations;
        runs += rep.trials;
    };
    RngStream rng(50005);
    // 1250 runs per mechanism, spread over a few instances each
    for (int block = 0; block < 5; ++block) {
        const long trials = 250;
        const std::uint64_t s = rng.next_u64();
        tally(evaluate(MechanismId::BinaryOptimal, make_binary_random(8, 6, s), trials, s));
        tally(evaluate(MechanismId::Theorem1, make_discrete_random(7, 3, s), trials, s, {}));
        tally(evaluate(MechanismId::Theorem1R, make_discrete_random(6, 2, s + 1), trials, s));
        tally(evaluate(MechanismId::Mechanism2, make_mixed_random(8, s, true), trials, s));
        tally(evaluate(MechanismId::Wfca, make_mixed_random(9, s + 2), trials, s));
        tally(evaluate(MechanismId::Sampling, make_mixed_random(9, s + 3), trials, s));
        tally(evaluate(MechanismId::Hedging, make_mixed_random(9, s + 4), trials, s));
        tally(evaluate(MechanismId::BoundedSupport, make_discrete_random(6, 3, s + 5), trials, s));
    }
    c.expect(runs >= 10000, "only " + std::to_string(runs) + " runs executed");
    c.expect(violations == 0, std::to_string(violations) + " invariant violations");
    if (c.ok) c.detail = std::to_string(runs) + " runs, 0 violations";
    return c;
}

// 6. Concentration ceilings at the declared desk scale.
Check criterion6() {
    Check c;
    auto l32 = check_lemma32(16, 200, 10000, 60006);
    c.expect(l32.frequency <= 0.01,
             "lemma 3.2 frequency " + fmt_stat(l32.frequency) + " above 0.01");
    auto c53 = check_cor53(8, 200, 10000, 60007);
    c.expect(c53.frequency >= 0.9,
             "cor 5.3 conjunction frequency " + fmt_stat(c53.frequency) + " below 0.9");
    if (c.ok)
        c.detail = "lemma3.2 freq=" + fmt_stat(l32.frequency) +
                   " (<=0.01), cor5.3 freq=" + fmt_stat(c53.frequency) + " (>=0.9)";
    return c;
}

// 7. Zero-price coverage claims, exactly, on 50 random discrete instances.
Check criterion7() {
    Check c;
    RngStream rng(70007);
    for (int iter = 0; iter < 50 && c.ok; ++iter) {
        auto inst = make_discrete_random(4 + static_cast<int>(rng.next_u64() % 4), 2, rng.next_u64());
        auto rep = verify_appendix_claims(inst, 50, rng.next_u64());
        c.expect(rep.low.exact, "joint enumeration unavailable on " + inst.id);
        c.expect(rep.high_tail_ok, "HIGH-TAIL > E[auc_o] on " + inst.id);
        c.expect(rep.low_ok, "LOW > 12 E[auc_o] on " + inst.id);
    }
    if (c.ok) c.detail = "HIGH-TAIL <= E[auc_o] and LOW <= 12 E[auc_o] on all 50 instances";
    return c;
}

// 8. Oracle soundness: both exact routes agree with exhaustive search.
Check criterion8() {
    Check c;
    RngStream rng(80008);
    for (int iter = 0; iter < 500 && c.ok; ++iter) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 11); // n <= 12
        auto inst = make_mixed_random(n, rng.next_u64());
        RngStream vr(rng.next_u64());
        const Valuation v = inst.sample_valuation(vr);
        const double fast = brute_force_opt(inst.feasibility, v).second;
        const double slow = exhaustive_all_subsets(inst.feasibility, v).second;
        c.expect(fast == slow, "oracle mismatch on instance " + std::to_string(iter));
    }
    RngStream krng(80009);
    for (int iter = 0; iter < 150 && c.ok; ++iter) {
        const int n = 1 + static_cast<int>(krng.next_u64() % 16); // n <= 16
        std::vector<double> demands(static_cast<std::size_t>(n));
        std::vector<double> weights(static_cast<std::size_t>(n));
        for (auto& d : demands) d = 0.05 + 0.95 * krng.uniform01();
        for (auto& w : weights) w = krng.coin() ? 5.0 * krng.uniform01() : 0.0;
        auto sys = FeasibilitySystem::from_knapsack(demands);
        auto got = sys.max_weight_feasible_subset(all_bidders(n), weights);
        // exhaustive route with the same tie-break
        BidderSet best;
        double best_w = -1.0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double load = 0.0, w = 0.0;
            BidderSet s;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) {
                    load += demands[static_cast<std::size_t>(i)];
                    w += weights[static_cast<std::size_t>(i)];
                    s.push_back(i);
                }
            if (load > 1.0 + kKnapsackEps) continue;
            if (best_w < 0.0 || beats(w, s, best_w, best)) {
                best_w = w;
                best = s;
            }
        }
        c.expect(got.first == best && got.second == best_w,
                 "branch-and-bound mismatch at n = " + std::to_string(n));
    }
    if (c.ok) c.detail = "maximal-set oracle (500) and knapsack B&B (150) match exhaustive search";
    return c;
}

// 9. Ratio sweeps stay finite and under the sanity ceiling.
Check criterion9() {
    Check c;
    const std::vector<int> ks = {2, 4, 8, 16, 32, 64};
    const long trials = 10000;
    auto family = [](int k) { return make_disjoint_iid_uniform(k, 8); };
    auto ceiling = [](int k) {
        return 10.0 * (1.0 + std::log2(std::log2(std::max(static_cast<double>(k), 4.0))));
    };
    std::ostringstream curve;
    for (MechanismId id : {MechanismId::Theorem1, MechanismId::Mechanism2, MechanismId::Hedging}) {
        auto rows = ratio_sweep(id, family, ks, trials, 90009);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            c.expect(std::isfinite(r.ratio), mechanism_name(id) + " ratio not finite at k=" +
                                                 std::to_string(ks[i]));
            c.expect(r.ratio <= ceiling(ks[i]),
                     mechanism_name(id) + " ratio " + fmt_stat(r.ratio) + " above ceiling at k=" +
                         std::to_string(ks[i]));
            c.expect(r.violations == 0, mechanism_name(id) + " transcript violations at k=" +
                                            std::to_string(ks[i]));
            curve << ' ' << mechanism_name(id) << "@k" << ks[i] << '=' << fmt_stat(r.ratio);
        }
    }
    if (c.ok) c.detail = "ratios" + curve.str();
    return c;
}

// 10. Byte-identical reports and transcripts under identical configs.
Check criterion10() {
    Check c;
    auto inst = make_disjoint_iid_uniform(3, 4);
    auto r1 = evaluate(MechanismId::Hedging, inst, 200, 101010);
    auto r2 = evaluate(MechanismId::Hedging, inst, 200, 101010);
    c.expect(r1.csv_row() == r2.csv_row(), "evaluation reports differ between runs");

    ExperimentConfig cfg;
    cfg.generator = "mixed-random";
    cfg.k_list = {6};
    cfg.mechanism = "hedging";
    cfg.has_mechanism = true;
    cfg.seed = 4242;
    cfg.has_seed = true;
    const auto dir = std::filesystem::temp_directory_path() / "clockauct_acceptance";
    std::filesystem::create_directories(dir);
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
        cfg.out_transcripts = (dir / ("t" + std::to_string(rep) + ".jsonl")).string();
        std::ostringstream out;
        if (cmd_run(cfg, out) != kExitOk) c.fail("cmd_run failed");
        std::ifstream in(cfg.out_transcripts, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        bytes[rep] = buf.str();
    }
    c.expect(!bytes[0].empty() && bytes[0] == bytes[1], "transcript files differ between runs");
    if (c.ok) c.detail = "reports and transcript files byte-identical";
    return c;
}

struct Criterion {
    int number;
    const char* title;
    double budget_seconds;
    std::function<Check()> fn;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "lower-bound reproduction (exact rationals)", 1.0, criterion1},
        {2, "binary optimality on 200 random instances", 10.0, criterion2},
        {3, "bounded-support l-approximation (exact)", 60.0, criterion3},
        {4, "wfca welfare >= r*/2 on 500 runs", 60.0, criterion4},
        {5, "transcript invariants over 10^4 runs", 120.0, criterion5},
        {6, "concentration ceilings (lemma 3.2, cor 5.3)", 300.0, criterion6},
        {7, "appendix claims on 50 discrete instances", 60.0, criterion7},
        {8, "oracle soundness vs exhaustive search", 60.0, criterion8},
        {9, "ratio sweeps under the log-log ceiling", 600.0, criterion9},
        {10, "byte-identical reports and transcripts", 10.0, criterion10},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    bool all_ok = true;
    for (const auto& crit : criteria) {
        if (only != 0 && crit.number != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Check result;
        try {
            result = crit.fn();
        } catch (const std::exception& e) {
            result.fail(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > crit.budget_seconds)
            result.fail("runtime " + fmt_stat(secs) + "s exceeds budget " +
                        fmt_stat(crit.budget_seconds) + "s");
        std::printf("[%s] C%-2d %s (%.2fs) %s\n", result.ok ? "PASS" : "FAIL", crit.number,
                    crit.title, secs, result.detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && result.ok;
    }
    return all_ok ? 0 : 1;
}
