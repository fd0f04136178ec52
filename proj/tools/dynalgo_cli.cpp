// Command-line front end: workload generation, metered replay with optional
// deamortization, the dynamic-counter simulator, and offline verification.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dynalgo/counter.hpp"
#include "dynalgo/harness.hpp"

using namespace dynalgo;

namespace {

std::uint64_t env_seed() {
    const char* s = std::getenv("DYNALGO_SEED");
    return s ? std::strtoull(s, nullptr, 10) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynalgo: fully dynamic matching/spanner library harness"};
    app.require_subcommand(1);

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "generate a workload file");
    std::string g_kind = "uniform", g_out = "workload.txt";
    std::uint64_t g_n = 64, g_steps = 1000, g_rounds = 10, g_seed = env_seed();
    std::uint32_t g_k = 2, g_level = 4;
    double g_bias = 0.5;
    gen->add_option("--kind", g_kind, "uniform|matching-adversary|spanner-skew|planted");
    gen->add_option("--n", g_n);
    gen->add_option("--k", g_k);
    gen->add_option("--steps", g_steps);
    gen->add_option("--bias", g_bias);
    gen->add_option("--level", g_level);
    gen->add_option("--rounds", g_rounds);
    gen->add_option("--seed", g_seed);
    gen->add_option("--out", g_out)->required();

    // --- run ---
    auto* run = app.add_subcommand("run", "replay a workload with metering");
    RunOptions opt;
    opt.seed = env_seed();
    run->add_option("--algo", opt.algo, "matching|spanner")->required();
    run->add_option("--n", opt.n);
    run->add_option("--k", opt.k);
    run->add_option("--gen", opt.gen);
    run->add_option("--steps", opt.steps);
    run->add_option("--bias", opt.bias);
    run->add_option("--level", opt.adv_level);
    run->add_option("--rounds", opt.rounds);
    run->add_option("--workload", opt.workload_path);
    run->add_option("--seed", opt.seed);
    run->add_flag("--wrap", opt.wrap, "run behind the worst-case reduction");
    run->add_option("--copies-c", opt.copies_c);
    run->add_option("--alpha", opt.alpha, "0 = auto-calibrate");
    run->add_option("--ell", opt.ell, "0 = workload length");
    run->add_option("--verify", opt.verify, "none|every|sample:K|final");
    run->add_flag("--classic", opt.classic, "hard-threshold matching variant");
    run->add_option("--C", opt.rise_const);
    run->add_option("--filter-ell-scale", opt.filter_ell_scale);
    run->add_option("--report", opt.report_path);
    run->add_option("--csv", opt.csv_path);
    run->add_option("--dump", opt.dump_path);

    // --- counter ---
    auto* ctr = app.add_subcommand("counter", "dynamic-counter simulator");
    std::string c_dist = "geom";
    CounterSimSpec cs;
    cs.seed = env_seed();
    ctr->add_option("--dist", c_dist, "const|geom|adversarial")->required();
    ctr->add_option("--alpha", cs.alpha)->required();
    ctr->add_option("--ell", cs.ell)->required();
    ctr->add_option("--trials", cs.trials)->required();
    ctr->add_option("--seed", cs.seed);
    ctr->add_option("--r", cs.r_override, "0 = 4*alpha*ceil(log2 ell)");

    // --- verify ---
    auto* ver = app.add_subcommand("verify", "offline check of a state dump");
    std::string v_dump;
    ver->add_option("--dump", v_dump)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            Workload w;
            if (g_kind == "uniform") w = gen_uniform(g_n, g_steps, g_bias, g_seed);
            else if (g_kind == "matching-adversary") w = gen_matching_adversary(g_level, g_rounds, g_seed);
            else if (g_kind == "spanner-skew") w = gen_spanner_skew(g_n, g_k, g_seed);
            else if (g_kind == "planted") w = gen_planted_deletions(g_n, g_level, g_rounds, g_seed);
            else throw std::invalid_argument("unknown generator kind: " + g_kind);
            if (!w.validate()) throw std::runtime_error("generated workload failed validation");
            w.save(g_out);
            std::cout << "wrote " << w.ops.size() << " ops (n=" << w.n << ") to " << g_out << "\n";
        } else if (run->parsed()) {
            RunOutcome out = run_harness(opt);
            std::cout << out.report.to_json().dump(2) << "\n";
            if (out.report.verify_failed) {
                std::cerr << "verification FAILED: " << out.fail_detail << "\n";
                return 1;
            }
        } else if (ctr->parsed()) {
            cs.dist = parse_counter_dist(c_dist);
            CounterSimResult res = simulate_counter(cs);
            json j;
            j["r"] = res.r;
            j["trace"] = res.trace;
            j["final_prob_zero"] = res.final_prob_zero;
            std::cout << j.dump() << "\n";
        } else if (ver->parsed()) {
            OracleResult r = verify_dump(v_dump);
            std::cout << (r.ok ? "PASS" : "FAIL: " + r.what) << "\n";
            return r.ok ? 0 : 1;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
