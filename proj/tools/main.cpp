// Command-line front end: run (full experiment grid), sweep-gamma
// (perturbation-radius study), verify-theory (analytic bound checks),
// report (plot-ready CSVs and a text summary from saved metrics).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpadapter/harness.hpp"
#include "dpadapter/theory.hpp"

using namespace dpadapter;

namespace {

ExperimentConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return parse_experiment_config(json::object());
    return load_experiment_config(path);
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds,
                     const std::string& output_dir, std::size_t workers) {
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (workers > 0) cfg.workers = workers;
}

int cmd_run(const ExperimentConfig& cfg) {
    ExperimentOutput out = run_experiment(cfg);
    std::size_t failed = 0;
    for (const auto& c : out.cells)
        if (c.failed) {
            ++failed;
            std::cerr << "cell failed: " << c.run_id << ": " << c.error << "\n";
        }
    emit_tradeoff_plotdata(out.metrics_path, cfg.output_dir + "/plots");
    std::cout << "metrics: " << out.metrics_path << "\n";
    std::cout << "summary: " << out.summary_path << "\n";
    std::cout << "cells: " << out.cells.size() - failed << " ok, " << failed << " failed\n";
    return failed == 0 ? 0 : 1;
}

int cmd_sweep_gamma(const ExperimentConfig& cfg, const std::vector<double>& gammas) {
    auto rows = run_gamma_sweep(cfg, gammas);
    emit_plotdata(cfg.output_dir + "/gamma_sweep.csv", cfg.output_dir + "/plots");
    std::cout << kSweepHeader << "\n";
    for (const auto& r : rows)
        std::printf("%g,%llu,%.4f,%.4f,%.4f,%.4f\n", r.gamma,
                    static_cast<unsigned long long>(r.seed), r.upstream_accuracy,
                    r.upstream_robust_accuracy, r.downstream_accuracy,
                    r.downstream_robust_accuracy);
    std::cout << "sweep: " << cfg.output_dir << "/gamma_sweep.csv\n";
    return 0;
}

int cmd_verify_theory(std::uint64_t seed) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
        if (!ok) ++failures;
    };

    // decoupled-batch convergence bound on the quadratic family
    auto obj = QuadraticObjective::make(256, 8, 2.0, seed);
    std::vector<double> theta0(8, 0.7);
    std::vector<std::size_t> b1_sizes = {1, 4, 16, 64, 256};
    auto sweep = run_decoupled_sam_sweep(obj, b1_sizes, 128, 2000, 5, theta0, seed);
    std::cout << "b1_size,mean_suboptimality,std_suboptimality,analytic_bound\n";
    for (const auto& p : sweep)
        std::printf("%zu,%.6f,%.6f,%.6f\n", p.b1_size, p.mean_suboptimality,
                    p.std_suboptimality, p.analytic_bound);
    bool bounded = true, bound_drops = true;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (sweep[i].mean_suboptimality > sweep[i].analytic_bound) bounded = false;
        if (i > 0 && sweep[i].analytic_bound >= sweep[i - 1].analytic_bound) bound_drops = false;
    }
    check(bounded, "measured suboptimality stays below the analytic bound");
    check(bound_drops, "analytic bound strictly decreases with the perturbation batch size");
    std::vector<double> b1d, sub;
    for (const auto& p : sweep) {
        b1d.push_back(static_cast<double>(p.b1_size));
        sub.push_back(p.mean_suboptimality);
    }
    check(spearman(b1d, sub) <= 0.0,
          "suboptimality does not increase with the perturbation batch size");

    // private utility degrades as the parameter-robustness constant grows
    std::vector<double> rhos = {0.5, 1.0, 2.0, 4.0};
    auto rho_sweep = run_rho_utility_sweep(rhos, 1.0, 24, 4, 6, seed);
    std::cout << "rho,mean_suboptimality,std_suboptimality\n";
    for (const auto& p : rho_sweep)
        std::printf("%g,%.6f,%.6f\n", p.rho, p.mean_suboptimality, p.std_suboptimality);
    std::size_t worse_pairs = 0, total_pairs = 0;
    for (std::size_t i = 1; i < rho_sweep.size(); ++i)
        for (std::size_t s = 0; s < rho_sweep[i].per_seed.size(); ++s) {
            ++total_pairs;
            if (rho_sweep[i].per_seed[s] >= rho_sweep[i - 1].per_seed[s]) ++worse_pairs;
        }
    check(2 * worse_pairs >= total_pairs,
          "paired seeds: larger rho degrades private utility at least half the time");
    std::vector<double> ms;
    for (const auto& p : rho_sweep) ms.push_back(p.mean_suboptimality);
    check(ms.back() > ms.front(), "mean suboptimality is worse at the largest rho");

    return failures == 0 ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    std::string metrics = dir + "/metrics.csv";
    std::string sweep = dir + "/gamma_sweep.csv";
    bool any = false;
    if (std::filesystem::exists(metrics)) {
        emit_tradeoff_plotdata(metrics, dir + "/plots");
        any = true;
    }
    if (std::filesystem::exists(sweep)) {
        emit_plotdata(sweep, dir + "/plots");
        any = true;
    }
    if (!any) {
        std::cerr << "report: neither " << metrics << " nor " << sweep << " exists\n";
        return 1;
    }
    std::string summary = dir + "/summary.csv";
    if (std::filesystem::exists(summary)) {
        CsvTable t = read_csv(summary);
        for (const auto& h : t.header) std::cout << h << "  ";
        std::cout << "\n";
        for (const auto& row : t.rows) {
            for (const auto& cell : row) std::cout << cell << "  ";
            std::cout << "\n";
        }
    }
    std::cout << "plots written to " << dir << "/plots\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noise-tolerance pre-training and private fine-tuning harness"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    std::vector<std::uint64_t> seeds;
    std::size_t workers = 0;
    std::vector<double> gammas = {0.0, 0.5, 1.0, 2.0, 4.0};
    std::uint64_t theory_seed = 7;
    std::string report_dir = "out";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)");
        sub->add_option("--seeds", seeds, "seed list override");
        sub->add_option("--output", output_dir, "output directory override");
        sub->add_option("--workers", workers, "worker thread count override");
    };

    CLI::App* run = app.add_subcommand("run", "full pre-train / fine-tune grid");
    add_common(run);
    CLI::App* sg = app.add_subcommand("sweep-gamma", "perturbation-radius sweep");
    add_common(sg);
    sg->add_option("--gammas", gammas, "gamma values to sweep");
    CLI::App* vt = app.add_subcommand("verify-theory", "analytic bound and trend checks");
    vt->add_option("--seed", theory_seed, "base seed");
    CLI::App* rep = app.add_subcommand("report", "plot CSVs and summary from saved metrics");
    rep->add_option("--dir", report_dir, "directory holding metrics.csv / gamma_sweep.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ExperimentConfig cfg = load_config_or_default(config_path);
            apply_overrides(cfg, seeds, output_dir, workers);
            return cmd_run(cfg);
        }
        if (sg->parsed()) {
            ExperimentConfig cfg = load_config_or_default(config_path);
            apply_overrides(cfg, seeds, output_dir, workers);
            return cmd_sweep_gamma(cfg, gammas);
        }
        if (vt->parsed()) return cmd_verify_theory(theory_seed);
        if (rep->parsed()) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
