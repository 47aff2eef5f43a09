#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dpadapter/checkpoint.hpp"
#include "dpadapter/config.hpp"
#include "dpadapter/data.hpp"
#include "dpadapter/finetune.hpp"
#include "dpadapter/pretrain.hpp"
#include "dpadapter/robustness.hpp"
#include "dpadapter/stats.hpp"

namespace dpadapter {

// ---- metrics rows ----

struct MetricsRow {
    std::string run_id;
    std::uint64_t seed = 0;
    std::string phase;  // pretrain | finetune | eval
    std::size_t epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    double robust_accuracy = 0.0;
    double epsilon_spent = 0.0;
    double wall_time = 0.0;  // deterministic placeholder; real timings in timings.txt
};

inline const char* kMetricsHeader =
    "run_id,seed,phase,epoch,loss,accuracy,robust_accuracy,epsilon_spent,wall_time";

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string to_csv(const MetricsRow& r) {
    std::ostringstream os;
    os << r.run_id << ',' << r.seed << ',' << r.phase << ',' << r.epoch << ','
       << format_double(r.loss) << ',' << format_double(r.accuracy) << ','
       << format_double(r.robust_accuracy) << ',' << format_double(r.epsilon_spent) << ','
       << format_double(r.wall_time);
    return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable t;
    std::string line;
    if (std::getline(in, line)) t.header = split_csv_line(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split_csv_line(line));
    return t;
}

// ---- task and pre-training ----

inline TransferTask build_task(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.task_kind == "synthetic")
        return make_synthetic_transfer(seed, cfg.relation, cfg.synthetic);
    // idx: one real dataset split 90/10 upstream/downstream plus a test slice
    Dataset full = load_idx_dataset(cfg.idx_images, cfg.idx_labels);
    std::size_t n = full.size();
    std::size_t n_test = n / 10;
    std::size_t n_down = n / 10;
    std::size_t n_up = n - n_down - n_test;
    Rng rng(derive_seed(seed, 0x1D1));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
    auto slice = [&](std::size_t lo, std::size_t hi, const std::string& name) {
        std::vector<std::size_t> idx(perm.begin() + lo, perm.begin() + hi);
        Dataset d;
        d.name = name;
        d.features = full.rows_of(idx);
        d.labels = full.labels_of(idx);
        return d;
    };
    TransferTask task;
    task.relation = TransferRelation::IidSplit;
    task.upstream = slice(0, n_up, "upstream");
    task.downstream_train = slice(n_up, n_up + n_down, "downstream_train");
    task.downstream_test = slice(n_up + n_down, n, "downstream_test");
    return task;
}

inline std::vector<std::size_t> model_dims(const ExperimentConfig& cfg, const TransferTask& task) {
    std::vector<std::size_t> dims;
    dims.push_back(task.upstream.input_dim());
    for (std::size_t h : cfg.hidden) dims.push_back(h);
    dims.push_back(static_cast<std::size_t>(
        std::max(task.upstream.num_classes(), task.downstream_train.num_classes())));
    return dims;
}

inline ModelParams run_pretrain(const ExperimentConfig& cfg, const TransferTask& task,
                                PretrainMethod method, std::uint64_t seed) {
    ModelParams init = ModelParams::init_random(model_dims(cfg, task), seed);
    switch (method) {
        case PretrainMethod::Scratch:
            return init;
        case PretrainMethod::Standard:
            return train_standard(task.upstream, cfg.pretrain, seed, std::move(init));
        case PretrainMethod::VanillaSam: {
            PretrainConfig pc = cfg.pretrain;
            pc.gamma = cfg.sam_gamma;
            return train_vanilla_sam(task.upstream, pc, seed, std::move(init));
        }
        case PretrainMethod::DpAdapter:
            return train_dpadapter(task.upstream, cfg.pretrain, seed, std::move(init));
    }
    throw std::logic_error("run_pretrain: bad method");
}

// ---- experiment grid ----

struct CellResult {
    std::string run_id;
    PretrainMethod method;
    DpAlgorithm algorithm;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double accuracy = 0.0;
    double robust_accuracy = 0.0;
    double epsilon_spent = 0.0;
    std::vector<MetricsRow> rows;
    std::string accountant_report;
};

struct ExperimentOutput {
    std::vector<MetricsRow> metrics;
    std::vector<CellResult> cells;
    std::string metrics_path;
    std::string summary_path;
};

namespace detail {

inline std::string eps_tag(double eps) {
    std::string s = format_double(eps);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

inline std::string accountant_text(const FinetuneResult& fr) {
    std::ostringstream os;
    os << "accountant report\n";
    os << "  sampling_rate q = " << format_double(fr.accountant.sampling_rate) << "\n";
    os << "  steps = " << fr.accountant.steps << "\n";
    os << "  chosen order alpha = " << fr.conversion_order << "\n";
    os << "  final epsilon = " << format_double(fr.final_epsilon)
       << " (target " << format_double(fr.target_epsilon) << ")\n";
    os << "  per-order ledger:\n";
    for (std::size_t i = 0; i < fr.accountant.orders.size(); ++i)
        os << "    alpha=" << fr.accountant.orders[i] << " rdp="
           << format_double(fr.accountant.rdp_ledger[i]) << "\n";
    return os.str();
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w)
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Runs the full grid (seed x pretrain method x algorithm x epsilon), writes
// metrics.csv, summary.csv, per-method checkpoints and accountant reports.
// Pre-trained checkpoints are shared across algorithms and budgets.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    fs::create_directories(cfg.output_dir + "/checkpoints");
    fs::create_directories(cfg.output_dir + "/reports");

    auto t_start = std::chrono::steady_clock::now();

    // one task per seed
    std::vector<TransferTask> tasks;
    tasks.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) tasks.push_back(build_task(cfg, seed));

    // pre-train each (seed, method) once
    struct PretrainJob {
        std::size_t seed_idx;
        PretrainMethod method;
        ModelParams model;
        MetricsRow row;
    };
    std::vector<PretrainJob> pjobs;
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si)
        for (PretrainMethod m : cfg.pretrain_methods) pjobs.push_back({si, m, {}, {}});
    detail::parallel_for(pjobs.size(), cfg.workers, [&](std::size_t i) {
        auto& job = pjobs[i];
        std::uint64_t seed = cfg.seeds[job.seed_idx];
        const TransferTask& task = tasks[job.seed_idx];
        job.model = run_pretrain(cfg, task, job.method, seed);
        auto rep = robust_accuracy(job.model, task.upstream, cfg.robustness.noise_std,
                                   cfg.robustness.trials, derive_seed(seed, 0xE7A1));
        job.row.run_id = "pretrain-" + to_string(job.method) + "-seed" + std::to_string(seed);
        job.row.seed = seed;
        job.row.phase = "pretrain";
        job.row.epoch = cfg.pretrain.iterations;
        job.row.loss = loss_only(job.model, task.upstream.features, task.upstream.labels);
        job.row.accuracy = rep.clean_accuracy;
        job.row.robust_accuracy = rep.robust_accuracy;
    });
    std::map<std::pair<std::size_t, PretrainMethod>, const ModelParams*> pretrained;
    for (auto& j : pjobs) {
        pretrained[{j.seed_idx, j.method}] = &j.model;
        save_checkpoint(cfg.output_dir + "/checkpoints/" + j.row.run_id + ".ckpt", j.model,
                        cfg.config_hash);
    }

    // fine-tune grid
    std::vector<CellResult> cells;
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si)
        for (PretrainMethod m : cfg.pretrain_methods)
            for (DpAlgorithm a : cfg.algorithms)
                for (double eps : cfg.epsilons) {
                    CellResult c;
                    c.method = m;
                    c.algorithm = a;
                    c.epsilon = eps;
                    c.seed = cfg.seeds[si];
                    c.run_id = "ft-" + to_string(m) + "-" + to_string(a) + "-eps" +
                               detail::eps_tag(eps) + "-seed" + std::to_string(c.seed);
                    cells.push_back(std::move(c));
                }

    detail::parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        CellResult& c = cells[i];
        std::size_t si = 0;
        while (cfg.seeds[si] != c.seed) ++si;
        const TransferTask& task = tasks[si];
        try {
            FinetuneSetup setup;
            setup.algorithm = c.algorithm;
            setup.base = cfg.finetune;
            setup.adpclip = cfg.adpclip;
            setup.gep = cfg.gep;
            PrivacySpec spec{c.epsilon, cfg.delta};
            const ModelParams& init = *pretrained.at({si, c.method});
            // the fine-tune seed ignores the pretrain method, so comparisons
            // between initializations share lot draws and noise realizations
            std::size_t ai = 0;
            while (cfg.algorithms[ai] != c.algorithm) ++ai;
            std::size_t ei = 0;
            while (cfg.epsilons[ei] != c.epsilon) ++ei;
            std::uint64_t ft_seed =
                derive_seed(c.seed, 0xCE11 + ai * cfg.epsilons.size() + ei);
            FinetuneResult fr = finetune(init, task.downstream_train, task.downstream_test, spec,
                                         setup, ft_seed, &task.upstream);
            for (const auto& em : fr.history) {
                MetricsRow r;
                r.run_id = c.run_id;
                r.seed = c.seed;
                r.phase = "finetune";
                r.epoch = em.epoch;
                r.loss = em.train_loss;
                r.accuracy = em.test_accuracy;
                r.epsilon_spent = em.epsilon_spent;
                c.rows.push_back(r);
            }
            auto rep = robust_accuracy(fr.model, task.downstream_test, cfg.robustness.noise_std,
                                       cfg.robustness.trials, derive_seed(c.seed, 0xE7A2));
            MetricsRow er;
            er.run_id = c.run_id;
            er.seed = c.seed;
            er.phase = "eval";
            er.epoch = cfg.finetune.epochs;
            er.loss = loss_only(fr.model, task.downstream_test.features, task.downstream_test.labels);
            er.accuracy = rep.clean_accuracy;
            er.robust_accuracy = rep.robust_accuracy;
            er.epsilon_spent = fr.final_epsilon;
            c.rows.push_back(er);
            c.accuracy = rep.clean_accuracy;
            c.robust_accuracy = rep.robust_accuracy;
            c.epsilon_spent = fr.final_epsilon;
            c.accountant_report = detail::accountant_text(fr);
            if (fr.final_epsilon > c.epsilon)
                throw std::runtime_error("privacy budget overrun");
        } catch (const std::exception& e) {
            c.failed = true;
            c.error = e.what();
        }
    });

    ExperimentOutput out;
    for (const auto& j : pjobs) out.metrics.push_back(j.row);
    for (const auto& c : cells) {
        for (const auto& r : c.rows) out.metrics.push_back(r);
        if (!c.accountant_report.empty()) {
            std::ofstream rep(cfg.output_dir + "/reports/" + c.run_id + ".txt");
            rep << c.accountant_report;
        }
    }
    out.cells = cells;

    out.metrics_path = cfg.output_dir + "/metrics.csv";
    {
        std::ofstream mf(out.metrics_path);
        mf << kMetricsHeader << "\n";
        for (const auto& r : out.metrics) mf << to_csv(r) << "\n";
    }

    // summary in methods x budgets layout, mean over seeds
    out.summary_path = cfg.output_dir + "/summary.csv";
    {
        std::ofstream sf(out.summary_path);
        sf << "algorithm,epsilon,method,mean_accuracy,std_accuracy,mean_robust_accuracy,"
              "n_seeds,status\n";
        for (DpAlgorithm a : cfg.algorithms)
            for (double eps : cfg.epsilons)
                for (PretrainMethod m : cfg.pretrain_methods) {
                    std::vector<double> accs, raccs;
                    bool any_failed = false;
                    for (const auto& c : cells)
                        if (c.algorithm == a && c.epsilon == eps && c.method == m) {
                            if (c.failed) {
                                any_failed = true;
                            } else {
                                accs.push_back(c.accuracy);
                                raccs.push_back(c.robust_accuracy);
                            }
                        }
                    sf << to_string(a) << ',' << format_double(eps) << ',' << to_string(m) << ',';
                    if (accs.empty()) {
                        sf << ",,,0,failed\n";
                    } else {
                        sf << format_double(mean(accs)) << ',' << format_double(stddev(accs))
                           << ',' << format_double(mean(raccs)) << ',' << accs.size() << ','
                           << (any_failed ? "partial" : "ok") << "\n";
                    }
                }
    }

    {
        std::ofstream hf(cfg.output_dir + "/config_hash.txt");
        hf << cfg.config_hash << "\n";
    }
    {
        auto t_end = std::chrono::steady_clock::now();
        std::ofstream tf(cfg.output_dir + "/timings.txt");
        tf << "total_seconds "
           << std::chrono::duration<double>(t_end - t_start).count() << "\n";
    }
    return out;
}

// ---- gamma sweep ----

inline const char* kSweepHeader =
    "gamma,seed,upstream_accuracy,upstream_robust_accuracy,downstream_accuracy,"
    "downstream_robust_accuracy";

struct SweepRow {
    double gamma;
    std::uint64_t seed;
    double upstream_accuracy;
    double upstream_robust_accuracy;
    double downstream_accuracy;
    double downstream_robust_accuracy;
};

// Per-gamma: pre-train with that perturbation radius (gamma = 0 is exactly
// standard pre-training), then fine-tune privately and measure robustness on
// both sides.
inline std::vector<SweepRow> run_gamma_sweep(const ExperimentConfig& cfg,
                                             const std::vector<double>& gammas) {
    if (gammas.size() < 3) throw std::invalid_argument("run_gamma_sweep: need >= 3 gamma values");
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    struct Job {
        double gamma;
        std::size_t seed_idx;
        SweepRow row;
    };
    std::vector<TransferTask> tasks;
    for (std::uint64_t seed : cfg.seeds) tasks.push_back(build_task(cfg, seed));
    std::vector<Job> jobs;
    for (double g : gammas)
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si) jobs.push_back({g, si, {}});

    detail::parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
        Job& job = jobs[i];
        std::uint64_t seed = cfg.seeds[job.seed_idx];
        const TransferTask& task = tasks[job.seed_idx];
        PretrainConfig pc = cfg.pretrain;
        pc.gamma = job.gamma;
        ModelParams init = ModelParams::init_random(model_dims(cfg, task), seed);
        ModelParams model = train_dpadapter(task.upstream, pc, seed, std::move(init));
        auto up = robust_accuracy(model, task.upstream, cfg.robustness.noise_std,
                                  cfg.robustness.trials, derive_seed(seed, 0xE7A1));
        FinetuneSetup setup;
        setup.algorithm = DpAlgorithm::DpSgd;
        setup.base = cfg.finetune;
        PrivacySpec spec{cfg.epsilons.front(), cfg.delta};
        FinetuneResult fr = finetune(model, task.downstream_train, task.downstream_test, spec,
                                     setup, derive_seed(seed, 0x5EE9), &task.upstream);
        auto down = robust_accuracy(fr.model, task.downstream_test, cfg.robustness.noise_std,
                                    cfg.robustness.trials, derive_seed(seed, 0xE7A2));
        job.row = {job.gamma, seed, up.clean_accuracy, up.robust_accuracy,
                   down.clean_accuracy, down.robust_accuracy};
    });

    std::vector<SweepRow> rows;
    for (const auto& j : jobs) rows.push_back(j.row);
    std::ofstream sf(cfg.output_dir + "/gamma_sweep.csv");
    sf << kSweepHeader << "\n";
    for (const auto& r : rows)
        sf << format_double(r.gamma) << ',' << r.seed << ','
           << format_double(r.upstream_accuracy) << ','
           << format_double(r.upstream_robust_accuracy) << ','
           << format_double(r.downstream_accuracy) << ','
           << format_double(r.downstream_robust_accuracy) << "\n";
    return rows;
}

// ---- plot-ready CSVs ----

// Emits one plot-shaped file per figure analogue from the sweep CSV:
//   fig1: gamma vs (upstream robust acc, downstream acc)
//   fig2: upstream robust acc vs downstream robust acc, sorted by the former
//   fig4: gamma vs (upstream acc, upstream robust acc, downstream acc)
inline void emit_plotdata(const std::string& sweep_csv, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    CsvTable t = read_csv(sweep_csv);
    std::vector<std::string> expect = split_csv_line(kSweepHeader);
    for (const auto& col : expect)
        if (t.column(col) < 0)
            throw std::runtime_error("emit_plotdata: schema error, missing column '" + col + "'");

    int c_gamma = t.column("gamma");
    int c_uacc = t.column("upstream_accuracy");
    int c_urob = t.column("upstream_robust_accuracy");
    int c_dacc = t.column("downstream_accuracy");
    int c_drob = t.column("downstream_robust_accuracy");

    // mean over seeds per gamma, in first-seen gamma order
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::vector<double>>> agg;  // gamma -> rows of 4 cols
    for (const auto& row : t.rows) {
        const std::string& g = row[static_cast<std::size_t>(c_gamma)];
        if (!agg.count(g)) order.push_back(g);
        agg[g].push_back({std::stod(row[static_cast<std::size_t>(c_uacc)]),
                          std::stod(row[static_cast<std::size_t>(c_urob)]),
                          std::stod(row[static_cast<std::size_t>(c_dacc)]),
                          std::stod(row[static_cast<std::size_t>(c_drob)])});
    }
    auto col_mean = [&](const std::string& g, std::size_t col) {
        std::vector<double> v;
        for (const auto& r : agg[g]) v.push_back(r[col]);
        return mean(v);
    };

    {
        std::ofstream f(out_dir + "/fig1_gamma_robustness.csv");
        f << "gamma,upstream_robust_accuracy,downstream_accuracy\n";
        for (const auto& g : order)
            f << g << ',' << format_double(col_mean(g, 1)) << ',' << format_double(col_mean(g, 2))
              << "\n";
    }
    {
        std::vector<std::pair<double, double>> pts;
        for (const auto& g : order) pts.push_back({col_mean(g, 1), col_mean(g, 3)});
        std::sort(pts.begin(), pts.end());
        std::ofstream f(out_dir + "/fig2_robust_transfer.csv");
        f << "upstream_robust_accuracy,downstream_robust_accuracy\n";
        for (const auto& [x, y] : pts)
            f << format_double(x) << ',' << format_double(y) << "\n";
    }
    {
        std::ofstream f(out_dir + "/fig4_gamma_impact.csv");
        f << "gamma,upstream_accuracy,upstream_robust_accuracy,downstream_accuracy\n";
        for (const auto& g : order)
            f << g << ',' << format_double(col_mean(g, 0)) << ',' << format_double(col_mean(g, 1))
              << ',' << format_double(col_mean(g, 2)) << "\n";
    }
}

// Tradeoff scatter (robust accuracy vs accuracy per pre-training method)
// from an experiment metrics file.
inline void emit_tradeoff_plotdata(const std::string& metrics_csv, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    CsvTable t = read_csv(metrics_csv);
    for (const char* col : {"run_id", "phase", "accuracy", "robust_accuracy"})
        if (t.column(col) < 0)
            throw std::runtime_error("emit_plotdata: schema error, missing column '" +
                                     std::string(col) + "'");
    int c_run = t.column("run_id"), c_phase = t.column("phase");
    int c_acc = t.column("accuracy"), c_rob = t.column("robust_accuracy");
    std::ofstream f(out_dir + "/fig5_tradeoff.csv");
    f << "run_id,robust_accuracy,accuracy\n";
    for (const auto& row : t.rows)
        if (row[static_cast<std::size_t>(c_phase)] == "pretrain")
            f << row[static_cast<std::size_t>(c_run)] << ','
              << row[static_cast<std::size_t>(c_rob)] << ','
              << row[static_cast<std::size_t>(c_acc)] << "\n";
}

}  // namespace dpadapter
