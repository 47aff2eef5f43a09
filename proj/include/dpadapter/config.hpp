#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpadapter/data.hpp"
#include "dpadapter/finetune.hpp"
#include "dpadapter/pretrain.hpp"
#include "dpadapter/privacy.hpp"

namespace dpadapter {

using json = nlohmann::json;

enum class PretrainMethod { Scratch, Standard, VanillaSam, DpAdapter };

inline std::string to_string(PretrainMethod m) {
    switch (m) {
        case PretrainMethod::Scratch: return "scratch";
        case PretrainMethod::Standard: return "standard";
        case PretrainMethod::VanillaSam: return "vanilla_sam";
        case PretrainMethod::DpAdapter: return "dpadapter";
    }
    return "?";
}

inline PretrainMethod pretrain_method_from(const std::string& s) {
    if (s == "scratch") return PretrainMethod::Scratch;
    if (s == "standard") return PretrainMethod::Standard;
    if (s == "vanilla_sam") return PretrainMethod::VanillaSam;
    if (s == "dpadapter") return PretrainMethod::DpAdapter;
    throw std::invalid_argument("unknown pretrain method: " + s);
}

inline DpAlgorithm dp_algorithm_from(const std::string& s) {
    if (s == "dpsgd") return DpAlgorithm::DpSgd;
    if (s == "adpclip") return DpAlgorithm::AdpClip;
    if (s == "adpalloc") return DpAlgorithm::AdpAlloc;
    if (s == "gep") return DpAlgorithm::Gep;
    throw std::invalid_argument("unknown DPML algorithm: " + s);
}

struct RobustnessConfig {
    double noise_std = 0.5;
    std::size_t trials = 10;
    std::size_t rho_directions = 8;
    std::vector<double> rho_radii = {0.1, 0.5, 1.0};
};

struct ExperimentConfig {
    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    std::size_t workers = 1;

    std::string task_kind = "synthetic";  // synthetic | idx
    TransferRelation relation = TransferRelation::ShiftedDistribution;
    SyntheticConfig synthetic;
    std::string idx_images, idx_labels;

    std::vector<std::size_t> hidden = {16};

    std::vector<PretrainMethod> pretrain_methods = {
        PretrainMethod::Scratch, PretrainMethod::Standard, PretrainMethod::VanillaSam,
        PretrainMethod::DpAdapter};
    PretrainConfig pretrain;
    double sam_gamma = 1.5;  // vanilla-SAM perturbation magnitude

    std::vector<DpAlgorithm> algorithms = {DpAlgorithm::DpSgd, DpAlgorithm::AdpClip,
                                           DpAlgorithm::AdpAlloc, DpAlgorithm::Gep};
    std::vector<double> epsilons = {1.0, 4.0};
    double delta = 1e-5;
    DpSgdConfig finetune;
    AdpClipState adpclip;
    GepConfig gep;

    RobustnessConfig robustness;

    std::uint64_t config_hash = 0;
    json raw;
};

namespace detail {

inline void require_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
    if (!j.is_object()) throw std::invalid_argument("config: " + path + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + path + "." + it.key() + "'");
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig cfg;
    detail::require_keys(j, {"version", "output_dir", "seeds", "workers", "task", "model",
                             "pretrain", "finetune", "robustness"},
                         "");
    if (j.contains("version") && j.at("version").get<int>() != 1)
        throw std::invalid_argument("config: unsupported version");
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<std::size_t>();

    if (j.contains("task")) {
        const json& t = j.at("task");
        detail::require_keys(t, {"kind", "relation", "n_up", "n_down", "d_in", "k", "class_sep",
                                 "shift_magnitude", "cov_scale", "idx_images", "idx_labels"},
                             "task");
        if (t.contains("kind")) cfg.task_kind = t.at("kind").get<std::string>();
        if (cfg.task_kind != "synthetic" && cfg.task_kind != "idx")
            throw std::invalid_argument("config: task.kind must be synthetic or idx");
        if (t.contains("relation")) {
            std::string r = t.at("relation").get<std::string>();
            if (r == "iid-split") cfg.relation = TransferRelation::IidSplit;
            else if (r == "shifted-distribution") cfg.relation = TransferRelation::ShiftedDistribution;
            else throw std::invalid_argument("config: unknown task.relation '" + r + "'");
        }
        if (t.contains("n_up")) cfg.synthetic.n_up = t.at("n_up").get<std::size_t>();
        if (t.contains("n_down")) cfg.synthetic.n_down = t.at("n_down").get<std::size_t>();
        if (t.contains("d_in")) cfg.synthetic.d_in = t.at("d_in").get<std::size_t>();
        if (t.contains("k")) cfg.synthetic.k = t.at("k").get<int>();
        if (t.contains("class_sep")) cfg.synthetic.class_sep = t.at("class_sep").get<double>();
        if (t.contains("shift_magnitude"))
            cfg.synthetic.shift_magnitude = t.at("shift_magnitude").get<double>();
        if (t.contains("cov_scale")) cfg.synthetic.cov_scale = t.at("cov_scale").get<double>();
        if (t.contains("idx_images")) cfg.idx_images = t.at("idx_images").get<std::string>();
        if (t.contains("idx_labels")) cfg.idx_labels = t.at("idx_labels").get<std::string>();
    }

    if (j.contains("model")) {
        detail::require_keys(j.at("model"), {"hidden"}, "model");
        if (j.at("model").contains("hidden"))
            cfg.hidden = j.at("model").at("hidden").get<std::vector<std::size_t>>();
    }

    if (j.contains("pretrain")) {
        const json& p = j.at("pretrain");
        detail::require_keys(p, {"methods", "m1", "m2", "eta1", "eta2", "gamma", "sam_gamma",
                                 "iterations", "warmup_epochs", "momentum", "weight_decay",
                                 "lr_decay_points"},
                             "pretrain");
        if (p.contains("methods")) {
            cfg.pretrain_methods.clear();
            for (const auto& m : p.at("methods"))
                cfg.pretrain_methods.push_back(pretrain_method_from(m.get<std::string>()));
        }
        if (p.contains("m1")) cfg.pretrain.m1 = p.at("m1").get<std::size_t>();
        if (p.contains("m2")) cfg.pretrain.m2 = p.at("m2").get<std::size_t>();
        if (p.contains("eta1")) cfg.pretrain.eta1 = p.at("eta1").get<double>();
        if (p.contains("eta2")) cfg.pretrain.eta2 = p.at("eta2").get<double>();
        if (p.contains("gamma")) cfg.pretrain.gamma = p.at("gamma").get<double>();
        if (p.contains("sam_gamma")) cfg.sam_gamma = p.at("sam_gamma").get<double>();
        if (p.contains("iterations")) cfg.pretrain.iterations = p.at("iterations").get<std::size_t>();
        if (p.contains("warmup_epochs"))
            cfg.pretrain.warmup_epochs = p.at("warmup_epochs").get<std::size_t>();
        if (p.contains("momentum")) cfg.pretrain.momentum = p.at("momentum").get<double>();
        if (p.contains("weight_decay")) cfg.pretrain.weight_decay = p.at("weight_decay").get<double>();
        if (p.contains("lr_decay_points"))
            cfg.pretrain.lr_decay_points = p.at("lr_decay_points").get<std::vector<double>>();
        cfg.pretrain.validate();
    }

    if (j.contains("finetune")) {
        const json& f = j.at("finetune");
        detail::require_keys(f, {"algorithms", "epsilons", "delta", "clip_norm", "lot_size",
                                 "epochs", "lr", "momentum", "adpclip_eta_c",
                                 "adpclip_quantile", "adpclip_sigma_b", "gep_subspace_dim",
                                 "gep_power_iters", "gep_public_batch"},
                             "finetune");
        if (f.contains("algorithms")) {
            cfg.algorithms.clear();
            for (const auto& a : f.at("algorithms"))
                cfg.algorithms.push_back(dp_algorithm_from(a.get<std::string>()));
        }
        if (f.contains("epsilons")) cfg.epsilons = f.at("epsilons").get<std::vector<double>>();
        if (f.contains("delta")) cfg.delta = f.at("delta").get<double>();
        if (f.contains("clip_norm")) cfg.finetune.clip_norm = f.at("clip_norm").get<double>();
        if (f.contains("lot_size")) cfg.finetune.lot_size = f.at("lot_size").get<std::size_t>();
        if (f.contains("epochs")) cfg.finetune.epochs = f.at("epochs").get<std::size_t>();
        if (f.contains("lr")) cfg.finetune.lr = f.at("lr").get<double>();
        if (f.contains("momentum")) cfg.finetune.momentum = f.at("momentum").get<double>();
        if (f.contains("adpclip_eta_c")) cfg.adpclip.eta_c = f.at("adpclip_eta_c").get<double>();
        if (f.contains("adpclip_quantile"))
            cfg.adpclip.target_quantile = f.at("adpclip_quantile").get<double>();
        if (f.contains("adpclip_sigma_b")) cfg.adpclip.sigma_b = f.at("adpclip_sigma_b").get<double>();
        if (f.contains("gep_subspace_dim"))
            cfg.gep.subspace_dim = f.at("gep_subspace_dim").get<std::size_t>();
        if (f.contains("gep_power_iters"))
            cfg.gep.power_iters = f.at("gep_power_iters").get<std::size_t>();
        if (f.contains("gep_public_batch"))
            cfg.gep.public_batch = f.at("gep_public_batch").get<std::size_t>();
        cfg.adpclip.threshold = cfg.finetune.clip_norm;  // C0 = C
    }

    if (j.contains("robustness")) {
        const json& r = j.at("robustness");
        detail::require_keys(r, {"noise_std", "trials", "rho_directions", "rho_radii"},
                             "robustness");
        if (r.contains("noise_std")) cfg.robustness.noise_std = r.at("noise_std").get<double>();
        if (r.contains("trials")) cfg.robustness.trials = r.at("trials").get<std::size_t>();
        if (r.contains("rho_directions"))
            cfg.robustness.rho_directions = r.at("rho_directions").get<std::size_t>();
        if (r.contains("rho_radii"))
            cfg.robustness.rho_radii = r.at("rho_radii").get<std::vector<double>>();
    }

    cfg.raw = j;
    cfg.config_hash = detail::fnv1a(j.dump());
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config: parse error in " + path + ": " + e.what());
    }
    return parse_experiment_config(j);
}

}  // namespace dpadapter
