#include "stmid/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "stmid/presets.hpp"
#include "stmid/rng.hpp"

namespace stmid::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json coeffs_to_json(const EstimatedCoefficients& c) {
    json j;
    auto arr = coeffs_to_array(c);
    for (std::size_t i = 0; i < kNumCoefficients; ++i)
        j[std::string(kCoefficientNames[i])] = arr[i];
    return j;
}

EstimatedCoefficients coeffs_from_json(const json& j) {
    std::array<double, kNumCoefficients> arr;
    for (std::size_t i = 0; i < kNumCoefficients; ++i) {
        const std::string name(kCoefficientNames[i]);
        if (!j.contains(name)) throw SchemaMismatch("missing coefficient '" + name + "'");
        arr[i] = j.at(name).get<double>();
    }
    return coeffs_from_array(arr);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

std::string join(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void require_artifact(const std::string& path) {
    if (!fs::exists(path)) throw MissingArtifact(path);
}

net::NetworkConfig net_from_json(const json& j, net::NetworkConfig base) {
    base.gru_layers = j.value("gru_layers", base.gru_layers);
    base.hidden_layers = j.value("hidden_layers", base.hidden_layers);
    base.hidden_size = j.value("hidden_size", base.hidden_size);
    base.history = j.value("history", base.history);
    return base;
}

data::Split make_split(const ExperimentConfig& cfg, int history,
                       std::vector<data::WindowedSample>* all_windows = nullptr) {
    require_artifact(cfg.train_csv);
    auto loaded = data::load_csv(cfg.train_csv);
    auto windows = data::window(loaded.samples, history);
    auto split = data::split(windows, {cfg.train_ratio, substream_seed(cfg.seed, "split")});
    if (cfg.validation_csv) {
        auto vloaded = data::load_csv(*cfg.validation_csv);
        split.validation = data::window(vloaded.samples, history);
    }
    if (all_windows) *all_windows = std::move(windows);
    return split;
}

int default_freeze_count(double fraction, int blocks) {
    int n = std::min(static_cast<int>(fraction * blocks), blocks - 2);
    return std::max(n, 0);
}

}  // namespace

void save_coefficients_json(const std::string& path, const EstimatedCoefficients& c,
                            const KnownCoefficients& k, const CoefficientBounds& bounds) {
    json j;
    j["coefficients"] = coeffs_to_json(c);
    j["phi_k"] = {{"mass", k.mass}, {"lf", k.lf}, {"lr", k.lr}};
    j["bounds"] = {{"lower", coeffs_to_json(bounds.lower)},
                   {"upper", coeffs_to_json(bounds.upper)}};
    write_json(path, j);
}

EstimatedCoefficients load_coefficients_json(const std::string& path) {
    json j = load_json(path);
    return coeffs_from_json(j.contains("coefficients") ? j.at("coefficients") : j);
}

void save_bounds_json(const std::string& path, const CoefficientBounds& b) {
    json j;
    j["lower"] = coeffs_to_json(b.lower);
    j["upper"] = coeffs_to_json(b.upper);
    write_json(path, j);
}

CoefficientBounds load_bounds_json(const std::string& path) {
    json j = load_json(path);
    CoefficientBounds b;
    b.lower = coeffs_from_json(j.at("lower"));
    b.upper = coeffs_from_json(j.at("upper"));
    b.validate();
    return b;
}

ExperimentConfig load_config(const std::string& path) {
    json j = load_json(path);
    ExperimentConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);

    cfg.sim_run.ground_truth = presets::default_ground_truth();
    cfg.sim_run.phi_k = presets::default_known_coefficients();
    cfg.track = sim::default_track();
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        cfg.sim_run.sample_rate_hz = s.value("sample_rate_hz", cfg.sim_run.sample_rate_hz);
        cfg.sim_run.sample_count = s.value("samples", cfg.sim_run.sample_count);
        cfg.sim_run.bootstrap_steps = s.value("bootstrap_steps", cfg.sim_run.bootstrap_steps);
        cfg.sim_run.bootstrap_d_throttle =
            s.value("bootstrap_d_throttle", cfg.sim_run.bootstrap_d_throttle);
        if (s.contains("phi_k")) {
            const auto& k = s.at("phi_k");
            cfg.sim_run.phi_k = {k.at("mass").get<double>(), k.at("lf").get<double>(),
                                 k.at("lr").get<double>()};
        }
        if (s.contains("ground_truth"))
            cfg.sim_run.ground_truth = coeffs_from_json(s.at("ground_truth"));
        if (s.contains("track")) {
            const auto& t = s.at("track");
            cfg.track.lookahead = t.value("lookahead", cfg.track.lookahead);
            cfg.track.target_speed = t.value("target_speed", cfg.track.target_speed);
            cfg.track.speed_modulation = t.value("speed_modulation", cfg.track.speed_modulation);
            cfg.track.speed_modulation_hz =
                t.value("speed_modulation_hz", cfg.track.speed_modulation_hz);
        }
        if (s.contains("limits")) {
            const auto& l = s.at("limits");
            auto& lim = cfg.sim_run.limits;
            lim.max_d_throttle = l.value("max_d_throttle", lim.max_d_throttle);
            lim.max_d_steer = l.value("max_d_steer", lim.max_d_steer);
            lim.max_steer = l.value("max_steer", lim.max_steer);
            lim.throttle_gain = l.value("throttle_gain", lim.throttle_gain);
            lim.steer_dither = l.value("steer_dither", lim.steer_dither);
        }
        if (s.contains("noise_sigma")) {
            auto v = s.at("noise_sigma").get<std::vector<double>>();
            if (v.size() != 3) throw ConfigError("noise_sigma needs 3 entries");
            cfg.noise_sigma = {v[0], v[1], v[2]};
        }
    }

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        cfg.train_csv = d.value("train_csv", std::string());
        if (d.contains("validation_csv") && !d.at("validation_csv").is_null())
            cfg.validation_csv = d.at("validation_csv").get<std::string>();
    }
    if (cfg.train_csv.empty()) cfg.train_csv = join(cfg.out_dir, artifact::kDataset);

    cfg.bounds = presets::sim_bounds();
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        if (b.contains("preset")) cfg.bounds = presets::bounds_preset(b.at("preset"));
        else if (b.contains("file")) cfg.bounds = load_bounds_json(b.at("file"));
        else {
            cfg.bounds.lower = coeffs_from_json(b.at("lower"));
            cfg.bounds.upper = coeffs_from_json(b.at("upper"));
            cfg.bounds.validate();
        }
    }

    {
        auto preset = presets::cov_bounds_sim_noise();
        cfg.cov_bounds = {preset.lower, preset.upper};
        if (j.contains("ekf_bounds")) {
            const auto& e = j.at("ekf_bounds");
            if (e.contains("preset")) {
                std::string name = e.at("preset");
                auto p = name == "real" ? presets::cov_bounds_real()
                                        : presets::cov_bounds_sim_noise();
                if (name != "real" && name != "sim_noise")
                    throw ConfigError("unknown ekf_bounds preset '" + name + "'");
                cfg.cov_bounds = {p.lower, p.upper};
            } else {
                auto lo = e.at("lower").get<std::vector<double>>();
                auto hi = e.at("upper").get<std::vector<double>>();
                if (lo.size() != 6 || hi.size() != 6)
                    throw ConfigError("ekf_bounds need 6 entries");
                for (int i = 0; i < 6; ++i) {
                    cfg.cov_bounds.lower[i] = lo[i];
                    cfg.cov_bounds.upper[i] = hi[i];
                }
            }
        }
        cfg.cov_bounds.validate();
    }

    if (j.contains("net")) cfg.net_cfg = net_from_json(j.at("net"), cfg.net_cfg);
    cfg.net_cfg.head = net::kCoefficientHead;

    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train_ratio = t.value("ratio", cfg.train_ratio);
        cfg.batch = t.value("batch", cfg.batch);
        cfg.learning_rate = t.value("learning_rate", cfg.learning_rate);
        cfg.pretrain_iterations = t.value("pretrain_iterations", cfg.pretrain_iterations);
        cfg.finetune_iterations = t.value("finetune_iterations", cfg.finetune_iterations);
        cfg.finetune_lr_scale = t.value("finetune_lr_scale", cfg.finetune_lr_scale);
        cfg.freeze_fraction = t.value("freeze_fraction", cfg.freeze_fraction);
        cfg.val_every = t.value("val_every", cfg.val_every);
        if (t.contains("weights")) {
            auto w = t.at("weights").get<std::vector<double>>();
            if (w.size() != 2) throw ConfigError("weights need 2 entries");
            cfg.weights = {w[0], w[1]};
            cfg.weights.validate();
        }
    }

    cfg.denoise_net = cfg.net_cfg;
    cfg.denoise_net.head = net::kEkfHead;
    if (j.contains("ekf")) {
        const auto& e = j.at("ekf");
        cfg.denoise.chunk = e.value("chunk", cfg.denoise.chunk);
        cfg.denoise.pretrain_iterations =
            e.value("pretrain_iterations", cfg.denoise.pretrain_iterations);
        cfg.denoise.finetune_iterations =
            e.value("finetune_iterations", cfg.denoise.finetune_iterations);
        cfg.denoise.learning_rate = e.value("learning_rate", cfg.denoise.learning_rate);
        cfg.denoise.finetune_lr_scale =
            e.value("finetune_lr_scale", cfg.denoise.finetune_lr_scale);
        cfg.denoise.freeze_fraction = e.value("freeze_fraction", cfg.denoise.freeze_fraction);
        cfg.denoise.val_every = e.value("val_every", cfg.denoise.val_every);
        cfg.denoise.filter.p0 = e.value("p0", cfg.denoise.filter.p0);
        if (e.contains("net")) cfg.denoise_net = net_from_json(e.at("net"), cfg.denoise_net);
        cfg.denoise_net.head = net::kEkfHead;
        if (e.contains("adjust")) {
            const auto& a = e.at("adjust");
            cfg.adjust_epsilon = a.value("epsilon_frac", cfg.adjust_epsilon);
            cfg.adjust_expand = a.value("expand_factor", cfg.adjust_expand);
            cfg.adjust_rounds = a.value("max_rounds", cfg.adjust_rounds);
        }
    }

    if (j.contains("search")) {
        const auto& s = j.at("search");
        cfg.trials = s.value("trials", cfg.trials);
        cfg.search_pretrain_iterations =
            s.value("pretrain_iterations", cfg.search_pretrain_iterations);
        cfg.search_finetune_iterations =
            s.value("finetune_iterations", cfg.search_finetune_iterations);
        if (s.contains("space")) {
            const auto& sp = s.at("space");
            auto pair_i = [&](const char* key, std::array<int, 2> d) {
                if (!sp.contains(key)) return d;
                auto v = sp.at(key).get<std::vector<int>>();
                if (v.size() != 2) throw ConfigError(std::string(key) + " needs 2 entries");
                return std::array<int, 2>{v[0], v[1]};
            };
            cfg.space.hidden_layers = pair_i("hidden_layers", cfg.space.hidden_layers);
            cfg.space.gru_layers = pair_i("gru_layers", cfg.space.gru_layers);
            cfg.space.hidden_size = pair_i("hidden_size", cfg.space.hidden_size);
            cfg.space.history = pair_i("history", cfg.space.history);
            cfg.space.batch = pair_i("batch", cfg.space.batch);
            if (sp.contains("lr_log10")) {
                auto v = sp.at("lr_log10").get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError("lr_log10 needs 2 entries");
                cfg.space.lr_log10 = {v[0], v[1]};
            }
        }
    }

    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        if (e.contains("sweep_alpha")) {
            auto v = e.at("sweep_alpha").get<std::vector<double>>();
            if (v.size() != 2) throw ConfigError("sweep_alpha needs 2 entries");
            cfg.sweep_alpha_min = v[0];
            cfg.sweep_alpha_max = v[1];
        }
        cfg.sweep_points = e.value("sweep_points", cfg.sweep_points);
        if (e.contains("gt_json") && !e.at("gt_json").is_null())
            cfg.gt_json = e.at("gt_json").get<std::string>();
    }
    if (!cfg.gt_json) {
        std::string candidate = join(cfg.out_dir, artifact::kGroundTruth);
        if (fs::exists(candidate)) cfg.gt_json = candidate;
    }
    return cfg;
}

void apply(ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.out_dir) {
        // keep dataset paths tied to the output directory unless explicitly set
        if (cfg.train_csv == join(cfg.out_dir, artifact::kDataset))
            cfg.train_csv = join(*o.out_dir, artifact::kDataset);
        cfg.out_dir = *o.out_dir;
    }
    if (o.ratio) cfg.train_ratio = *o.ratio;
    if (o.trials) cfg.trials = *o.trials;
    if (o.with_noise) cfg.with_noise = true;
    cfg.sim_run.seed = substream_seed(cfg.seed, "sim");
}

std::string describe(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["train_csv"] = cfg.train_csv;
    j["ratio"] = cfg.train_ratio;
    j["net"] = {{"gru_layers", cfg.net_cfg.gru_layers},
                {"hidden_layers", cfg.net_cfg.hidden_layers},
                {"hidden_size", cfg.net_cfg.hidden_size},
                {"history", cfg.net_cfg.history}};
    j["train"] = {{"batch", cfg.batch},
                  {"learning_rate", cfg.learning_rate},
                  {"pretrain_iterations", cfg.pretrain_iterations},
                  {"finetune_iterations", cfg.finetune_iterations},
                  {"weights", {cfg.weights.w1, cfg.weights.w2}}};
    return j.dump();
}

void cmd_simulate(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    sim::SimRun run = cfg.sim_run;
    run.seed = substream_seed(cfg.seed, "sim");
    auto rows = sim::generate_dataset(run, cfg.track);
    data::save_csv(join(cfg.out_dir, artifact::kDataset), rows);
    save_coefficients_json(join(cfg.out_dir, artifact::kGroundTruth), run.ground_truth,
                           run.phi_k, cfg.bounds);
    if (cfg.with_noise) {
        auto noisy = sim::inject_noise(rows, cfg.noise_sigma, substream_seed(cfg.seed, "noise"));
        data::save_csv(join(cfg.out_dir, artifact::kDatasetNoisy), noisy);
    }
}

void cmd_pretrain(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    auto split = make_split(cfg, cfg.net_cfg.history);

    train::TrainRunConfig rc;
    rc.phase = train::Phase::pretrain;
    rc.iterations = cfg.pretrain_iterations;
    rc.batch_size = cfg.batch;
    rc.learning_rate = cfg.learning_rate;
    rc.seed = substream_seed(cfg.seed, "pretrain");
    rc.val_every = cfg.val_every;

    auto bounds = net::GuardBounds::from(cfg.bounds);
    auto report = train::pretrain(rc, split, cfg.net_cfg, bounds, cfg.sim_run.phi_k);
    net::save_checkpoint(join(cfg.out_dir, artifact::kPretrainCheckpoint), report.best);
    train::write_curve_csv(join(cfg.out_dir, "curve_pretrain.csv"), report);

    json j;
    j["l_min"] = report.l_min;
    j["best_iteration"] = report.best_iteration;
    j["iterations"] = rc.iterations;
    write_json(join(cfg.out_dir, "report_pretrain.json"), j);
}

void cmd_finetune(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::string ck_path = join(cfg.out_dir, artifact::kPretrainCheckpoint);
    require_artifact(ck_path);
    auto start = net::load_checkpoint(ck_path);
    auto split = make_split(cfg, start.config.history);

    train::TrainRunConfig rc;
    rc.phase = train::Phase::finetune;
    rc.iterations = cfg.finetune_iterations;
    rc.batch_size = cfg.batch;
    rc.learning_rate = cfg.learning_rate * cfg.finetune_lr_scale;
    rc.seed = substream_seed(cfg.seed, "finetune");
    rc.weights = cfg.weights;
    rc.freeze_count =
        default_freeze_count(cfg.freeze_fraction, static_cast<int>(start.params.blocks.size()));
    rc.val_every = cfg.val_every;

    auto report = train::finetune(start, rc, split);
    net::save_checkpoint(join(cfg.out_dir, artifact::kFinetuneCheckpoint), report.best);
    train::write_curve_csv(join(cfg.out_dir, "curve_finetune.csv"), report);

    json j;
    j["l_min"] = report.l_min;
    j["best_iteration"] = report.best_iteration;
    j["iterations"] = rc.iterations;
    j["freeze_count"] = rc.freeze_count;
    write_json(join(cfg.out_dir, "report_finetune.json"), j);
}

void cmd_denoise(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    require_artifact(cfg.train_csv);
    auto loaded = data::load_csv(cfg.train_csv);
    auto windows = data::window(loaded.samples, cfg.denoise_net.history);

    auto bounds = net::GuardBounds::from(cfg.bounds, cfg.cov_bounds.lower, cfg.cov_bounds.upper);
    ekf::DenoiseTrainConfig dc = cfg.denoise;
    dc.seed = substream_seed(cfg.seed, "denoise");

    auto result = ekf::train_denoiser(windows, cfg.denoise_net, bounds, cfg.sim_run.phi_k, dc);
    net::save_checkpoint(join(cfg.out_dir, artifact::kDenoiserCheckpoint), result.best);

    auto out = ekf::denoise_dataset(loaded.samples, result.best, dc.filter);
    data::save_csv(join(cfg.out_dir, artifact::kDatasetEkf), out.filtered);
    ekf::save_noise_csv(join(cfg.out_dir, artifact::kNoiseEkf), out.noise);

    auto estimate = eval::mean_coefficients(windows, result.best.params, result.best.config,
                                            result.best.bounds, result.best.phi_k);
    auto adjusted = ekf::adjust_ranges(estimate, cfg.bounds, cfg.adjust_epsilon,
                                       cfg.adjust_expand, cfg.adjust_rounds);
    save_bounds_json(join(cfg.out_dir, artifact::kAdjustedBounds), adjusted.bounds);

    json j;
    j["l_min"] = result.l_min;
    j["adjustments"] = json::array();
    for (const auto& a : adjusted.log)
        j["adjustments"].push_back(
            {{"round", a.round}, {"entry", a.entry}, {"side", a.side},
             {"old", a.old_bound}, {"new", a.new_bound}});
    write_json(join(cfg.out_dir, "report_denoiser.json"), j);
}

void cmd_evaluate(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::string ck_path = join(cfg.out_dir, artifact::kFinetuneCheckpoint);
    if (!fs::exists(ck_path)) ck_path = join(cfg.out_dir, artifact::kPretrainCheckpoint);
    require_artifact(ck_path);
    auto ck = net::load_checkpoint(ck_path);

    require_artifact(cfg.train_csv);
    auto loaded = data::load_csv(cfg.train_csv);
    auto windows = data::window(loaded.samples, ck.config.history);

    auto predictions = train::predict(windows, ck.params, ck.config, ck.bounds, ck.phi_k);
    std::vector<std::array<double, 3>> labels;
    labels.reserve(windows.size());
    for (const auto& w : windows) labels.push_back(w.label);

    auto metrics = eval::compute_metrics(predictions, labels, {});
    metrics.train_ratio = cfg.train_ratio;
    metrics.run_id = ck_path;
    metrics.l_min = train::loss_supervised(predictions, labels);
    eval::save_metrics_json(join(cfg.out_dir, artifact::kMetrics), metrics);

    auto estimate =
        eval::mean_coefficients(windows, ck.params, ck.config, ck.bounds, ck.phi_k);
    save_coefficients_json(join(cfg.out_dir, artifact::kCoefficients), estimate, ck.phi_k,
                           cfg.bounds);

    auto curve =
        eval::force_sweep(estimate, cfg.sweep_alpha_min, cfg.sweep_alpha_max, cfg.sweep_points);
    if (cfg.gt_json) {
        auto gt = load_coefficients_json(*cfg.gt_json);
        auto gt_curve =
            eval::force_sweep(gt, cfg.sweep_alpha_min, cfg.sweep_alpha_max, cfg.sweep_points);
        eval::save_force_curve_csv(join(cfg.out_dir, artifact::kForceCurve), curve, &gt_curve);
        auto diff = eval::coefficient_diff(estimate, gt, cfg.bounds);
        eval::save_coefficient_diff_csv(join(cfg.out_dir, artifact::kCoeffDiff), diff);
    } else {
        eval::save_force_curve_csv(join(cfg.out_dir, artifact::kForceCurve), curve, nullptr);
    }
}

void cmd_tune(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    require_artifact(cfg.train_csv);
    auto loaded = data::load_csv(cfg.train_csv);

    train::SearchPipeline pipe;
    pipe.pretrain_iterations = cfg.search_pretrain_iterations;
    pipe.finetune_iterations = cfg.search_finetune_iterations;
    pipe.weights = cfg.weights;
    pipe.finetune_lr_scale = cfg.finetune_lr_scale;
    pipe.freeze_fraction = cfg.freeze_fraction;
    pipe.val_every = cfg.val_every;
    pipe.train_ratio = cfg.train_ratio;
    pipe.split_seed = substream_seed(cfg.seed, "split");

    auto bounds = net::GuardBounds::from(cfg.bounds);
    auto report = train::random_search(cfg.space, cfg.trials, substream_seed(cfg.seed, "search"),
                                       pipe, loaded.samples, bounds, cfg.sim_run.phi_k);

    json j;
    j["best_index"] = report.best_index;
    j["trials"] = json::array();
    for (const auto& t : report.trials) {
        json tj = {{"index", t.index},
                   {"gru_layers", t.config.gru_layers},
                   {"hidden_layers", t.config.hidden_layers},
                   {"hidden_size", t.config.hidden_size},
                   {"history", t.config.history},
                   {"batch", t.batch_size},
                   {"learning_rate", t.learning_rate},
                   {"failed", t.failed}};
        if (t.failed) tj["error"] = t.error;
        else tj["l_min"] = t.l_min;
        j["trials"].push_back(tj);
    }
    write_json(join(cfg.out_dir, artifact::kSearchReport), j);
    if (report.best_index >= 0)
        net::save_checkpoint(join(cfg.out_dir, artifact::kBestCheckpoint), report.best);
}

void cmd_sweep_forces(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::string ck_path = join(cfg.out_dir, artifact::kFinetuneCheckpoint);
    if (!fs::exists(ck_path)) ck_path = join(cfg.out_dir, artifact::kPretrainCheckpoint);

    EstimatedCoefficients coeffs;
    if (fs::exists(ck_path)) {
        auto ck = net::load_checkpoint(ck_path);
        require_artifact(cfg.train_csv);
        auto loaded = data::load_csv(cfg.train_csv);
        auto windows = data::window(loaded.samples, ck.config.history);
        coeffs = eval::mean_coefficients(windows, ck.params, ck.config, ck.bounds, ck.phi_k);
    } else if (cfg.gt_json) {
        coeffs = load_coefficients_json(*cfg.gt_json);
    } else {
        throw MissingArtifact(ck_path);
    }

    auto curve =
        eval::force_sweep(coeffs, cfg.sweep_alpha_min, cfg.sweep_alpha_max, cfg.sweep_points);
    if (cfg.gt_json) {
        auto gt = load_coefficients_json(*cfg.gt_json);
        auto gt_curve =
            eval::force_sweep(gt, cfg.sweep_alpha_min, cfg.sweep_alpha_max, cfg.sweep_points);
        eval::save_force_curve_csv(join(cfg.out_dir, artifact::kForceCurve), curve, &gt_curve);
    } else {
        eval::save_force_curve_csv(join(cfg.out_dir, artifact::kForceCurve), curve, nullptr);
    }
}

}  // namespace stmid::pipeline
