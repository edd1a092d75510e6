#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "stmid/ekf.hpp"
#include "stmid/eval.hpp"
#include "stmid/sim.hpp"
#include "stmid/train.hpp"

namespace stmid::pipeline {

// Everything a command needs, resolved from the config file plus CLI
// overrides. Paper-sourced defaults live in the preset config files.
struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "runs/out";

    sim::SimRun sim_run;
    sim::TrackSpec track;
    std::array<double, 3> noise_sigma{0.05, 0.02, 0.01};
    bool with_noise = false;

    std::string train_csv;                      // dataset consumed by training commands
    std::optional<std::string> validation_csv;  // validate against a different dataset

    CoefficientBounds bounds;
    ekf::EkfCovBounds cov_bounds;

    net::NetworkConfig net_cfg;

    double train_ratio = 0.3;
    int batch = 32;
    double learning_rate = 3e-3;
    int pretrain_iterations = 10000;
    int finetune_iterations = 5000;
    double finetune_lr_scale = 0.3;
    train::LossWeights weights;
    double freeze_fraction = 0.75;
    int val_every = 100;

    ekf::DenoiseTrainConfig denoise;
    net::NetworkConfig denoise_net;
    double adjust_epsilon = 0.02;
    double adjust_expand = 0.5;
    int adjust_rounds = 3;

    train::SearchSpace space;
    int trials = 4;
    int search_pretrain_iterations = 400;
    int search_finetune_iterations = 200;

    double sweep_alpha_min = -0.3;
    double sweep_alpha_max = 0.3;
    int sweep_points = 121;
    std::optional<std::string> gt_json;
};

ExperimentConfig load_config(const std::string& path);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> ratio;
    std::optional<int> trials;
    bool with_noise = false;
};

void apply(ExperimentConfig& cfg, const Overrides& o);

// Echo of the fully-resolved configuration, printed by every command.
std::string describe(const ExperimentConfig& cfg);

// Commands. Each writes its artifacts under cfg.out_dir and throws on error.
void cmd_simulate(const ExperimentConfig& cfg);
void cmd_pretrain(const ExperimentConfig& cfg);
void cmd_finetune(const ExperimentConfig& cfg);
void cmd_denoise(const ExperimentConfig& cfg);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_tune(const ExperimentConfig& cfg);
void cmd_sweep_forces(const ExperimentConfig& cfg);

// Artifact names under the output directory.
namespace artifact {
inline constexpr const char* kDataset = "dataset.csv";
inline constexpr const char* kDatasetNoisy = "dataset_noisy.csv";
inline constexpr const char* kGroundTruth = "gt_coefficients.json";
inline constexpr const char* kPretrainCheckpoint = "checkpoint_pretrain.json";
inline constexpr const char* kFinetuneCheckpoint = "checkpoint_finetune.json";
inline constexpr const char* kDenoiserCheckpoint = "checkpoint_denoiser.json";
inline constexpr const char* kDatasetEkf = "dataset_ekf.csv";
inline constexpr const char* kNoiseEkf = "noise_ekf.csv";
inline constexpr const char* kAdjustedBounds = "adjusted_bounds.json";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kCoefficients = "coefficients.json";
inline constexpr const char* kCoeffDiff = "coeff_diff.csv";
inline constexpr const char* kForceCurve = "force_curve.csv";
inline constexpr const char* kSearchReport = "search_report.json";
inline constexpr const char* kBestCheckpoint = "checkpoint_best.json";
}  // namespace artifact

// JSON helpers shared with the tests and bindings.
void save_coefficients_json(const std::string& path, const EstimatedCoefficients& c,
                            const KnownCoefficients& k, const CoefficientBounds& bounds);
EstimatedCoefficients load_coefficients_json(const std::string& path);
void save_bounds_json(const std::string& path, const CoefficientBounds& b);
CoefficientBounds load_bounds_json(const std::string& path);

}  // namespace stmid::pipeline
