#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stmid/data.hpp"
#include "stmid/net.hpp"

namespace stmid::train {

struct LossWeights {
    double w1 = 0.99975;
    double w2 = 0.00025;

    void validate() const {
        if (w1 < 0.0 || w2 < 0.0) throw ConfigError("loss weights must be >= 0");
        if (std::abs(w1 + w2 - 1.0) > 1e-12) throw ConfigError("loss weights must sum to 1");
    }
};

enum class Phase { pretrain, finetune };

struct TrainRunConfig {
    Phase phase = Phase::pretrain;
    int iterations = 0;
    int batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    LossWeights weights;
    int freeze_count = 0;  // finetune only
    int val_every = 100;

    void validate() const {
        if (iterations <= 0) throw InvalidBudget("iteration budget must be positive");
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        if (val_every < 1) throw ConfigError("validation cadence must be >= 1");
        weights.validate();
    }
};

struct TrainReport {
    std::vector<double> train_loss;                     // one entry per iteration
    std::vector<std::pair<int, double>> val_loss;       // (iteration, supervised loss)
    double l_min = 0.0;
    int best_iteration = -1;
    net::Checkpoint best;
};

// --- losses -----------------------------------------------------------------

double loss_supervised(const std::vector<std::array<double, 3>>& predictions,
                       const std::vector<std::array<double, 3>>& labels);

double loss_unsupervised(const std::vector<std::array<double, 3>>& time_derivatives,
                         const std::vector<std::array<double, 3>>& beta_hats);

double loss_total(double l1, double l2, const LossWeights& w);

// --- optimizer --------------------------------------------------------------

// Adaptive-moment gradient descent over the active blocks only.
class Adam {
  public:
    Adam(const net::ParameterSet& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(net::ParameterSet& params, const std::vector<std::vector<double>>& grads);
    void set_learning_rate(double lr) { lr_ = lr; }

  private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// --- phases -----------------------------------------------------------------

std::vector<std::array<double, 3>> predict(const std::vector<data::WindowedSample>& windows,
                                           const net::ParameterSet& params,
                                           const net::NetworkConfig& cfg,
                                           const net::GuardBounds& bounds,
                                           const KnownCoefficients& phi_k);

double validation_loss(const std::vector<data::WindowedSample>& windows,
                       const net::ParameterSet& params, const net::NetworkConfig& cfg,
                       const net::GuardBounds& bounds, const KnownCoefficients& phi_k);

// Supervised-only optimization of all blocks. `warm_start` continues from an
// existing parameter set instead of a fresh seeded init.
TrainReport pretrain(const TrainRunConfig& rc, const data::Split& split,
                     const net::NetworkConfig& cfg, const net::GuardBounds& bounds,
                     const KnownCoefficients& phi_k,
                     const std::optional<net::ParameterSet>& warm_start = std::nullopt);

// Hybrid fine-tuning: loads the checkpoint, freezes the first
// `rc.freeze_count` blocks, and optimizes the weighted sum of the supervised
// loss and the time-derivative consistency loss.
TrainReport finetune(const net::Checkpoint& start, const TrainRunConfig& rc,
                     const data::Split& split);

void write_curve_csv(const std::string& path, const TrainReport& report);

// --- hyperparameter search ---------------------------------------------------

struct SearchSpace {
    std::array<int, 2> hidden_layers{1, 3};
    std::array<int, 2> gru_layers{0, 1};
    std::array<int, 2> hidden_size{8, 48};
    std::array<int, 2> history{1, 4};
    std::array<int, 2> batch{16, 64};
    std::array<double, 2> lr_log10{-3.5, -2.0};  // sampled uniformly in log10
};

struct SearchPipeline {
    int pretrain_iterations = 400;
    int finetune_iterations = 200;
    LossWeights weights;
    double finetune_lr_scale = 0.3;
    double freeze_fraction = 0.75;
    int val_every = 50;
    double train_ratio = 0.3;
    std::uint64_t split_seed = 0;
};

struct TrialResult {
    int index = 0;
    net::NetworkConfig config;
    double learning_rate = 0.0;
    int batch_size = 0;
    double l_min = 0.0;
    bool failed = false;
    std::string error;
};

struct SearchReport {
    std::vector<TrialResult> trials;
    int best_index = -1;
    net::Checkpoint best;
};

// Seeded random search: samples `trials` configurations, runs the
// pretrain+finetune pipeline on each, and returns the trial with the lowest
// validation loss (first one on ties). Failed trials are recorded and skipped.
SearchReport random_search(const SearchSpace& space, int trials, std::uint64_t seed,
                           const SearchPipeline& pipe,
                           const std::vector<data::RawSample>& samples,
                           const net::GuardBounds& bounds, const KnownCoefficients& phi_k);

}  // namespace stmid::train
