#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "stmid/data.hpp"
#include "stmid/net.hpp"
#include "stmid/types.hpp"

namespace stmid::eval {

struct MetricsReport {
    std::array<double, 3> rmse{};     // vx, vy, omega
    std::array<double, 3> eps_max{};  // max |error| per channel
    std::optional<double> l_min;
    double train_ratio = 0.0;
    std::string run_id;
};

struct ForceCurve {
    std::vector<double> alpha;  // rad, strictly increasing
    std::vector<double> front;
    std::vector<double> rear;
};

MetricsReport compute_metrics(const std::vector<std::array<double, 3>>& predictions,
                              const std::vector<std::array<double, 3>>& labels,
                              const std::vector<double>& loss_history);

// Lateral force response of both axles over a slip-angle grid.
ForceCurve force_sweep(const EstimatedCoefficients& coeffs, double alpha_min, double alpha_max,
                       int grid_size);

struct CoefficientDiff {
    std::array<double, kNumCoefficients> absolute{};
    std::array<double, kNumCoefficients> normalized{};  // |est - gt| / (ub - lb)
};

CoefficientDiff coefficient_diff(const EstimatedCoefficients& estimated,
                                 const EstimatedCoefficients& ground_truth,
                                 const CoefficientBounds& bounds);

// Mean bounded head outputs over a window set; the per-window estimates of a
// converged model are nearly constant, so the mean is the reported estimate.
EstimatedCoefficients mean_coefficients(const std::vector<data::WindowedSample>& windows,
                                        const net::ParameterSet& params,
                                        const net::NetworkConfig& cfg,
                                        const net::GuardBounds& bounds,
                                        const KnownCoefficients& phi_k);

void save_metrics_json(const std::string& path, const MetricsReport& m);
void save_force_curve_csv(const std::string& path, const ForceCurve& curve,
                          const ForceCurve* reference = nullptr);
void save_coefficient_diff_csv(const std::string& path, const CoefficientDiff& diff);

}  // namespace stmid::eval
