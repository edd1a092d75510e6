#include "stmid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stmid/dynamics.hpp"

namespace stmid::eval {

using json = nlohmann::ordered_json;

MetricsReport compute_metrics(const std::vector<std::array<double, 3>>& predictions,
                              const std::vector<std::array<double, 3>>& labels,
                              const std::vector<double>& loss_history) {
    if (predictions.empty()) throw EmptyInput("metrics need at least one prediction");
    if (predictions.size() != labels.size())
        throw ConfigError("prediction/label length mismatch");

    MetricsReport m;
    for (int c = 0; c < 3; ++c) {
        double sum_sq = 0.0;
        double max_abs = 0.0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            double e = predictions[i][c] - labels[i][c];
            sum_sq += e * e;
            max_abs = std::max(max_abs, std::abs(e));
        }
        m.rmse[c] = std::sqrt(sum_sq / predictions.size());
        m.eps_max[c] = max_abs;
    }
    if (!loss_history.empty())
        m.l_min = *std::min_element(loss_history.begin(), loss_history.end());
    return m;
}

ForceCurve force_sweep(const EstimatedCoefficients& coeffs, double alpha_min, double alpha_max,
                       int grid_size) {
    if (grid_size < 2) throw ConfigError("force sweep needs a grid of at least 2 points");
    if (!(alpha_min < alpha_max)) throw ConfigError("force sweep range is empty");

    ForceCurve c;
    c.alpha.reserve(grid_size);
    c.front.reserve(grid_size);
    c.rear.reserve(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        double a = alpha_min + (alpha_max - alpha_min) * i / (grid_size - 1);
        c.alpha.push_back(a);
        c.front.push_back(dynamics::pacejka_lateral(a, coeffs.front.B, coeffs.front.C,
                                                    coeffs.front.D, coeffs.front.E,
                                                    coeffs.front.Sv));
        c.rear.push_back(dynamics::pacejka_lateral(a, coeffs.rear.B, coeffs.rear.C,
                                                   coeffs.rear.D, coeffs.rear.E,
                                                   coeffs.rear.Sv));
    }
    return c;
}

CoefficientDiff coefficient_diff(const EstimatedCoefficients& estimated,
                                 const EstimatedCoefficients& ground_truth,
                                 const CoefficientBounds& bounds) {
    bounds.validate();
    CoefficientDiff d;
    auto est = coeffs_to_array(estimated);
    auto gt = coeffs_to_array(ground_truth);
    auto lo = bounds.lower_array();
    auto hi = bounds.upper_array();
    for (std::size_t i = 0; i < kNumCoefficients; ++i) {
        d.absolute[i] = std::abs(est[i] - gt[i]);
        d.normalized[i] = d.absolute[i] / (hi[i] - lo[i]);
    }
    return d;
}

EstimatedCoefficients mean_coefficients(const std::vector<data::WindowedSample>& windows,
                                        const net::ParameterSet& params,
                                        const net::NetworkConfig& cfg,
                                        const net::GuardBounds& bounds,
                                        const KnownCoefficients& phi_k) {
    if (windows.empty()) throw EmptyInput("no windows to estimate coefficients from");
    std::array<double, kNumCoefficients> acc{};
    for (const auto& w : windows) {
        auto fw = net::forward(w, params, cfg, bounds, phi_k);
        for (std::size_t i = 0; i < kNumCoefficients; ++i) acc[i] += fw.bounded[i];
    }
    for (auto& v : acc) v /= static_cast<double>(windows.size());
    return coeffs_from_array(acc);
}

void save_metrics_json(const std::string& path, const MetricsReport& m) {
    json j;
    j["run_id"] = m.run_id;
    j["train_ratio"] = m.train_ratio;
    j["rmse"] = {{"vx", m.rmse[0]}, {"vy", m.rmse[1]}, {"omega", m.rmse[2]}};
    j["eps_max"] = {{"vx", m.eps_max[0]}, {"vy", m.eps_max[1]}, {"omega", m.eps_max[2]}};
    if (m.l_min) j["l_min"] = *m.l_min;
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

void save_force_curve_csv(const std::string& path, const ForceCurve& curve,
                          const ForceCurve* reference) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << (reference ? "alpha,f_fy,f_ry,f_fy_gt,f_ry_gt" : "alpha,f_fy,f_ry") << '\n';
    char buf[256];
    for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
        if (reference) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g", curve.alpha[i],
                          curve.front[i], curve.rear[i], reference->front[i],
                          reference->rear[i]);
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", curve.alpha[i], curve.front[i],
                          curve.rear[i]);
        }
        out << buf << '\n';
    }
}

void save_coefficient_diff_csv(const std::string& path, const CoefficientDiff& diff) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "coefficient,absolute_diff,normalized_diff\n";
    char buf[160];
    for (std::size_t i = 0; i < kNumCoefficients; ++i) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g",
                      std::string(kCoefficientNames[i]).c_str(), diff.absolute[i],
                      diff.normalized[i]);
        out << buf << '\n';
    }
}

}  // namespace stmid::eval
