#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stmid/ad.hpp"
#include "stmid/data.hpp"
#include "stmid/dynamics.hpp"
#include "stmid/net.hpp"
#include "stmid/train.hpp"

namespace stmid::ekf {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

// Diagonal process / measurement covariance intervals, ordered
// (q_vx, q_vy, q_omega, r_vx, r_vy, r_omega).
struct EkfCovBounds {
    std::array<double, 6> lower{};
    std::array<double, 6> upper{};

    void validate() const {
        for (int i = 0; i < 6; ++i)
            if (!(lower[i] > 0.0 && lower[i] < upper[i]))
                throw ConfigError("covariance bounds must satisfy 0 < lower < upper");
    }
};

// Filter state carried across a trajectory.
struct EkfState {
    Mat3 P{};
    Vec3 x{};
};

// Per-window outcome of the embedded filter. The measurement splits into the
// filtered state and a residual; x_ekf = x_model_pred + n_hat exactly.
struct DenoisedRecord {
    Vec3 x_ekf{};
    Vec3 n_hat{};
    Vec3 measurement{};
    Vec3 x_model_pred{};
    double t_next = 0.0;
    std::size_t label_index = 0;  // row in the source sample vector
};

template <class S>
struct UpdateT {
    std::array<S, 3> x_ekf;
    std::array<S, 3> n_hat;
    std::array<S, 9> P_next;
    std::array<S, 9> K;
};

namespace detail {

// Inverse of a 3x3 matrix via the adjugate. Throws when the determinant
// underflows, which cannot happen for an innovation with positive R.
template <class S>
std::array<S, 9> inverse3(const std::array<S, 9>& m) {
    using ad::scalar_value;
    S c00 = m[4] * m[8] - m[5] * m[7];
    S c01 = m[5] * m[6] - m[3] * m[8];
    S c02 = m[3] * m[7] - m[4] * m[6];
    S det = m[0] * c00 + m[1] * c01 + m[2] * c02;
    if (!(std::abs(scalar_value(det)) > 1e-300))
        throw SingularInnovation("innovation covariance is numerically singular");
    S inv_det = 1.0 / det;
    std::array<S, 9> r;
    r[0] = c00 * inv_det;
    r[1] = (m[2] * m[7] - m[1] * m[8]) * inv_det;
    r[2] = (m[1] * m[5] - m[2] * m[4]) * inv_det;
    r[3] = c01 * inv_det;
    r[4] = (m[0] * m[8] - m[2] * m[6]) * inv_det;
    r[5] = (m[2] * m[3] - m[0] * m[5]) * inv_det;
    r[6] = c02 * inv_det;
    r[7] = (m[1] * m[6] - m[0] * m[7]) * inv_det;
    r[8] = (m[0] * m[4] - m[1] * m[3]) * inv_det;
    return r;
}

}  // namespace detail

// One Kalman update with H = I. The state-transition Jacobian comes from the
// velocity rows of the model, evaluated at the measured yaw rate.
template <class S>
UpdateT<S> ekf_update_t(const std::array<S, 3>& x_model_pred, const Vec3& measurement,
                        double omega, double dt, const std::array<S, 9>& P,
                        const std::array<S, 3>& q_diag, const std::array<S, 3>& r_diag) {
    const Mat3 F = dynamics::state_jacobian(omega, dt);

    // P_pred = F P F^T + Q
    std::array<S, 9> FP;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            FP[i * 3 + j] =
                F[i * 3 + 0] * P[0 + j] + F[i * 3 + 1] * P[3 + j] + F[i * 3 + 2] * P[6 + j];
    std::array<S, 9> P_pred;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            P_pred[i * 3 + j] = FP[i * 3 + 0] * F[j * 3 + 0] + FP[i * 3 + 1] * F[j * 3 + 1] +
                                FP[i * 3 + 2] * F[j * 3 + 2];
    for (int i = 0; i < 3; ++i) P_pred[i * 3 + i] = P_pred[i * 3 + i] + q_diag[i];

    // S = P_pred + R, K = P_pred S^-1
    std::array<S, 9> innov = P_pred;
    for (int i = 0; i < 3; ++i) innov[i * 3 + i] = innov[i * 3 + i] + r_diag[i];
    std::array<S, 9> inv = detail::inverse3(innov);

    UpdateT<S> out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.K[i * 3 + j] = P_pred[i * 3 + 0] * inv[0 + j] + P_pred[i * 3 + 1] * inv[3 + j] +
                               P_pred[i * 3 + 2] * inv[6 + j];

    std::array<S, 3> y;
    for (int i = 0; i < 3; ++i) y[i] = measurement[i] - x_model_pred[i];
    for (int i = 0; i < 3; ++i) {
        out.n_hat[i] =
            out.K[i * 3 + 0] * y[0] + out.K[i * 3 + 1] * y[1] + out.K[i * 3 + 2] * y[2];
        out.x_ekf[i] = x_model_pred[i] + out.n_hat[i];
    }

    // P_next = (I - K) P_pred, symmetrized
    std::array<S, 9> Pn;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            S kp = out.K[i * 3 + 0] * P_pred[0 + j] + out.K[i * 3 + 1] * P_pred[3 + j] +
                   out.K[i * 3 + 2] * P_pred[6 + j];
            Pn[i * 3 + j] = P_pred[i * 3 + j] - kp;
        }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.P_next[i * 3 + j] = 0.5 * (Pn[i * 3 + j] + Pn[j * 3 + i]);
    return out;
}

struct UpdateResult {
    Vec3 x_ekf{};
    Vec3 n_hat{};
    Mat3 P_next{};
    Mat3 K{};
};

UpdateResult ekf_update(const Vec3& x_model_pred, const Vec3& measurement, double omega,
                        double dt, const Mat3& P, const Vec3& q_diag, const Vec3& r_diag);

// --- filter pass over a window sequence -------------------------------------

struct FilterOptions {
    double p0 = 0.1;  // initial covariance is p0 * I
};

// Runs the network in covariance-emitting mode across trajectory-ordered
// windows, chaining P and resetting it at time discontinuities. Pure value
// domain; used for validation, export and tests.
std::vector<DenoisedRecord> ekf_forward(const std::vector<data::WindowedSample>& windows,
                                        const net::ParameterSet& params,
                                        const net::NetworkConfig& cfg,
                                        const net::GuardBounds& bounds,
                                        const KnownCoefficients& phi_k,
                                        const FilterOptions& opt = {});

double loss_ekf_supervised(const std::vector<DenoisedRecord>& records);

// --- denoiser training --------------------------------------------------------

struct DenoiseTrainConfig {
    int pretrain_iterations = 1334;
    int finetune_iterations = 666;
    int chunk = 32;  // contiguous windows per iteration
    double learning_rate = 2e-3;
    double finetune_lr_scale = 0.3;
    train::LossWeights weights;
    std::uint64_t seed = 0;
    int val_every = 100;
    double freeze_fraction = 0.75;
    FilterOptions filter;

    void validate() const {
        if (pretrain_iterations <= 0 || finetune_iterations < 0)
            throw InvalidBudget("denoiser iteration budget must be positive");
        if (chunk < 1) throw ConfigError("chunk length must be >= 1");
        weights.validate();
    }
};

struct DenoiseTrainResult {
    net::Checkpoint best;
    double l_min = 0.0;
    train::TrainReport pretrain_report;
    train::TrainReport finetune_report;
};

// Trains the covariance-emitting estimator on its own measurements: a
// supervised phase first, then layer-frozen hybrid fine-tuning with the
// time-derivative consistency term on the denoised signal.
DenoiseTrainResult train_denoiser(const std::vector<data::WindowedSample>& windows,
                                  const net::NetworkConfig& cfg, const net::GuardBounds& bounds,
                                  const KnownCoefficients& phi_k,
                                  const DenoiseTrainConfig& dc);

// --- dataset export ----------------------------------------------------------

struct DenoiseOutput {
    std::vector<data::RawSample> filtered;       // velocities replaced where windows exist
    std::vector<std::array<double, 4>> noise;    // time, n_vx, n_vy, n_omega per row
    std::vector<DenoisedRecord> records;
};

DenoiseOutput denoise_dataset(const std::vector<data::RawSample>& samples,
                              const net::Checkpoint& ck, const FilterOptions& opt = {});

void save_noise_csv(const std::string& path, const std::vector<std::array<double, 4>>& noise);

// --- coefficient range adjustment ---------------------------------------------

struct RangeAdjustment {
    int round;
    std::string entry;
    std::string side;  // "lower" or "upper"
    double old_bound;
    double new_bound;
};

struct AdjustResult {
    CoefficientBounds bounds;
    std::vector<RangeAdjustment> log;
};

// Widens any interval whose estimate sits within epsilon_frac of a bound by
// expand_factor times the current width on that side, up to max_rounds passes.
AdjustResult adjust_ranges(const EstimatedCoefficients& estimate, CoefficientBounds bounds,
                           double epsilon_frac, double expand_factor, int max_rounds);

}  // namespace stmid::ekf
