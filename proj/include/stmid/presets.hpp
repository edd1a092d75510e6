#pragma once

#include <array>
#include <string>

#include "stmid/types.hpp"

namespace stmid::presets {

// Coefficient ranges for the scaled-simulation regime.
CoefficientBounds sim_bounds();

// Coefficient ranges for full-scale telemetry, before and after the
// boundary-driven range adjustment.
CoefficientBounds real_bounds();
CoefficientBounds real_adjusted_bounds();

CoefficientBounds bounds_preset(const std::string& name);

// Default simulated ground truth: range midpoints except for the tire peak
// and stiffness factors, which are pinned for a well-conditioned force curve.
EstimatedCoefficients default_ground_truth();

// 1:43-scale chassis constants.
KnownCoefficients default_known_coefficients();

// Process / measurement covariance diagonal bounds, ordered
// (q_vx, q_vy, q_omega, r_vx, r_vy, r_omega).
struct CovBoundsPreset {
    std::array<double, 6> lower;
    std::array<double, 6> upper;
};

// Full-scale telemetry preset.
CovBoundsPreset cov_bounds_real();

// Bounds matched to the synthetic-noise regime of the bundled simulator.
CovBoundsPreset cov_bounds_sim_noise();

}  // namespace stmid::presets
