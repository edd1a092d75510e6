#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stmid/data.hpp"
#include "stmid/types.hpp"

namespace stmid::sim {

// Closed-loop reference path with a speed profile. The default track is a
// small oval sized for a 1:43 vehicle.
struct TrackSpec {
    std::vector<std::array<double, 2>> waypoints;  // closed: first ~= last
    double lookahead = 0.4;                        // m
    double target_speed = 1.0;                     // m/s, base value
    double speed_modulation = 0.8;                 // m/s, sinusoidal amplitude
    double speed_modulation_hz = 0.15;

    void validate() const;
};

struct ControlLimits {
    double max_d_throttle = 0.05;   // per step
    double max_d_steer = 0.025;     // rad per step
    double max_steer = 0.3;         // rad
    double throttle_gain = 1.2;     // d_throttle per (m/s) of speed error
    double steer_dither = 0.025;    // rad, uniform dither on the steer command
};

struct SimRun {
    EstimatedCoefficients ground_truth;
    KnownCoefficients phi_k;
    double sample_rate_hz = 50.0;
    std::size_t sample_count = 1000;
    std::uint64_t seed = 0;
    ControlLimits limits;
    int bootstrap_steps = 25;
    double bootstrap_d_throttle = 0.04;

    double dt() const { return 1.0 / sample_rate_hz; }
    void validate() const;
};

// Pure-pursuit steering plus proportional speed tracking, saturated to the
// per-step limits.
ControlInput pure_pursuit_control(const VehicleState& state, const TrackSpec& track,
                                  double target_speed, const ControlLimits& limits);

TrackSpec default_track();

// Roll the single-track model forward from a standing start. The first
// `bootstrap_steps` steps apply a fixed throttle ramp with the wheel held
// straight; pure pursuit takes over once the model is above the slip-angle
// speed guard. Deterministic for a fixed seed.
std::vector<data::RawSample> generate_dataset(const SimRun& run, const TrackSpec& track);

// Zero-mean Gaussian noise on the velocity channels only. Controls, pose and
// timestamps pass through untouched; the input is left intact.
std::vector<data::RawSample> inject_noise(const std::vector<data::RawSample>& samples,
                                          const std::array<double, 3>& sigma,
                                          std::uint64_t seed);

}  // namespace stmid::sim
