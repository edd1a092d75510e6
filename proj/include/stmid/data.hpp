#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stmid/errors.hpp"
#include "stmid/types.hpp"

namespace stmid::data {

// One telemetry row. Pose columns are optional in the file format.
struct RawSample {
    double time = 0.0;  // s, strictly increasing across a file
    double vx = 0.0;
    double vy = 0.0;
    double omega = 0.0;
    double throttle = 0.0;
    double steer = 0.0;
    double d_throttle = 0.0;
    double d_steer = 0.0;
    bool has_pose = false;
    double x = 0.0, y = 0.0, theta = 0.0;
};

inline constexpr int kFeaturesPerRow = 7;  // vx, vy, omega, throttle, steer, dT, dSteer

// N consecutive feature rows plus the next-step velocity label.
struct WindowedSample {
    std::vector<double> history;  // N * kFeaturesPerRow, row-major
    std::array<double, 3> label{};  // vx, vy, omega at t_next
    double t_now = 0.0;
    double t_next = 0.0;
    int n = 0;
    std::size_t label_index = 0;  // index of the label row in the source samples

    const double* row(int k) const { return history.data() + k * kFeaturesPerRow; }
};

struct SplitSpec {
    double train_ratio = 1.0;  // (0, 1]
    std::uint64_t seed = 0;

    void validate() const {
        if (!(train_ratio > 0.0 && train_ratio <= 1.0))
            throw ConfigError("train ratio must lie in (0, 1]");
    }
};

struct Split {
    std::vector<WindowedSample> train;
    std::vector<WindowedSample> validation;  // always the full window set
};

struct LoadResult {
    std::vector<RawSample> samples;
    std::size_t dropped_low_speed = 0;  // rows with vx <= v_eps
};

// Parse and validate a dataset CSV. Rows with vx <= v_eps are dropped and
// counted; non-monotone time or a wrong header is an error.
LoadResult load_csv(const std::string& path);

void save_csv(const std::string& path, const std::vector<RawSample>& samples);

// Robust nominal sampling interval (median of successive differences).
double nominal_dt(const std::vector<RawSample>& samples);

// Slide an N-row window over the samples. Windows spanning a time gap larger
// than 1.5x the nominal dt are skipped.
std::vector<WindowedSample> window(const std::vector<RawSample>& samples, int n);

// Train subset is a uniform random draw of ceil(ratio * len) windows without
// replacement; validation is always the full set.
Split split(const std::vector<WindowedSample>& windows, const SplitSpec& spec);

}  // namespace stmid::data
