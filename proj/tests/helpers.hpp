#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "stmid/data.hpp"
#include "stmid/net.hpp"
#include "stmid/presets.hpp"
#include "stmid/types.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

inline stmid::EstimatedCoefficients random_coeffs(std::mt19937_64& rng) {
    auto b = stmid::presets::sim_bounds();
    auto lo = b.lower_array();
    auto hi = b.upper_array();
    std::array<double, stmid::kNumCoefficients> v;
    std::uniform_real_distribution<double> u(0.15, 0.85);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
    return stmid::coeffs_from_array(v);
}

inline stmid::VehicleState random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    stmid::VehicleState s;
    s.x = u(rng);
    s.y = u(rng);
    s.theta = 2.0 * u(rng);
    s.vx = 0.8 + 0.6 * std::abs(u(rng));  // comfortably above the speed guard
    s.vy = 0.15 * u(rng);
    s.omega = 1.5 * u(rng);
    s.throttle = 0.5 + 0.5 * std::abs(u(rng)) * 0.9;
    s.steer = 0.3 * u(rng);
    return s;
}

inline stmid::data::WindowedSample random_window(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    stmid::data::WindowedSample w;
    w.n = n;
    w.history.resize(static_cast<std::size_t>(n) * stmid::data::kFeaturesPerRow);
    for (int k = 0; k < n; ++k) {
        double* r = w.history.data() + k * stmid::data::kFeaturesPerRow;
        r[0] = 1.0 + 0.5 * u(rng);   // vx
        r[1] = 0.1 * u(rng);         // vy
        r[2] = 1.0 * u(rng);         // omega
        r[3] = 0.5 + 0.4 * u(rng);   // throttle
        r[4] = 0.25 * u(rng);        // steer
        r[5] = 0.02 * u(rng);        // d_throttle
        r[6] = 0.01 * u(rng);        // d_steer
    }
    w.t_now = 1.0;
    w.t_next = 1.02;
    w.label = {1.0 + 0.4 * u(rng), 0.1 * u(rng), 0.8 * u(rng)};
    w.label_index = static_cast<std::size_t>(n);
    return w;
}

inline stmid::KnownCoefficients test_phi_k() { return stmid::presets::default_known_coefficients(); }

}  // namespace testutil
