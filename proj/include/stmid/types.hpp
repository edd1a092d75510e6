#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>

#include "stmid/errors.hpp"

namespace stmid {

// Kinematic-dynamic state of the single-track model at one timestep.
struct VehicleState {
    double x = 0.0;         // m
    double y = 0.0;         // m
    double theta = 0.0;     // rad, unwrapped
    double vx = 0.0;        // m/s
    double vy = 0.0;        // m/s
    double omega = 0.0;     // rad/s
    double throttle = 0.0;  // [0, 1]
    double steer = 0.0;     // rad
};

// Per-step actuation deltas.
struct ControlInput {
    double d_throttle = 0.0;
    double d_steer = 0.0;  // rad
};

// Coefficients that are easy to measure directly.
struct KnownCoefficients {
    double mass = 0.0;  // kg
    double lf = 0.0;    // m, CoM to front axle
    double lr = 0.0;    // m, CoM to rear axle

    void validate() const {
        if (!(mass > 0.0) || !(lf > 0.0) || !(lr > 0.0))
            throw ConfigError("known coefficients must be strictly positive");
    }
};

// One axle's magic-formula parameters.
template <class S>
struct AxleCoeffsT {
    S B{}, C{}, D{}, E{}, Sh{}, Sv{};
};

// Full estimated coefficient set: tire curves per axle, drivetrain, inertia.
template <class S>
struct CoeffsT {
    AxleCoeffsT<S> front, rear;
    S Cm1{};  // N
    S Cm2{};  // kg/s
    S Cr0{};  // N
    S Cd{};   // kg/m
    S Iz{};   // kg*m^2
};

using EstimatedCoefficients = CoeffsT<double>;

inline constexpr std::size_t kNumCoefficients = 17;

inline constexpr std::array<std::string_view, kNumCoefficients> kCoefficientNames = {
    "B_f", "C_f", "D_f", "E_f", "Sh_f", "Sv_f",
    "B_r", "C_r", "D_r", "E_r", "Sh_r", "Sv_r",
    "Cm1", "Cm2", "Cr0", "Cd",  "Iz",
};

template <class S>
std::array<S, kNumCoefficients> coeffs_to_array(const CoeffsT<S>& c) {
    return {c.front.B, c.front.C, c.front.D, c.front.E, c.front.Sh, c.front.Sv,
            c.rear.B,  c.rear.C,  c.rear.D,  c.rear.E,  c.rear.Sh,  c.rear.Sv,
            c.Cm1,     c.Cm2,     c.Cr0,     c.Cd,       c.Iz};
}

template <class S>
CoeffsT<S> coeffs_from_array(const std::array<S, kNumCoefficients>& a) {
    CoeffsT<S> c;
    c.front = {a[0], a[1], a[2], a[3], a[4], a[5]};
    c.rear = {a[6], a[7], a[8], a[9], a[10], a[11]};
    c.Cm1 = a[12];
    c.Cm2 = a[13];
    c.Cr0 = a[14];
    c.Cd = a[15];
    c.Iz = a[16];
    return c;
}

// Closed interval per estimated coefficient.
struct CoefficientBounds {
    EstimatedCoefficients lower;
    EstimatedCoefficients upper;

    std::array<double, kNumCoefficients> lower_array() const { return coeffs_to_array(lower); }
    std::array<double, kNumCoefficients> upper_array() const { return coeffs_to_array(upper); }

    void validate() const {
        auto lo = lower_array();
        auto hi = upper_array();
        for (std::size_t i = 0; i < kNumCoefficients; ++i) {
            if (!(lo[i] < hi[i]))
                throw ConfigError(std::string("coefficient bound '") +
                                  std::string(kCoefficientNames[i]) + "' has lower >= upper");
        }
    }

    bool contains(const EstimatedCoefficients& c) const {
        auto lo = lower_array();
        auto hi = upper_array();
        auto v = coeffs_to_array(c);
        for (std::size_t i = 0; i < kNumCoefficients; ++i)
            if (v[i] < lo[i] || v[i] > hi[i]) return false;
        return true;
    }

    EstimatedCoefficients midpoint() const {
        auto lo = lower_array();
        auto hi = upper_array();
        std::array<double, kNumCoefficients> mid;
        for (std::size_t i = 0; i < kNumCoefficients; ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
        return coeffs_from_array(mid);
    }
};

// Body-frame acceleration triple produced by the physics layer.
struct Acceleration {
    double ax = 0.0;         // m/s^2
    double ay = 0.0;         // m/s^2
    double omega_dot = 0.0;  // rad/s^2
};

}  // namespace stmid
