#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "stmid/ad.hpp"
#include "stmid/errors.hpp"
#include "stmid/types.hpp"

namespace stmid::dynamics {

// Slip angles divide by vx; samples at or below this speed are rejected
// rather than clamped so the physics stays exact.
inline constexpr double kVEps = 0.05;  // m/s

using ad::scalar_value;

// Rear-wheel longitudinal force from the drivetrain model.
template <class S>
S drivetrain_force_t(const S& vx, const S& throttle, const S& Cm1, const S& Cm2, const S& Cr0,
                     const S& Cd) {
    return (Cm1 - Cm2 * vx * vx) * throttle - Cr0 - Cd * vx * vx;
}

inline double drivetrain_force(double vx, double throttle, const EstimatedCoefficients& c) {
    return drivetrain_force_t<double>(vx, throttle, c.Cm1, c.Cm2, c.Cr0, c.Cd);
}

template <class S, class H>
std::pair<S, S> slip_angles_t(const S& vx, const S& vy, const S& omega, const S& steer, double lf,
                              double lr, const H& Shf, const H& Shr) {
    using std::atan;
    using ad::atan;
    if (!(scalar_value(vx) > kVEps)) throw DegenerateSpeed(scalar_value(vx));
    S alpha_f = steer - atan((omega * lf + vy) / vx) + Shf;
    S alpha_r = atan((omega * lr - vy) / vx) + Shr;
    return {alpha_f, alpha_r};
}

inline std::pair<double, double> slip_angles(const VehicleState& s, const KnownCoefficients& k,
                                             double Shf, double Shr) {
    return slip_angles_t<double>(s.vx, s.vy, s.omega, s.steer, k.lf, k.lr, Shf, Shr);
}

// Magic-formula lateral force for one axle.
template <class S>
S pacejka_lateral_t(const S& alpha, const S& B, const S& C, const S& D, const S& E, const S& Sv) {
    using std::atan;
    using std::sin;
    using ad::atan;
    using ad::sin;
    S Ba = B * alpha;
    return Sv + D * sin(C * atan(Ba - E * (Ba - atan(Ba))));
}

inline double pacejka_lateral(double alpha, double B, double C, double D, double E, double Sv) {
    return pacejka_lateral_t<double>(alpha, B, C, D, E, Sv);
}

template <class S>
struct Accel3 {
    S ax, ay, omega_dot;
};

// Body-frame accelerations from the current state and coefficient estimate.
// The state enters as scalars of type S so the same code serves the plain
// double API and the recorded training graph.
template <class S>
Accel3<S> acceleration_t(const S& vx, const S& vy, const S& omega, const S& throttle,
                         const S& steer, const KnownCoefficients& k, const CoeffsT<S>& c) {
    using std::cos;
    using std::sin;
    using ad::cos;
    using ad::sin;

    S f_rx = drivetrain_force_t<S>(vx, throttle, c.Cm1, c.Cm2, c.Cr0, c.Cd);
    auto [alpha_f, alpha_r] =
        slip_angles_t<S, S>(vx, vy, omega, steer, k.lf, k.lr, c.front.Sh, c.rear.Sh);
    S f_fy = pacejka_lateral_t<S>(alpha_f, c.front.B, c.front.C, c.front.D, c.front.E, c.front.Sv);
    S f_ry = pacejka_lateral_t<S>(alpha_r, c.rear.B, c.rear.C, c.rear.D, c.rear.E, c.rear.Sv);

    S sin_d = sin(steer);
    S cos_d = cos(steer);

    Accel3<S> a;
    a.ax = (f_rx - f_fy * sin_d + k.mass * vy * omega) / k.mass;
    a.ay = (f_ry + f_fy * cos_d - k.mass * vx * omega) / k.mass;
    a.omega_dot = (f_fy * cos_d * k.lf - f_ry * k.lr) / c.Iz;
    return a;
}

inline Acceleration acceleration(const VehicleState& s, const KnownCoefficients& k,
                                 const EstimatedCoefficients& c) {
    auto a = acceleration_t<double>(s.vx, s.vy, s.omega, s.throttle, s.steer, k, c);
    return {a.ax, a.ay, a.omega_dot};
}

// One explicit-Euler step of the full eight-row state update.
inline VehicleState step(const VehicleState& s, const ControlInput& u, double dt,
                         const KnownCoefficients& k, const EstimatedCoefficients& c) {
    if (dt < 0.0) throw ConfigError("step requires dt >= 0");
    VehicleState n = s;
    if (dt > 0.0) {
        Acceleration a = acceleration(s, k, c);
        n.x = s.x + (s.vx * std::cos(s.theta) - s.vy * std::sin(s.theta)) * dt;
        n.y = s.y + (s.vx * std::sin(s.theta) + s.vy * std::cos(s.theta)) * dt;
        n.theta = s.theta + s.omega * dt;
        n.vx = s.vx + a.ax * dt;
        n.vy = s.vy + a.ay * dt;
        n.omega = s.omega + a.omega_dot * dt;
    }
    n.throttle = s.throttle + u.d_throttle;
    n.steer = s.steer + u.d_steer;
    return n;
}

// Jacobian of the velocity-row transition with respect to (vx, vy, omega),
// row-major 3x3.
inline std::array<double, 9> state_jacobian(double omega, double dt) {
    return {1.0, dt * omega, 0.0, -dt * omega, 1.0, 0.0, 0.0, 0.0, 1.0};
}

}  // namespace stmid::dynamics
