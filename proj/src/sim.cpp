#include "stmid/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stmid/dynamics.hpp"
#include "stmid/rng.hpp"

namespace stmid::sim {

namespace {

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Point on the track polyline at arc distance `ahead` past the closest point
// to (x, y). The polyline is treated as a closed loop.
std::array<double, 2> lookahead_point(const TrackSpec& track, double x, double y, double ahead) {
    const auto& wp = track.waypoints;
    const std::size_t n = wp.size();

    // closest vertex
    std::size_t best = 0;
    double best_d2 = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = wp[i][0] - x, dy = wp[i][1] - y;
        double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }

    // walk forward along the loop
    double remaining = ahead;
    std::size_t i = best;
    while (true) {
        std::size_t j = (i + 1) % n;
        double dx = wp[j][0] - wp[i][0], dy = wp[j][1] - wp[i][1];
        double seg = std::hypot(dx, dy);
        if (seg >= remaining || seg == 0.0) {
            double f = seg > 0.0 ? remaining / seg : 0.0;
            return {wp[i][0] + f * dx, wp[i][1] + f * dy};
        }
        remaining -= seg;
        i = j;
    }
}

}  // namespace

void TrackSpec::validate() const {
    if (waypoints.size() < 3) throw ConfigError("track needs at least 3 waypoints");
    double dx = waypoints.front()[0] - waypoints.back()[0];
    double dy = waypoints.front()[1] - waypoints.back()[1];
    if (std::hypot(dx, dy) > 1e-9) throw ConfigError("track must be a closed loop");
    if (!(lookahead > 0.0)) throw ConfigError("lookahead must be positive");
}

void SimRun::validate() const {
    if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
    if (sample_count < 2) throw ConfigError("sample count must be >= 2");
    phi_k.validate();
}

TrackSpec default_track() {
    // 12-waypoint oval, roughly 3.0 m x 1.5 m: two straights joined by
    // semicircular ends of radius 0.75 m.
    TrackSpec t;
    const double r = 0.75;
    const double half_straight = 0.75;
    auto arc = [&](double cx, double a0, double a1, int steps, bool include_last) {
        for (int k = 0; k < steps + (include_last ? 1 : 0); ++k) {
            double a = a0 + (a1 - a0) * k / steps;
            t.waypoints.push_back({cx + r * std::cos(a), r * std::sin(a)});
        }
    };
    t.waypoints.push_back({-half_straight, -r});
    t.waypoints.push_back({0.0, -r});
    arc(half_straight, -M_PI / 2, M_PI / 2, 3, true);
    t.waypoints.push_back({0.0, r});
    arc(-half_straight, M_PI / 2, 3 * M_PI / 2, 3, false);
    t.waypoints.push_back({-half_straight - r, 0.0});
    t.waypoints.push_back(t.waypoints.front());
    return t;
}

ControlInput pure_pursuit_control(const VehicleState& state, const TrackSpec& track,
                                  double target_speed, const ControlLimits& limits) {
    auto goal = lookahead_point(track, state.x, state.y, track.lookahead);
    double dx = goal[0] - state.x;
    double dy = goal[1] - state.y;
    // goal bearing in the body frame
    double local_x = std::cos(state.theta) * dx + std::sin(state.theta) * dy;
    double local_y = -std::sin(state.theta) * dx + std::cos(state.theta) * dy;
    double dist = std::hypot(local_x, local_y);

    ControlInput u;
    if (dist > 1e-9) {
        double heading_err = std::atan2(local_y, local_x);
        double curvature = 2.0 * std::sin(heading_err) / std::max(dist, 1e-6);
        double wheelbase = 0.06;  // steering geometry scale only; not a model parameter
        double steer_des = std::atan(curvature * wheelbase);
        // aim inside the envelope, then rate-limit; the per-step limit wins
        steer_des = clip(steer_des, -limits.max_steer, limits.max_steer);
        u.d_steer = clip(steer_des - state.steer, -limits.max_d_steer, limits.max_d_steer);
    }

    double dthr = limits.throttle_gain * (target_speed - state.vx);
    dthr = clip(dthr, -limits.max_d_throttle, limits.max_d_throttle);
    u.d_throttle = clip(dthr, -state.throttle, 1.0 - state.throttle);
    return u;
}

std::vector<data::RawSample> generate_dataset(const SimRun& run, const TrackSpec& track) {
    run.validate();
    track.validate();

    auto rng = substream(run.seed, "sim.dither");
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double dt = run.dt();

    VehicleState s;
    s.x = track.waypoints.front()[0];
    s.y = track.waypoints.front()[1];
    {
        // face along the first segment
        double dx = track.waypoints[1][0] - track.waypoints[0][0];
        double dy = track.waypoints[1][1] - track.waypoints[0][1];
        s.theta = std::atan2(dy, dx);
    }

    std::vector<data::RawSample> out;
    out.reserve(run.sample_count);

    for (std::size_t k = 0; k < run.sample_count; ++k) {
        double t = static_cast<double>(k) * dt;

        ControlInput u;
        if (static_cast<int>(k) < run.bootstrap_steps) {
            u.d_throttle = clip(run.bootstrap_d_throttle, -s.throttle, 1.0 - s.throttle);
            u.d_steer = 0.0;
        } else {
            double target = track.target_speed +
                            track.speed_modulation *
                                std::sin(2.0 * M_PI * track.speed_modulation_hz * t);
            u = pure_pursuit_control(s, track, target, run.limits);
            if (run.limits.steer_dither > 0.0) {
                double d = run.limits.steer_dither * unit(rng);
                u.d_steer = clip(u.d_steer + d, -run.limits.max_d_steer, run.limits.max_d_steer);
                u.d_steer = clip(u.d_steer, -run.limits.max_steer - s.steer,
                                 run.limits.max_steer - s.steer);
            }
        }

        data::RawSample row;
        row.time = t;
        row.vx = s.vx;
        row.vy = s.vy;
        row.omega = s.omega;
        row.throttle = s.throttle;
        row.steer = s.steer;
        row.d_throttle = u.d_throttle;
        row.d_steer = u.d_steer;
        row.has_pose = true;
        row.x = s.x;
        row.y = s.y;
        row.theta = s.theta;
        out.push_back(row);

        if (s.vx > dynamics::kVEps) {
            s = dynamics::step(s, u, dt, run.phi_k, run.ground_truth);
        } else {
            // Below the slip-angle guard the lateral channels are still zero,
            // so only the drivetrain row is integrated. These rows are
            // rejected at load time anyway.
            double f = dynamics::drivetrain_force(s.vx, s.throttle, run.ground_truth);
            s.x += (s.vx * std::cos(s.theta) - s.vy * std::sin(s.theta)) * dt;
            s.y += (s.vx * std::sin(s.theta) + s.vy * std::cos(s.theta)) * dt;
            s.theta += s.omega * dt;
            s.vx = std::max(0.0, s.vx + f / run.phi_k.mass * dt);
            s.throttle += u.d_throttle;
            s.steer += u.d_steer;
        }

        if (!(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.vx) &&
              std::isfinite(s.vy) && std::isfinite(s.omega)))
            throw SimDiverged(k);
    }
    return out;
}

std::vector<data::RawSample> inject_noise(const std::vector<data::RawSample>& samples,
                                          const std::array<double, 3>& sigma,
                                          std::uint64_t seed) {
    for (double s : sigma)
        if (s < 0.0) throw ConfigError("noise sigma must be >= 0");

    auto rng = substream(seed, "noise");
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<data::RawSample> out = samples;
    for (auto& s : out) {
        s.vx += sigma[0] * gauss(rng);
        s.vy += sigma[1] * gauss(rng);
        s.omega += sigma[2] * gauss(rng);
    }
    return out;
}

}  // namespace stmid::sim
