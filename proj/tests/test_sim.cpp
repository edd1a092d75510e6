#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "stmid/dynamics.hpp"
#include "stmid/presets.hpp"
#include "stmid/sim.hpp"

using namespace stmid;
using doctest::Approx;

namespace {

sim::SimRun default_run(std::uint64_t seed = 42) {
    sim::SimRun run;
    run.ground_truth = presets::default_ground_truth();
    run.phi_k = presets::default_known_coefficients();
    run.seed = seed;
    return run;
}

}  // namespace

TEST_CASE("pure pursuit control") {
    sim::TrackSpec track = sim::default_track();
    sim::ControlLimits limits;

    SUBCASE("on the straight at target speed the command is near zero") {
        VehicleState s;
        s.x = track.waypoints.front()[0];
        s.y = track.waypoints.front()[1];
        s.theta = 0.0;  // first segment points along +x
        s.vx = 1.5;
        auto u = sim::pure_pursuit_control(s, track, 1.5, limits);
        CHECK(std::abs(u.d_throttle) < 1e-9);
        CHECK(std::abs(u.d_steer) < 5e-3);
    }
    SUBCASE("lookahead far to the left saturates the steer delta") {
        VehicleState s;
        s.x = track.waypoints.front()[0];
        s.y = track.waypoints.front()[1];
        s.theta = -M_PI / 2;  // goal is 90 degrees to the left
        s.vx = 1.0;
        auto u = sim::pure_pursuit_control(s, track, 1.0, limits);
        CHECK(u.d_steer == Approx(limits.max_d_steer));
    }
    SUBCASE("commands respect the clip limits for any state") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int i = 0; i < 10000; ++i) {
            VehicleState s;
            s.x = 4.0 * (u01(rng) - 0.5);
            s.y = 3.0 * (u01(rng) - 0.5);
            s.theta = 8.0 * (u01(rng) - 0.5);
            s.vx = 3.0 * u01(rng);
            s.throttle = u01(rng);
            s.steer = 0.8 * (u01(rng) - 0.5);
            auto u = sim::pure_pursuit_control(s, track, 2.0 * u01(rng), limits);
            CHECK(std::abs(u.d_steer) <= limits.max_d_steer + 1e-12);
            CHECK(std::abs(u.d_throttle) <= limits.max_d_throttle + 1e-12);
            CHECK(s.throttle + u.d_throttle >= -1e-12);
            CHECK(s.throttle + u.d_throttle <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("dataset generation") {
    sim::SimRun run = default_run();
    sim::TrackSpec track = sim::default_track();

    SUBCASE("timestamps follow the sample rate") {
        auto rows = sim::generate_dataset(run, track);
        REQUIRE(rows.size() == 1000);
        CHECK(rows[0].time == 0.0);
        CHECK(rows[1].time == Approx(0.02).epsilon(1e-15));
        CHECK(rows.back().time == Approx(19.98).epsilon(1e-12));
    }
    SUBCASE("same seed is bit-identical, different seed is not") {
        auto a = sim::generate_dataset(run, track);
        auto b = sim::generate_dataset(run, track);
        REQUIRE(a.size() == b.size());
        bool identical = true;
        for (std::size_t i = 0; i < a.size(); ++i) {
            identical = identical && a[i].vx == b[i].vx && a[i].vy == b[i].vy &&
                        a[i].omega == b[i].omega && a[i].steer == b[i].steer;
        }
        CHECK(identical);
    }
    SUBCASE("trajectory re-propagates through the model with zero residual") {
        auto rows = sim::generate_dataset(run, track);
        std::size_t checked = 0;
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            if (rows[i].vx <= dynamics::kVEps) continue;
            VehicleState s;
            s.x = rows[i].x;
            s.y = rows[i].y;
            s.theta = rows[i].theta;
            s.vx = rows[i].vx;
            s.vy = rows[i].vy;
            s.omega = rows[i].omega;
            s.throttle = rows[i].throttle;
            s.steer = rows[i].steer;
            auto n = dynamics::step(s, {rows[i].d_throttle, rows[i].d_steer}, run.dt(),
                                    run.phi_k, run.ground_truth);
            CHECK(n.vx == rows[i + 1].vx);
            CHECK(n.vy == rows[i + 1].vy);
            CHECK(n.omega == rows[i + 1].omega);
            CHECK(n.x == rows[i + 1].x);
            ++checked;
        }
        CHECK(checked > 900);
    }
    SUBCASE("speed exceeds the guard after the bootstrap phase") {
        auto rows = sim::generate_dataset(run, track);
        for (std::size_t i = run.bootstrap_steps; i < rows.size(); ++i)
            CHECK(rows[i].vx > dynamics::kVEps);
    }
}

TEST_CASE("noise injection") {
    sim::SimRun run = default_run();
    auto rows = sim::generate_dataset(run, sim::default_track());

    SUBCASE("zero sigma is the identity") {
        auto noisy = sim::inject_noise(rows, {0.0, 0.0, 0.0}, 1);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(noisy[i].vx == rows[i].vx);
            CHECK(noisy[i].vy == rows[i].vy);
            CHECK(noisy[i].omega == rows[i].omega);
        }
    }
    SUBCASE("empirical channel std matches sigma within 5%") {
        std::vector<data::RawSample> big(10000);
        for (std::size_t i = 0; i < big.size(); ++i) big[i].time = 0.02 * i;
        auto noisy = sim::inject_noise(big, {0.1, 0.05, 0.02}, 7);
        double s2[3] = {};
        for (std::size_t i = 0; i < big.size(); ++i) {
            s2[0] += noisy[i].vx * noisy[i].vx;
            s2[1] += noisy[i].vy * noisy[i].vy;
            s2[2] += noisy[i].omega * noisy[i].omega;
        }
        CHECK(std::sqrt(s2[0] / big.size()) == Approx(0.1).epsilon(0.05));
        CHECK(std::sqrt(s2[1] / big.size()) == Approx(0.05).epsilon(0.05));
        CHECK(std::sqrt(s2[2] / big.size()) == Approx(0.02).epsilon(0.05));
    }
    SUBCASE("controls, pose and timestamps pass through; seed reproduces") {
        auto a = sim::inject_noise(rows, {0.05, 0.02, 0.01}, 3);
        auto b = sim::inject_noise(rows, {0.05, 0.02, 0.01}, 3);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(a[i].time == rows[i].time);
            CHECK(a[i].throttle == rows[i].throttle);
            CHECK(a[i].steer == rows[i].steer);
            CHECK(a[i].d_throttle == rows[i].d_throttle);
            CHECK(a[i].x == rows[i].x);
            CHECK(a[i].vx == b[i].vx);
            CHECK(a[i].vy == b[i].vy);
            CHECK(a[i].omega == b[i].omega);
        }
    }
}
