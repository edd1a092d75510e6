#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "stmid/dynamics.hpp"
#include "stmid/presets.hpp"

using namespace stmid;
using doctest::Approx;
using testutil::random_coeffs;
using testutil::random_state;

TEST_CASE("drivetrain force") {
    EstimatedCoefficients c{};
    SUBCASE("standstill with zero throttle leaves only rolling resistance") {
        c.Cr0 = 0.07;
        CHECK(dynamics::drivetrain_force(0.0, 0.0, c) == Approx(-0.07));
    }
    SUBCASE("linear throttle term") {
        c.Cm1 = 1.0;
        CHECK(dynamics::drivetrain_force(3.0, 0.5, c) == Approx(0.5));
    }
    SUBCASE("full expression") {
        c.Cm1 = 0.3;
        c.Cm2 = 0.05;
        c.Cr0 = 0.05;
        c.Cd = 0.01;
        CHECK(dynamics::drivetrain_force(2.0, 0.8, c) == Approx(-0.01).epsilon(1e-12));
    }
}

TEST_CASE("slip angles") {
    KnownCoefficients k{1.0, 1.0, 1.0};
    SUBCASE("pure steering offset") {
        VehicleState s;
        s.vx = 1.0;
        s.steer = 0.1;
        auto [af, ar] = dynamics::slip_angles(s, k, 0.0, 0.0);
        CHECK(af == Approx(0.1));
        CHECK(ar == Approx(0.0));
    }
    SUBCASE("unit yaw rate gives +-pi/4") {
        VehicleState s;
        s.vx = 1.0;
        s.omega = 1.0;
        auto [af, ar] = dynamics::slip_angles(s, k, 0.0, 0.0);
        CHECK(af == Approx(-M_PI / 4));
        CHECK(ar == Approx(M_PI / 4));
    }
    SUBCASE("frozen oracle values") {
        KnownCoefficients k2{1.0, 0.5, 0.6};
        VehicleState s;
        s.vx = 2.0;
        s.vy = 0.1;
        s.omega = 0.5;
        s.steer = 0.05;
        auto [af, ar] = dynamics::slip_angles(s, k2, 0.0, 0.0);
        CHECK(af == Approx(-0.12324566645236494).epsilon(1e-14));
        CHECK(ar == Approx(0.099668652491162024).epsilon(1e-14));
    }
    SUBCASE("speed guard") {
        VehicleState s;
        s.vx = 0.05;
        CHECK_THROWS_AS(dynamics::slip_angles(s, k, 0.0, 0.0), DegenerateSpeed);
        s.vx = 0.0500001;
        CHECK_NOTHROW(dynamics::slip_angles(s, k, 0.0, 0.0));
    }
    SUBCASE("horizontal shifts add verbatim") {
        VehicleState s;
        s.vx = 1.7;
        s.vy = 0.02;
        s.omega = 0.4;
        auto [af0, ar0] = dynamics::slip_angles(s, k, 0.0, 0.0);
        auto [af1, ar1] = dynamics::slip_angles(s, k, 0.01, -0.02);
        CHECK(af1 == Approx(af0 + 0.01));
        CHECK(ar1 == Approx(ar0 - 0.02));
    }
}

TEST_CASE("pacejka lateral force") {
    SUBCASE("zero slip, zero shift") {
        CHECK(dynamics::pacejka_lateral(0.0, 11.0, 1.4, 1.0, -0.5, 0.0) == 0.0);
    }
    SUBCASE("E term cancels at E=0") {
        double f = dynamics::pacejka_lateral(0.07, 9.0, 1.3, 0.8, 0.0, 0.0);
        double want = 0.8 * std::sin(1.3 * std::atan(9.0 * 0.07));
        CHECK(f == Approx(want).epsilon(1e-14));
    }
    SUBCASE("frozen oracle value") {
        CHECK(dynamics::pacejka_lateral(0.05, 10.0, 1.5, 1.0, -0.5, 0.0) ==
              Approx(0.65721968618584536).epsilon(1e-14));
    }
    SUBCASE("odd symmetry for all B, C, D, E when shifts vanish") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            double B = 5.0 + 25.0 * u(rng);
            double C = 0.5 + 1.5 * u(rng);
            double D = 0.1 + 1.8 * u(rng);
            double E = -2.0 * u(rng);
            double a = 0.4 * (2.0 * u(rng) - 1.0);
            CHECK(dynamics::pacejka_lateral(-a, B, C, D, E, 0.0) ==
                  Approx(-dynamics::pacejka_lateral(a, B, C, D, E, 0.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("acceleration") {
    KnownCoefficients k = testutil::test_phi_k();
    SUBCASE("straight steady state is an equilibrium") {
        EstimatedCoefficients c = presets::default_ground_truth();
        // balance the drivetrain: (Cm1 - Cm2 vx^2) T = Cr0 + Cd vx^2 at vx=1
        VehicleState s;
        s.vx = 1.0;
        s.throttle = (c.Cr0 + c.Cd) / (c.Cm1 - c.Cm2);
        auto a = dynamics::acceleration(s, k, c);
        CHECK(a.ax == Approx(0.0).epsilon(1e-12));
        CHECK(a.ay == Approx(0.0).epsilon(1e-12));
        CHECK(a.omega_dot == Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("zero forces leave the rotating-frame terms") {
        EstimatedCoefficients c{};  // all coefficients zero => all forces zero
        c.Iz = 1e-5;
        VehicleState s;
        s.vx = 1.0;
        s.vy = 1.0;
        s.omega = 0.5;
        auto a = dynamics::acceleration(s, k, c);
        CHECK(a.ax == Approx(0.5));
        CHECK(a.ay == Approx(-0.5));
        CHECK(a.omega_dot == Approx(0.0));
    }
    SUBCASE("matches composition of the published sub-models") {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 100; ++i) {
            VehicleState s = random_state(rng);
            EstimatedCoefficients c = random_coeffs(rng);
            auto a = dynamics::acceleration(s, k, c);
            double f_rx = dynamics::drivetrain_force(s.vx, s.throttle, c);
            auto [af, ar] = dynamics::slip_angles(s, k, c.front.Sh, c.rear.Sh);
            double f_fy =
                dynamics::pacejka_lateral(af, c.front.B, c.front.C, c.front.D, c.front.E, c.front.Sv);
            double f_ry =
                dynamics::pacejka_lateral(ar, c.rear.B, c.rear.C, c.rear.D, c.rear.E, c.rear.Sv);
            CHECK(a.ax == Approx((f_rx - f_fy * std::sin(s.steer) + k.mass * s.vy * s.omega) /
                                 k.mass));
            CHECK(a.ay == Approx((f_ry + f_fy * std::cos(s.steer) - k.mass * s.vx * s.omega) /
                                 k.mass));
            CHECK(a.omega_dot ==
                  Approx((f_fy * k.lf * std::cos(s.steer) - f_ry * k.lr) / c.Iz));
        }
    }
}

TEST_CASE("euler step") {
    KnownCoefficients k = testutil::test_phi_k();
    SUBCASE("dt=0 applies only the input deltas") {
        std::mt19937_64 rng(5);
        VehicleState s = random_state(rng);
        auto n = dynamics::step(s, {0.1, -0.05}, 0.0, k, random_coeffs(rng));
        CHECK(n.x == s.x);
        CHECK(n.vx == s.vx);
        CHECK(n.vy == s.vy);
        CHECK(n.omega == s.omega);
        CHECK(n.throttle == Approx(s.throttle + 0.1));
        CHECK(n.steer == Approx(s.steer - 0.05));
    }
    SUBCASE("velocity rows equal state plus acceleration times dt") {
        std::mt19937_64 rng(29);
        for (int i = 0; i < 50; ++i) {
            VehicleState s = random_state(rng);
            EstimatedCoefficients c = random_coeffs(rng);
            double dt = 0.02;
            auto a = dynamics::acceleration(s, k, c);
            auto n = dynamics::step(s, {}, dt, k, c);
            CHECK(n.vx == Approx(s.vx + a.ax * dt).epsilon(1e-14));
            CHECK(n.vy == Approx(s.vy + a.ay * dt).epsilon(1e-14));
            CHECK(n.omega == Approx(s.omega + a.omega_dot * dt).epsilon(1e-14));
            CHECK(n.x == Approx(s.x + (s.vx * std::cos(s.theta) - s.vy * std::sin(s.theta)) * dt));
            CHECK(n.y == Approx(s.y + (s.vx * std::sin(s.theta) + s.vy * std::cos(s.theta)) * dt));
            CHECK(n.theta == Approx(s.theta + s.omega * dt));
        }
    }
    SUBCASE("force-free step conserves speed to first order") {
        EstimatedCoefficients c{};
        c.Iz = 1e-5;
        std::mt19937_64 rng(41);
        for (int i = 0; i < 50; ++i) {
            VehicleState s = random_state(rng);
            double dt = 0.02;
            auto n = dynamics::step(s, {}, dt, k, c);
            double before = s.vx * s.vx + s.vy * s.vy;
            double after = n.vx * n.vx + n.vy * n.vy;
            double bound = s.omega * s.omega * before;  // exact coefficient of dt^2
            CHECK(std::abs(after - before) <= bound * dt * dt + 1e-15);
        }
    }
    SUBCASE("dt -> 0 convergence of the velocity rows is linear") {
        std::mt19937_64 rng(43);
        VehicleState s = random_state(rng);
        EstimatedCoefficients c = random_coeffs(rng);
        double prev = -1.0;
        for (double dt : {1e-2, 1e-3, 1e-4}) {
            auto n = dynamics::step(s, {}, dt, k, c);
            double err = std::abs(n.vx - s.vx) + std::abs(n.vy - s.vy) +
                         std::abs(n.omega - s.omega);
            if (prev > 0.0) {
                CHECK(err < prev * 0.2);   // at least ~linear decay
                CHECK(err > prev * 0.05);  // and not super-linear collapse
            }
            prev = err;
        }
    }
}

TEST_CASE("slip angles are continuous in vx above the guard") {
    KnownCoefficients k{1.0, 0.5, 0.5};
    VehicleState s;
    s.vy = 0.05;
    s.omega = 0.3;
    s.steer = 0.1;
    double prev_af = 0.0;
    bool first = true;
    for (double vx = 0.0501; vx < 0.06; vx += 1e-4) {
        s.vx = vx;
        auto [af, ar] = dynamics::slip_angles(s, k, 0.0, 0.0);
        (void)ar;
        if (!first) CHECK(std::abs(af - prev_af) < 0.5);
        prev_af = af;
        first = false;
    }
}

TEST_CASE("state jacobian") {
    SUBCASE("identity at zero yaw rate") {
        auto J = dynamics::state_jacobian(0.0, 0.02);
        std::array<double, 9> I = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        CHECK(J == I);
    }
    SUBCASE("off-diagonals at omega=2, dt=0.04") {
        auto J = dynamics::state_jacobian(2.0, 0.04);
        CHECK(J[1] == Approx(0.08));
        CHECK(J[3] == Approx(-0.08));
        CHECK(J[0] == 1.0);
        CHECK(J[8] == 1.0);
    }
    SUBCASE("identity plus antisymmetric velocity block") {
        std::mt19937_64 rng(51);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int i = 0; i < 50; ++i) {
            auto J = dynamics::state_jacobian(u(rng), 0.02);
            CHECK(J[1] == -J[3]);
            CHECK(J[0] == 1.0);
            CHECK(J[4] == 1.0);
            CHECK(J[8] == 1.0);
            CHECK(J[2] == 0.0);
            CHECK(J[5] == 0.0);
            CHECK(J[6] == 0.0);
            CHECK(J[7] == 0.0);
        }
    }
}
