#include "stmid/presets.hpp"

#include "stmid/errors.hpp"

namespace stmid::presets {

namespace {

AxleCoeffsT<double> axle(double B, double C, double D, double E, double Sh, double Sv) {
    return {B, C, D, E, Sh, Sv};
}

}  // namespace

CoefficientBounds sim_bounds() {
    CoefficientBounds b;
    b.lower.front = axle(5.0, 0.5, 0.1, -2.0, -0.02, -0.003);
    b.lower.rear = b.lower.front;
    b.lower.Cm1 = 0.1435;
    b.lower.Cm2 = 0.0273;
    b.lower.Cr0 = 0.0259;
    b.lower.Cd = 1.75e-4;
    b.lower.Iz = 1.39e-5;

    b.upper.front = axle(30.0, 2.0, 1.9, 0.0, 0.02, 0.003);
    b.upper.rear = b.upper.front;
    b.upper.Cm1 = 0.574;
    b.upper.Cm2 = 0.109;
    b.upper.Cr0 = 0.1036;
    b.upper.Cd = 0.1036;
    b.upper.Iz = 5.56e-5;
    b.validate();
    return b;
}

CoefficientBounds real_bounds() {
    CoefficientBounds b;
    b.lower.front = axle(5.0, 0.5, 100.0, -2.0, -0.02, -300.0);
    b.lower.rear = b.lower.front;
    b.lower.Cm1 = 500.0;
    b.lower.Cm2 = 0.0;
    b.lower.Cr0 = 0.1;
    b.lower.Cd = 0.1;
    // The published inertia interval is inverted; 5e2 restores lower < upper
    // while keeping the order of magnitude of the adjusted interval below.
    b.lower.Iz = 5e2;

    b.upper.front = axle(30.0, 2.0, 1e4, 0.0, 0.02, 300.0);
    b.upper.rear = b.upper.front;
    b.upper.Cm1 = 2e3;
    b.upper.Cm2 = 1.0;
    b.upper.Cr0 = 1.4;
    b.upper.Cd = 1.4;
    b.upper.Iz = 2e3;
    b.validate();
    return b;
}

CoefficientBounds real_adjusted_bounds() {
    CoefficientBounds b;
    b.lower.front = axle(1.0, 0.1, 10.0, -2.0, -0.02, -2e3);
    b.lower.rear = axle(1.0, 0.1, 10.0, -2.0, -0.02, -2e3);
    b.lower.Cm1 = 100.0;
    b.lower.Cm2 = 0.0;
    b.lower.Cr0 = 0.1;
    b.lower.Cd = 0.1;
    b.lower.Iz = 5e3;

    b.upper.front = axle(20.0, 1.5, 8e3, 5.0, 0.2, 300.0);
    b.upper.rear = axle(20.0, 1.5, 8e3, 10.0, 0.2, 300.0);
    b.upper.Cm1 = 1e4;
    b.upper.Cm2 = 5.0;
    b.upper.Cr0 = 1.4;
    b.upper.Cd = 1.4;
    b.upper.Iz = 2e4;
    b.validate();
    return b;
}

CoefficientBounds bounds_preset(const std::string& name) {
    if (name == "sim") return sim_bounds();
    if (name == "real") return real_bounds();
    if (name == "real_adjusted") return real_adjusted_bounds();
    throw ConfigError("unknown bounds preset '" + name + "'");
}

EstimatedCoefficients default_ground_truth() {
    CoefficientBounds b = sim_bounds();
    EstimatedCoefficients gt = b.midpoint();
    gt.front.B = 12.0;
    gt.rear.B = 12.0;
    // Peak force low enough that the yaw row stays numerically stable under
    // explicit Euler at the 50 Hz sample step (B*C*D*(lf^2+lr^2)/(Iz*vx)
    // must stay within the stability disc).
    gt.front.D = 0.15;
    gt.rear.D = 0.15;
    return gt;
}

KnownCoefficients default_known_coefficients() {
    return {0.041, 0.029, 0.033};
}

CovBoundsPreset cov_bounds_real() {
    return {{0.1, 0.1, 0.1, 0.01, 0.01, 1e-4}, {1.0, 1.0, 1.0, 1.0, 1.0, 0.01}};
}

CovBoundsPreset cov_bounds_sim_noise() {
    // Scaled to velocity noise with sigma around (0.05, 0.02, 0.01):
    // measurement variances bracket sigma^2, process variances sit well below.
    return {{1e-5, 1e-5, 1e-6, 5e-4, 1e-4, 2e-5}, {1e-3, 1e-3, 1e-4, 2.5e-2, 4e-3, 1e-3}};
}

}  // namespace stmid::presets
