#include "stmid/ekf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "stmid/rng.hpp"

namespace stmid::ekf {

UpdateResult ekf_update(const Vec3& x_model_pred, const Vec3& measurement, double omega,
                        double dt, const Mat3& P, const Vec3& q_diag, const Vec3& r_diag) {
    auto u = ekf_update_t<double>(x_model_pred, measurement, omega, dt, P, q_diag, r_diag);
    return {u.x_ekf, u.n_hat, u.P_next, u.K};
}

namespace {

double window_nominal_step(const std::vector<data::WindowedSample>& windows) {
    std::vector<double> dts;
    dts.reserve(windows.size());
    for (const auto& w : windows) dts.push_back(w.t_next - w.t_now);
    auto mid = dts.begin() + dts.size() / 2;
    std::nth_element(dts.begin(), mid, dts.end());
    return *mid;
}

Mat3 scaled_identity(double s) { return {s, 0, 0, 0, s, 0, 0, 0, s}; }

}  // namespace

std::vector<DenoisedRecord> ekf_forward(const std::vector<data::WindowedSample>& windows,
                                        const net::ParameterSet& params,
                                        const net::NetworkConfig& cfg,
                                        const net::GuardBounds& bounds,
                                        const KnownCoefficients& phi_k,
                                        const FilterOptions& opt) {
    if (cfg.head != net::kEkfHead)
        throw ConfigError("filter pass needs a covariance-emitting head");
    if (windows.empty()) return {};

    const double nominal = window_nominal_step(windows);
    Mat3 P = scaled_identity(opt.p0);
    double prev_t = std::numeric_limits<double>::quiet_NaN();

    std::vector<DenoisedRecord> records;
    records.reserve(windows.size());
    for (const auto& w : windows) {
        if (std::isfinite(prev_t) && w.t_next - prev_t > 1.5 * nominal)
            P = scaled_identity(opt.p0);
        prev_t = w.t_next;

        auto fw = net::forward(w, params, cfg, bounds, phi_k);
        Vec3 q = {fw.bounded[17], fw.bounded[18], fw.bounded[19]};
        Vec3 r = {fw.bounded[20], fw.bounded[21], fw.bounded[22]};
        auto u = ekf_update(fw.x_hat_next, w.label, w.label[2], w.t_next - w.t_now, P, q, r);

        DenoisedRecord rec;
        rec.x_ekf = u.x_ekf;
        rec.n_hat = u.n_hat;
        rec.measurement = w.label;
        rec.x_model_pred = fw.x_hat_next;
        rec.t_next = w.t_next;
        rec.label_index = w.label_index;
        records.push_back(rec);
        P = u.P_next;
    }
    return records;
}

double loss_ekf_supervised(const std::vector<DenoisedRecord>& records) {
    if (records.empty()) throw EmptyInput("cannot average a loss over zero records");
    double sum = 0.0;
    for (const auto& r : records)
        for (int c = 0; c < 3; ++c) {
            double e = r.x_ekf[c] - r.measurement[c];
            sum += e * e;
        }
    return sum / (3.0 * records.size());
}

namespace {

struct DenoisePhaseSpec {
    net::ParameterSet params;
    const std::vector<data::WindowedSample>* windows;
    net::NetworkConfig cfg;
    net::GuardBounds bounds;
    KnownCoefficients phi_k;
    DenoiseTrainConfig dc;
    int iterations;
    double lr;
    bool hybrid;
};

train::TrainReport run_denoise_phase(DenoisePhaseSpec spec) {
    const auto& windows = *spec.windows;
    const double nominal = window_nominal_step(windows);

    train::Adam adam(spec.params, spec.lr);
    train::TrainReport report;
    report.l_min = std::numeric_limits<double>::infinity();

    ad::Tape tape;
    tape.reserve(1 << 17);

    auto maybe_validate = [&](int iteration) {
        auto records = ekf_forward(windows, spec.params, spec.cfg, spec.bounds, spec.phi_k,
                                   spec.dc.filter);
        double v = loss_ekf_supervised(records);
        report.val_loss.emplace_back(iteration, v);
        if (v < report.l_min) {
            report.l_min = v;
            report.best_iteration = iteration;
            report.best = {spec.cfg, spec.bounds, spec.phi_k, spec.params, spec.dc.seed};
        }
    };

    std::size_t pos = 0;
    Mat3 P_carry = scaled_identity(spec.dc.filter.p0);
    double prev_t = std::numeric_limits<double>::quiet_NaN();

    for (int it = 1; it <= spec.iterations; ++it) {
        if (pos >= windows.size()) {
            pos = 0;
            P_carry = scaled_identity(spec.dc.filter.p0);
            prev_t = std::numeric_limits<double>::quiet_NaN();
        }
        const std::size_t end = std::min(pos + spec.dc.chunk, windows.size());

        tape.clear();
        net::Recording rec(tape, spec.params);
        rec.set_time_tangent(spec.hybrid);

        // Incoming covariance is a constant for the chunk (truncated
        // backpropagation at chunk boundaries).
        std::array<ad::Dual, 9> P;
        for (int i = 0; i < 9; ++i) P[i] = ad::dual_const(tape, P_carry[i]);

        ad::Var l1_sum = ad::make_const(tape, 0.0);
        ad::Var l2_sum = ad::make_const(tape, 0.0);
        int used = 0;
        for (std::size_t wi = pos; wi < end; ++wi) {
            const auto& w = windows[wi];
            if (std::isfinite(prev_t) && w.t_next - prev_t > 1.5 * nominal) {
                for (int i = 0; i < 9; ++i)
                    P[i] = ad::dual_const(tape, i % 4 == 0 ? spec.dc.filter.p0 : 0.0);
            }
            prev_t = w.t_next;

            auto out = rec.forward(spec.cfg, spec.bounds, spec.phi_k, w);
            std::array<ad::Dual, 3> q = {out.bounded[17], out.bounded[18], out.bounded[19]};
            std::array<ad::Dual, 3> r = {out.bounded[20], out.bounded[21], out.bounded[22]};
            auto u = ekf_update_t<ad::Dual>(out.x_hat, w.label, w.label[2], w.t_next - w.t_now,
                                            P, q, r);
            for (int c = 0; c < 3; ++c)
                l1_sum = l1_sum + ad::sq(u.x_ekf[c].re - w.label[c]);
            if (spec.hybrid) {
                // d/dT of the denoised measurement (X - n_hat); X is constant.
                for (int c = 0; c < 3; ++c) {
                    ad::Var d = u.n_hat[c].has_dot() ? -u.n_hat[c].dot
                                                     : ad::make_const(tape, 0.0);
                    l2_sum = l2_sum + ad::sq(d - out.beta[c].re);
                }
            }
            P = u.P_next;
            ++used;
        }

        for (int i = 0; i < 9; ++i) P_carry[i] = P[i].value();
        pos = end;

        const double denom = 3.0 * used;
        ad::Var l1 = l1_sum / denom;
        ad::Var loss = spec.hybrid
                           ? spec.dc.weights.w1 * l1 + spec.dc.weights.w2 * (l2_sum / denom)
                           : l1;
        if (!std::isfinite(loss.v)) {
            std::ostringstream os;
            os << "non-finite denoiser loss at iteration " << it;
            throw NonFiniteLoss(os.str());
        }
        report.train_loss.push_back(loss.v);

        auto grads = rec.gradients(loss);
        adam.step(spec.params, grads);

        if (it % spec.dc.val_every == 0 || it == spec.iterations) maybe_validate(it);
    }
    return report;
}

}  // namespace

DenoiseTrainResult train_denoiser(const std::vector<data::WindowedSample>& windows,
                                  const net::NetworkConfig& cfg, const net::GuardBounds& bounds,
                                  const KnownCoefficients& phi_k,
                                  const DenoiseTrainConfig& dc) {
    dc.validate();
    cfg.validate();
    if (cfg.head != net::kEkfHead)
        throw ConfigError("denoiser training needs a covariance-emitting head");
    if (windows.empty()) throw EmptyInput("no windows to train the denoiser on");

    DenoisePhaseSpec spec;
    spec.params = net::init_parameters(cfg, dc.seed);
    spec.windows = &windows;
    spec.cfg = cfg;
    spec.bounds = bounds;
    spec.phi_k = phi_k;
    spec.dc = dc;
    spec.iterations = dc.pretrain_iterations;
    spec.lr = dc.learning_rate;
    spec.hybrid = false;

    DenoiseTrainResult result;
    result.pretrain_report = run_denoise_phase(spec);

    if (dc.finetune_iterations > 0) {
        spec.params = result.pretrain_report.best.params;
        const int blocks = static_cast<int>(spec.params.blocks.size());
        int freeze = std::min(static_cast<int>(dc.freeze_fraction * blocks), blocks - 2);
        net::freeze_prefix(spec.params, std::max(freeze, 0));
        spec.iterations = dc.finetune_iterations;
        spec.lr = dc.learning_rate * dc.finetune_lr_scale;
        spec.hybrid = true;
        result.finetune_report = run_denoise_phase(spec);
    }

    const bool fine_wins = dc.finetune_iterations > 0 &&
                           result.finetune_report.l_min <= result.pretrain_report.l_min;
    const auto& winner = fine_wins ? result.finetune_report : result.pretrain_report;
    result.best = winner.best;
    result.l_min = winner.l_min;
    return result;
}

DenoiseOutput denoise_dataset(const std::vector<data::RawSample>& samples,
                              const net::Checkpoint& ck, const FilterOptions& opt) {
    auto windows = data::window(samples, ck.config.history);
    DenoiseOutput out;
    out.records = ekf_forward(windows, ck.params, ck.config, ck.bounds, ck.phi_k, opt);
    out.filtered = samples;
    out.noise.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out.noise[i] = {samples[i].time, 0.0, 0.0, 0.0};
    for (const auto& r : out.records) {
        auto& row = out.filtered[r.label_index];
        row.vx = r.x_ekf[0];
        row.vy = r.x_ekf[1];
        row.omega = r.x_ekf[2];
        out.noise[r.label_index] = {row.time, r.measurement[0] - r.x_ekf[0],
                                    r.measurement[1] - r.x_ekf[1],
                                    r.measurement[2] - r.x_ekf[2]};
    }
    return out;
}

void save_noise_csv(const std::string& path, const std::vector<std::array<double, 4>>& noise) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "time,n_vx,n_vy,n_omega\n";
    char buf[192];
    for (const auto& row : noise) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g", row[0], row[1], row[2],
                      row[3]);
        out << buf << '\n';
    }
}

AdjustResult adjust_ranges(const EstimatedCoefficients& estimate, CoefficientBounds bounds,
                           double epsilon_frac, double expand_factor, int max_rounds) {
    if (!(epsilon_frac > 0.0 && epsilon_frac < 0.5))
        throw ConfigError("epsilon fraction must lie in (0, 0.5)");
    if (!(expand_factor > 0.0)) throw ConfigError("expand factor must be positive");

    AdjustResult result;
    auto est = coeffs_to_array(estimate);
    for (int round = 1; round <= max_rounds; ++round) {
        auto lo = bounds.lower_array();
        auto hi = bounds.upper_array();
        bool moved = false;
        for (std::size_t i = 0; i < kNumCoefficients; ++i) {
            const double width = hi[i] - lo[i];
            if (est[i] <= lo[i] + epsilon_frac * width) {
                double nb = lo[i] - expand_factor * width;
                result.log.push_back({round, std::string(kCoefficientNames[i]), "lower", lo[i],
                                      nb});
                lo[i] = nb;
                moved = true;
            } else if (est[i] >= hi[i] - epsilon_frac * width) {
                double nb = hi[i] + expand_factor * width;
                result.log.push_back({round, std::string(kCoefficientNames[i]), "upper", hi[i],
                                      nb});
                hi[i] = nb;
                moved = true;
            }
        }
        bounds.lower = coeffs_from_array(lo);
        bounds.upper = coeffs_from_array(hi);
        if (!moved) break;
    }
    result.bounds = bounds;
    return result;
}

}  // namespace stmid::ekf
