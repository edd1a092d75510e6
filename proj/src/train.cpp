#include "stmid/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "stmid/rng.hpp"

namespace stmid::train {

double loss_supervised(const std::vector<std::array<double, 3>>& predictions,
                       const std::vector<std::array<double, 3>>& labels) {
    if (predictions.size() != labels.size()) throw ConfigError("prediction/label size mismatch");
    if (predictions.empty()) throw EmptyInput("cannot average a loss over zero windows");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            double e = predictions[i][c] - labels[i][c];
            sum += e * e;
        }
    return sum / (3.0 * predictions.size());
}

double loss_unsupervised(const std::vector<std::array<double, 3>>& time_derivatives,
                         const std::vector<std::array<double, 3>>& beta_hats) {
    return loss_supervised(time_derivatives, beta_hats);
}

double loss_total(double l1, double l2, const LossWeights& w) {
    w.validate();
    return w.w1 * l1 + w.w2 * l2;
}

Adam::Adam(const net::ParameterSet& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.resize(params.blocks.size());
    v_.resize(params.blocks.size());
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        m_[b].assign(params.blocks[b].data.size(), 0.0);
        v_[b].assign(params.blocks[b].data.size(), 0.0);
    }
}

void Adam::step(net::ParameterSet& params, const std::vector<std::vector<double>>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        auto& blk = params.blocks[b];
        if (blk.frozen) continue;
        auto& m = m_[b];
        auto& v = v_[b];
        const auto& g = grads[b];
        for (std::size_t i = 0; i < blk.data.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            blk.data[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

std::vector<std::array<double, 3>> predict(const std::vector<data::WindowedSample>& windows,
                                           const net::ParameterSet& params,
                                           const net::NetworkConfig& cfg,
                                           const net::GuardBounds& bounds,
                                           const KnownCoefficients& phi_k) {
    std::vector<std::array<double, 3>> out;
    out.reserve(windows.size());
    for (const auto& w : windows)
        out.push_back(net::forward(w, params, cfg, bounds, phi_k).x_hat_next);
    return out;
}

double validation_loss(const std::vector<data::WindowedSample>& windows,
                       const net::ParameterSet& params, const net::NetworkConfig& cfg,
                       const net::GuardBounds& bounds, const KnownCoefficients& phi_k) {
    std::vector<std::array<double, 3>> labels;
    labels.reserve(windows.size());
    for (const auto& w : windows) labels.push_back(w.label);
    return loss_supervised(predict(windows, params, cfg, bounds, phi_k), labels);
}

namespace {

struct RunSpec {
    net::ParameterSet params;
    net::NetworkConfig cfg;
    net::GuardBounds bounds;
    KnownCoefficients phi_k;
    const std::vector<data::WindowedSample>* train = nullptr;
    const std::vector<data::WindowedSample>* validation = nullptr;
    TrainRunConfig rc;
    bool hybrid = false;  // add the time-derivative consistency term
};

TrainReport run_phase(RunSpec spec) {
    spec.rc.validate();
    spec.cfg.validate();
    if (spec.train->empty()) throw EmptyInput("training split is empty");
    if (spec.validation->empty()) throw EmptyInput("validation set is empty");

    auto batch_rng = substream(spec.rc.seed, "batch");
    std::uniform_int_distribution<std::size_t> pick(0, spec.train->size() - 1);

    Adam adam(spec.params, spec.rc.learning_rate);
    TrainReport report;
    report.train_loss.reserve(spec.rc.iterations);
    report.l_min = std::numeric_limits<double>::infinity();

    ad::Tape tape;
    // Rough per-iteration tape budget; grows on demand.
    tape.reserve(1 << 16);

    auto maybe_validate = [&](int iteration) {
        double v = validation_loss(*spec.validation, spec.params, spec.cfg, spec.bounds,
                                   spec.phi_k);
        report.val_loss.emplace_back(iteration, v);
        if (v < report.l_min) {
            report.l_min = v;
            report.best_iteration = iteration;
            report.best.config = spec.cfg;
            report.best.bounds = spec.bounds;
            report.best.phi_k = spec.phi_k;
            report.best.params = spec.params;
            report.best.seed = spec.rc.seed;
        }
    };

    for (int it = 1; it <= spec.rc.iterations; ++it) {
        tape.clear();
        net::Recording rec(tape, spec.params);
        rec.set_time_tangent(spec.hybrid);

        ad::Var l1_sum = ad::make_const(tape, 0.0);
        ad::Var l2_sum = ad::make_const(tape, 0.0);
        for (int k = 0; k < spec.rc.batch_size; ++k) {
            const auto& w = (*spec.train)[pick(batch_rng)];
            auto out = rec.forward(spec.cfg, spec.bounds, spec.phi_k, w);
            for (int c = 0; c < 3; ++c)
                l1_sum = l1_sum + ad::sq(out.x_hat[c].re - w.label[c]);
            if (spec.hybrid) {
                for (int c = 0; c < 3; ++c) {
                    ad::Var d = out.x_hat[c].has_dot() ? out.x_hat[c].dot
                                                       : ad::make_const(tape, 0.0);
                    l2_sum = l2_sum + ad::sq(d - out.beta[c].re);
                }
            }
        }
        const double denom = 3.0 * spec.rc.batch_size;
        ad::Var l1 = l1_sum / denom;
        ad::Var loss = spec.hybrid
                           ? spec.rc.weights.w1 * l1 + spec.rc.weights.w2 * (l2_sum / denom)
                           : l1;

        if (!std::isfinite(loss.v)) {
            std::ostringstream os;
            os << "non-finite training loss at iteration " << it << " (l1=" << l1.v
               << ", loss=" << loss.v << ", lr=" << spec.rc.learning_rate << ")";
            throw NonFiniteLoss(os.str());
        }
        report.train_loss.push_back(loss.v);

        auto grads = rec.gradients(loss);
        adam.step(spec.params, grads);

        if (it % spec.rc.val_every == 0 || it == spec.rc.iterations) maybe_validate(it);
    }
    return report;
}

}  // namespace

TrainReport pretrain(const TrainRunConfig& rc, const data::Split& split,
                     const net::NetworkConfig& cfg, const net::GuardBounds& bounds,
                     const KnownCoefficients& phi_k,
                     const std::optional<net::ParameterSet>& warm_start) {
    RunSpec spec;
    spec.params = warm_start ? *warm_start : net::init_parameters(cfg, rc.seed);
    for (auto& b : spec.params.blocks) b.frozen = false;  // pretraining updates every block
    spec.cfg = cfg;
    spec.bounds = bounds;
    spec.phi_k = phi_k;
    spec.train = &split.train;
    spec.validation = &split.validation;
    spec.rc = rc;
    spec.hybrid = false;
    return run_phase(std::move(spec));
}

TrainReport finetune(const net::Checkpoint& start, const TrainRunConfig& rc,
                     const data::Split& split) {
    RunSpec spec;
    spec.params = start.params;
    net::freeze_prefix(spec.params, rc.freeze_count);
    spec.cfg = start.config;
    spec.bounds = start.bounds;
    spec.phi_k = start.phi_k;
    spec.train = &split.train;
    spec.validation = &split.validation;
    spec.rc = rc;
    spec.hybrid = true;
    return run_phase(std::move(spec));
}

void write_curve_csv(const std::string& path, const TrainReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "iteration,train_loss,val_loss\n";
    std::size_t vi = 0;
    char buf[128];
    for (std::size_t i = 0; i < report.train_loss.size(); ++i) {
        const int iteration = static_cast<int>(i) + 1;
        out << iteration << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", report.train_loss[i]);
        out << buf << ',';
        if (vi < report.val_loss.size() && report.val_loss[vi].first == iteration) {
            std::snprintf(buf, sizeof(buf), "%.17g", report.val_loss[vi].second);
            out << buf;
            ++vi;
        }
        out << '\n';
    }
}

SearchReport random_search(const SearchSpace& space, int trials, std::uint64_t seed,
                           const SearchPipeline& pipe,
                           const std::vector<data::RawSample>& samples,
                           const net::GuardBounds& bounds, const KnownCoefficients& phi_k) {
    if (trials < 1) throw ConfigError("need at least one search trial");

    auto rng = substream(seed, "search");
    auto draw_int = [&](const std::array<int, 2>& r) {
        return std::uniform_int_distribution<int>(r[0], r[1])(rng);
    };
    auto draw_log10 = [&](const std::array<double, 2>& r) {
        return std::pow(10.0, std::uniform_real_distribution<double>(r[0], r[1])(rng));
    };

    // Draw every configuration up front so failures do not shift later draws.
    std::vector<TrialResult> configs(trials);
    for (int t = 0; t < trials; ++t) {
        TrialResult& tr = configs[t];
        tr.index = t;
        tr.config.hidden_layers = draw_int(space.hidden_layers);
        tr.config.gru_layers = draw_int(space.gru_layers);
        tr.config.hidden_size = draw_int(space.hidden_size);
        tr.config.history = draw_int(space.history);
        tr.config.head = net::kCoefficientHead;
        tr.batch_size = draw_int(space.batch);
        tr.learning_rate = draw_log10(space.lr_log10);
    }

    SearchReport report;
    report.trials.reserve(trials);
    double best_l = std::numeric_limits<double>::infinity();

    for (auto& tr : configs) {
        try {
            auto windows = data::window(samples, tr.config.history);
            data::Split split =
                data::split(windows, {pipe.train_ratio, pipe.split_seed});

            TrainRunConfig pre;
            pre.phase = Phase::pretrain;
            pre.iterations = pipe.pretrain_iterations;
            pre.batch_size = tr.batch_size;
            pre.learning_rate = tr.learning_rate;
            pre.seed = substream_seed(seed, "trial") + static_cast<std::uint64_t>(tr.index);
            pre.val_every = pipe.val_every;
            TrainReport pre_report = pretrain(pre, split, tr.config, bounds, phi_k);

            const int blocks = static_cast<int>(pre_report.best.params.blocks.size());
            int freeze = std::min(static_cast<int>(pipe.freeze_fraction * blocks), blocks - 2);
            freeze = std::max(freeze, 0);

            TrainRunConfig fine = pre;
            fine.phase = Phase::finetune;
            fine.iterations = pipe.finetune_iterations;
            fine.learning_rate = tr.learning_rate * pipe.finetune_lr_scale;
            fine.weights = pipe.weights;
            fine.freeze_count = freeze;
            TrainReport fine_report = finetune(pre_report.best, fine, split);

            tr.l_min = std::min(pre_report.l_min, fine_report.l_min);
            if (tr.l_min < best_l) {
                best_l = tr.l_min;
                report.best_index = tr.index;
                report.best = fine_report.l_min <= pre_report.l_min ? fine_report.best
                                                                    : pre_report.best;
            }
        } catch (const Error& e) {
            tr.failed = true;
            tr.error = e.what();
        }
        report.trials.push_back(tr);
    }
    return report;
}

}  // namespace stmid::train
