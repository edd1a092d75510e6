#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stmid/ad.hpp"
#include "stmid/data.hpp"
#include "stmid/dynamics.hpp"
#include "stmid/errors.hpp"
#include "stmid/types.hpp"

namespace stmid::net {

inline constexpr int kCoefficientHead = static_cast<int>(kNumCoefficients);  // 17
inline constexpr int kEkfHead = kCoefficientHead + 6;                        // + Q/R diagonals

struct NetworkConfig {
    int gru_layers = 0;    // 0 = feedforward over the flattened history
    int hidden_layers = 2; // dense layers between features and head
    int hidden_size = 32;
    int history = 1;       // N
    int head = kCoefficientHead;

    void validate() const {
        if (hidden_layers < 1) throw ConfigError("need at least one hidden layer");
        if (hidden_size < 1) throw ConfigError("hidden size must be >= 1");
        if (history < 1) throw ConfigError("history length must be >= 1");
        if (gru_layers < 0) throw ConfigError("recurrent layer count must be >= 0");
        if (head != kCoefficientHead && head != kEkfHead)
            throw ConfigError("head size must be 17 or 23");
    }

    // Feature width handed to the dense stack, before the time input.
    int dense_features() const {
        return gru_layers > 0 ? hidden_size : history * data::kFeaturesPerRow;
    }
};

// Per-output sigmoid scaling interval for the head.
struct GuardBounds {
    std::vector<double> lower, upper;

    void validate() const {
        if (lower.size() != upper.size() || lower.empty())
            throw ConfigError("guard bounds must be non-empty and of equal length");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i])) throw ConfigError("guard bound lower >= upper");
    }

    static GuardBounds from(const CoefficientBounds& b);
    static GuardBounds from(const CoefficientBounds& b, const std::array<double, 6>& cov_lower,
                            const std::array<double, 6>& cov_upper);
};

struct ParameterBlock {
    std::string name;
    std::vector<double> data;
    bool frozen = false;
};

struct ParameterSet {
    std::vector<ParameterBlock> blocks;

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& b : blocks) n += b.data.size();
        return n;
    }
    int active_count() const {
        int n = 0;
        for (const auto& b : blocks)
            if (!b.frozen) ++n;
        return n;
    }
};

// Shapes of all parameter blocks implied by a config: recurrent blocks first,
// then dense blocks, head last.
struct Layout {
    struct Block {
        std::string name;
        std::size_t size;
        int in, out;
        bool is_gru;
    };
    std::vector<Block> blocks;

    static Layout make(const NetworkConfig& cfg);
};

ParameterSet init_parameters(const NetworkConfig& cfg, std::uint64_t seed);

// Freeze the first n blocks and leave the rest active. At least one
// non-head block must stay active.
void freeze_prefix(ParameterSet& params, int n);

// Sigmoid-scaled head output, strictly inside (lb, ub).
std::vector<double> guard(const std::vector<double>& z, const GuardBounds& bounds);

struct ForwardValues {
    std::vector<double> bounded;          // guard outputs, head-sized
    std::array<double, 3> x_hat_next{};   // vx, vy, omega
    Acceleration beta_hat;
    EstimatedCoefficients coefficients;   // bounded[0..16] as a struct
};

ForwardValues forward(const data::WindowedSample& w, const ParameterSet& params,
                      const NetworkConfig& cfg, const GuardBounds& bounds,
                      const KnownCoefficients& phi_k);

// Exact derivative of the three predicted velocities with respect to the
// prediction time, including the path through the appended time feature.
std::array<double, 3> time_derivative(const data::WindowedSample& w, const ParameterSet& params,
                                      const NetworkConfig& cfg, const GuardBounds& bounds,
                                      const KnownCoefficients& phi_k);

// Mean-squared-error gradients of a single-window supervised loss; frozen
// blocks receive zeros.
std::vector<std::vector<double>> backward(const data::WindowedSample& w,
                                          const ParameterSet& params, const NetworkConfig& cfg,
                                          const GuardBounds& bounds,
                                          const KnownCoefficients& phi_k);

// --- recorded-graph building blocks (used by the trainers) -----------------

template <class S>
struct ForwardOut {
    std::vector<S> bounded;
    std::array<S, 3> x_hat;
    std::array<S, 3> beta;
    S dt;
};

namespace detail {

// Value-domain context: plain doubles, no recording.
struct ValueCtx {
    using S = double;
    const ParameterSet* ps;

    double param(int b, int o) const { return ps->blocks[b].data[o]; }
    double constant(double v) const { return v; }
    double time_input(double v) const { return v; }
};

// Recording context: parameters are tape leaves, the time input optionally
// carries a unit tangent.
struct TapeCtx {
    using S = ad::Dual;
    ad::Tape* tape = nullptr;
    const ParameterSet* ps = nullptr;
    std::vector<int> leaf0;
    bool time_tangent = false;

    TapeCtx(ad::Tape& t, const ParameterSet& p) : tape(&t), ps(&p) {
        leaf0.reserve(p.blocks.size());
        for (const auto& b : p.blocks) {
            leaf0.push_back(static_cast<int>(t.size()));
            for (double v : b.data) t.leaf(v);
        }
    }

    S param(int b, int o) const {
        return S(ad::Var(tape, leaf0[b] + o, ps->blocks[b].data[o]));
    }
    S constant(double v) const { return ad::dual_const(*tape, v); }
    S time_input(double v) const {
        ad::Var re = ad::make_leaf(*tape, v);
        if (!time_tangent) return S(re);
        return S(re, ad::make_const(*tape, 1.0));
    }
};

// y = W [xd ; xs] + b for one block, where xd are raw doubles and xs are
// scalars of the context type. Weight columns cover xd first.
template <class Ctx>
std::vector<typename Ctx::S> affine(const Ctx& ctx, int block, int rows, int w_off, int b_off,
                                    const double* xd, int nd, const typename Ctx::S* xs, int ns) {
    using S = typename Ctx::S;
    const int cols = nd + ns;
    std::vector<S> y;
    y.reserve(rows);
    for (int r = 0; r < rows; ++r) {
        S acc = ctx.param(block, b_off + r);
        const int row_off = w_off + r * cols;
        for (int j = 0; j < nd; ++j) acc = acc + ctx.param(block, row_off + j) * xd[j];
        for (int j = 0; j < ns; ++j) acc = acc + ctx.param(block, row_off + nd + j) * xs[j];
        y.push_back(acc);
    }
    return y;
}

template <class Ctx>
ForwardOut<typename Ctx::S> forward_impl(const Ctx& ctx, const NetworkConfig& cfg,
                                         const GuardBounds& bounds,
                                         const KnownCoefficients& phi_k,
                                         const data::WindowedSample& w) {
    using S = typename Ctx::S;
    using std::tanh;
    using ad::clamp;
    using ad::logistic;
    using ad::tanh;

    cfg.validate();
    if (w.n != cfg.history) throw ConfigError("window history length does not match the network");
    if (static_cast<int>(bounds.lower.size()) != cfg.head)
        throw ConfigError("guard bounds do not match the head size");

    const int H = cfg.hidden_size;
    int block = 0;

    // Recurrent encoder over the history rows.
    std::vector<S> gru_final;
    std::vector<std::vector<S>> seq;  // per-step outputs of the previous layer
    for (int l = 0; l < cfg.gru_layers; ++l, ++block) {
        const int in = l == 0 ? data::kFeaturesPerRow : H;
        const int w_ih = 0;
        const int b_ih = 3 * H * in;
        const int w_hh = b_ih + 3 * H;
        const int b_hh = w_hh + 3 * H * H;

        std::vector<S> h;  // empty = zero state
        std::vector<std::vector<S>> next_seq(cfg.history);
        for (int k = 0; k < cfg.history; ++k) {
            const double* xd = l == 0 ? w.row(k) : nullptr;
            const S* xs = l == 0 ? nullptr : seq[k].data();
            std::vector<S> gi = affine(ctx, block, 3 * H, w_ih, b_ih, xd, l == 0 ? in : 0, xs,
                                       l == 0 ? 0 : in);
            std::vector<S> gh =
                affine(ctx, block, 3 * H, w_hh, b_hh, nullptr, 0, h.empty() ? nullptr : h.data(),
                       h.empty() ? 0 : H);
            std::vector<S> hn;
            hn.reserve(H);
            for (int j = 0; j < H; ++j) {
                S r = logistic(gi[j] + gh[j]);
                S z = logistic(gi[H + j] + gh[H + j]);
                S n = tanh(gi[2 * H + j] + r * gh[2 * H + j]);
                if (h.empty()) hn.push_back((1.0 - z) * n);
                else hn.push_back((1.0 - z) * n + z * h[j]);
            }
            h = hn;
            next_seq[k] = std::move(hn);
        }
        seq = std::move(next_seq);
        gru_final = h;
    }

    ForwardOut<S> out;
    const double dt_value = w.t_next - w.t_now;
    out.dt = ctx.time_input(dt_value);

    // Dense stack input: encoder state (or the flattened history) plus dt.
    std::vector<S> sx;
    const double* xd = nullptr;
    int nd = 0;
    if (cfg.gru_layers > 0) {
        sx = gru_final;
    } else {
        xd = w.history.data();
        nd = cfg.history * data::kFeaturesPerRow;
    }
    sx.push_back(out.dt);

    std::vector<S> act;
    for (int l = 0; l < cfg.hidden_layers; ++l, ++block) {
        const int in = l == 0 ? nd + static_cast<int>(sx.size()) : H;
        const int w_off = 0;
        const int b_off = H * in;
        std::vector<S> z =
            l == 0 ? affine(ctx, block, H, w_off, b_off, xd, nd, sx.data(),
                            static_cast<int>(sx.size()))
                   : affine(ctx, block, H, w_off, b_off, nullptr, 0, act.data(), H);
        act.clear();
        act.reserve(H);
        for (auto& v : z) act.push_back(tanh(v));
    }

    std::vector<S> raw =
        affine(ctx, block, cfg.head, 0, cfg.head * H, nullptr, 0, act.data(), H);

    // Guard layer: sigmoid scaled into (lb, ub), kept strictly open.
    constexpr double kOpenEps = 1e-12;
    out.bounded.reserve(cfg.head);
    for (int i = 0; i < cfg.head; ++i) {
        S s = clamp(logistic(raw[i]), kOpenEps, 1.0 - kOpenEps);
        out.bounded.push_back(s * (bounds.upper[i] - bounds.lower[i]) + bounds.lower[i]);
    }

    // Physics layer: accelerations from the last history row and the
    // coefficient estimate, then one explicit-Euler step.
    const double* last = w.row(cfg.history - 1);
    CoeffsT<S> coeffs = coeffs_from_array<S>({out.bounded[0], out.bounded[1], out.bounded[2],
                                              out.bounded[3], out.bounded[4], out.bounded[5],
                                              out.bounded[6], out.bounded[7], out.bounded[8],
                                              out.bounded[9], out.bounded[10], out.bounded[11],
                                              out.bounded[12], out.bounded[13], out.bounded[14],
                                              out.bounded[15], out.bounded[16]});
    S vx = ctx.constant(last[0]);
    S vy = ctx.constant(last[1]);
    S om = ctx.constant(last[2]);
    S thr = ctx.constant(last[3]);
    S str = ctx.constant(last[4]);
    auto acc = dynamics::acceleration_t<S>(vx, vy, om, thr, str, phi_k, coeffs);
    out.beta = {acc.ax, acc.ay, acc.omega_dot};
    out.x_hat = {vx + acc.ax * out.dt, vy + acc.ay * out.dt, om + acc.omega_dot * out.dt};
    return out;
}

}  // namespace detail

// One recording session: parameters become tape leaves once; any number of
// window forwards build on them before a single backward pass.
class Recording {
  public:
    Recording(ad::Tape& tape, const ParameterSet& params) : ctx_(tape, params) {}

    void set_time_tangent(bool on) { ctx_.time_tangent = on; }

    ForwardOut<ad::Dual> forward(const NetworkConfig& cfg, const GuardBounds& bounds,
                                 const KnownCoefficients& phi_k, const data::WindowedSample& w) {
        return detail::forward_impl(ctx_, cfg, bounds, phi_k, w);
    }

    // Per-block gradients of `loss`; frozen blocks come back zero-filled.
    std::vector<std::vector<double>> gradients(const ad::Var& loss) const {
        ctx_.tape->backward(loss.i, adj_);
        std::vector<std::vector<double>> g(ctx_.ps->blocks.size());
        for (std::size_t b = 0; b < ctx_.ps->blocks.size(); ++b) {
            const auto& blk = ctx_.ps->blocks[b];
            g[b].assign(blk.data.size(), 0.0);
            if (blk.frozen) continue;
            const int base = ctx_.leaf0[b];
            for (std::size_t k = 0; k < blk.data.size(); ++k)
                g[b][k] = adj_[base + static_cast<int>(k)];
        }
        return g;
    }

    ad::Tape& tape() { return *ctx_.tape; }

  private:
    detail::TapeCtx ctx_;
    mutable std::vector<double> adj_;
};

// --- checkpoints ------------------------------------------------------------

struct Checkpoint {
    NetworkConfig config;
    GuardBounds bounds;
    KnownCoefficients phi_k;
    ParameterSet params;
    std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace stmid::net
