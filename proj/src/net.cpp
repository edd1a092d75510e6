#include "stmid/net.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "stmid/rng.hpp"

namespace stmid::net {

using json = nlohmann::ordered_json;

GuardBounds GuardBounds::from(const CoefficientBounds& b) {
    b.validate();
    GuardBounds g;
    auto lo = b.lower_array();
    auto hi = b.upper_array();
    g.lower.assign(lo.begin(), lo.end());
    g.upper.assign(hi.begin(), hi.end());
    return g;
}

GuardBounds GuardBounds::from(const CoefficientBounds& b, const std::array<double, 6>& cov_lower,
                              const std::array<double, 6>& cov_upper) {
    GuardBounds g = from(b);
    for (int i = 0; i < 6; ++i) {
        if (!(cov_lower[i] > 0.0 && cov_lower[i] < cov_upper[i]))
            throw ConfigError("covariance bounds must satisfy 0 < lower < upper");
        g.lower.push_back(cov_lower[i]);
        g.upper.push_back(cov_upper[i]);
    }
    return g;
}

Layout Layout::make(const NetworkConfig& cfg) {
    cfg.validate();
    Layout lay;
    const int H = cfg.hidden_size;
    for (int l = 0; l < cfg.gru_layers; ++l) {
        const int in = l == 0 ? data::kFeaturesPerRow : H;
        lay.blocks.push_back({"gru" + std::to_string(l),
                              static_cast<std::size_t>(3 * H * in + 3 * H + 3 * H * H + 3 * H),
                              in, H, true});
    }
    for (int l = 0; l < cfg.hidden_layers; ++l) {
        const int in = l == 0 ? cfg.dense_features() + 1 : H;
        lay.blocks.push_back({"dense" + std::to_string(l),
                              static_cast<std::size_t>(H * in + H), in, H, false});
    }
    lay.blocks.push_back({"head", static_cast<std::size_t>(cfg.head * H + cfg.head), H,
                          cfg.head, false});
    return lay;
}

ParameterSet init_parameters(const NetworkConfig& cfg, std::uint64_t seed) {
    Layout lay = Layout::make(cfg);
    auto rng = substream(seed, "init");
    ParameterSet ps;
    ps.blocks.reserve(lay.blocks.size());
    for (const auto& b : lay.blocks) {
        int fan_in = b.in;
        int fan_out = b.out;
        if (b.is_gru) fan_in = b.in + b.out;  // input and recurrent paths
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-a, a);
        ParameterBlock blk;
        blk.name = b.name;
        blk.data.resize(b.size);
        for (auto& v : blk.data) v = u(rng);
        ps.blocks.push_back(std::move(blk));
    }
    return ps;
}

void freeze_prefix(ParameterSet& params, int n) {
    const int total = static_cast<int>(params.blocks.size());
    if (n < 0) throw ConfigError("freeze count must be >= 0");
    if (n > total - 2)
        throw FreezeTooDeep("freezing " + std::to_string(n) + " of " + std::to_string(total) +
                            " blocks would leave no active hidden layer");
    for (int i = 0; i < total; ++i) params.blocks[i].frozen = i < n;
}

std::vector<double> guard(const std::vector<double>& z, const GuardBounds& bounds) {
    bounds.validate();
    if (z.size() != bounds.lower.size()) throw ConfigError("guard input size mismatch");
    constexpr double kOpenEps = 1e-12;
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        double s = ad::clamp(ad::stable_logistic(z[i]), kOpenEps, 1.0 - kOpenEps);
        out[i] = s * (bounds.upper[i] - bounds.lower[i]) + bounds.lower[i];
    }
    return out;
}

ForwardValues forward(const data::WindowedSample& w, const ParameterSet& params,
                      const NetworkConfig& cfg, const GuardBounds& bounds,
                      const KnownCoefficients& phi_k) {
    detail::ValueCtx ctx{&params};
    auto out = detail::forward_impl(ctx, cfg, bounds, phi_k, w);
    ForwardValues r;
    r.bounded = out.bounded;
    r.x_hat_next = out.x_hat;
    r.beta_hat = {out.beta[0], out.beta[1], out.beta[2]};
    std::array<double, kNumCoefficients> arr;
    for (std::size_t i = 0; i < kNumCoefficients; ++i) arr[i] = out.bounded[i];
    r.coefficients = coeffs_from_array(arr);
    return r;
}

std::array<double, 3> time_derivative(const data::WindowedSample& w, const ParameterSet& params,
                                      const NetworkConfig& cfg, const GuardBounds& bounds,
                                      const KnownCoefficients& phi_k) {
    ad::Tape tape;
    Recording rec(tape, params);
    rec.set_time_tangent(true);
    auto out = rec.forward(cfg, bounds, phi_k, w);
    return {out.x_hat[0].tangent(), out.x_hat[1].tangent(), out.x_hat[2].tangent()};
}

std::vector<std::vector<double>> backward(const data::WindowedSample& w,
                                          const ParameterSet& params, const NetworkConfig& cfg,
                                          const GuardBounds& bounds,
                                          const KnownCoefficients& phi_k) {
    ad::Tape tape;
    Recording rec(tape, params);
    auto out = rec.forward(cfg, bounds, phi_k, w);
    ad::Var loss = (ad::sq(out.x_hat[0].re - w.label[0]) + ad::sq(out.x_hat[1].re - w.label[1]) +
                    ad::sq(out.x_hat[2].re - w.label[2])) /
                   3.0;
    return rec.gradients(loss);
}

// --- checkpoint io ----------------------------------------------------------

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    json j;
    j["format"] = "stmid-checkpoint";
    j["version"] = 1;
    j["seed"] = ck.seed;
    j["config"] = {{"gru_layers", ck.config.gru_layers},
                   {"hidden_layers", ck.config.hidden_layers},
                   {"hidden_size", ck.config.hidden_size},
                   {"history", ck.config.history},
                   {"head", ck.config.head}};
    j["phi_k"] = {{"mass", ck.phi_k.mass}, {"lf", ck.phi_k.lf}, {"lr", ck.phi_k.lr}};
    j["bounds"] = {{"lower", ck.bounds.lower}, {"upper", ck.bounds.upper}};
    json blocks = json::array();
    for (const auto& b : ck.params.blocks)
        blocks.push_back({{"name", b.name}, {"frozen", b.frozen}, {"data", b.data}});
    j["blocks"] = std::move(blocks);

    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    if (j.value("format", "") != "stmid-checkpoint")
        throw SchemaError(path + ": not a checkpoint file");

    Checkpoint ck;
    ck.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    ck.config.gru_layers = c.at("gru_layers").get<int>();
    ck.config.hidden_layers = c.at("hidden_layers").get<int>();
    ck.config.hidden_size = c.at("hidden_size").get<int>();
    ck.config.history = c.at("history").get<int>();
    ck.config.head = c.at("head").get<int>();
    const auto& k = j.at("phi_k");
    ck.phi_k = {k.at("mass").get<double>(), k.at("lf").get<double>(), k.at("lr").get<double>()};
    ck.bounds.lower = j.at("bounds").at("lower").get<std::vector<double>>();
    ck.bounds.upper = j.at("bounds").at("upper").get<std::vector<double>>();

    Layout lay = Layout::make(ck.config);
    const auto& blocks = j.at("blocks");
    if (blocks.size() != lay.blocks.size())
        throw SchemaError(path + ": block count does not match the stored config");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        ParameterBlock b;
        b.name = blocks[i].at("name").get<std::string>();
        b.frozen = blocks[i].at("frozen").get<bool>();
        b.data = blocks[i].at("data").get<std::vector<double>>();
        if (b.data.size() != lay.blocks[i].size)
            throw SchemaError(path + ": block '" + b.name + "' has wrong size");
        ck.params.blocks.push_back(std::move(b));
    }
    ck.bounds.validate();
    ck.phi_k.validate();
    return ck;
}

}  // namespace stmid::net
