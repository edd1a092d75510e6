#include "stmid/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "stmid/dynamics.hpp"
#include "stmid/rng.hpp"

namespace stmid::data {

namespace {

const char* kBaseHeader = "time,vx,vy,omega,throttle,steer,d_throttle,d_steer";
const char* kPoseHeader = "time,vx,vy,omega,throttle,steer,d_throttle,d_steer,x,y,theta";

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
}

double parse_field(const std::string& s, std::size_t line_no, const char* name) {
    double v = 0.0;
    auto first = s.data();
    auto last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw SchemaError("line " + std::to_string(line_no) + ": field '" + name +
                          "' is not a number: '" + s + "'");
    if (!std::isfinite(v))
        throw SchemaError("line " + std::to_string(line_no) + ": field '" + name +
                          "' is not finite");
    return v;
}

}  // namespace

LoadResult load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact(path);

    std::string header;
    if (!std::getline(in, header)) throw SchemaError(path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    bool has_pose;
    if (header == kPoseHeader) has_pose = true;
    else if (header == kBaseHeader) has_pose = false;
    else throw SchemaError(path + ": unexpected header '" + header + "'");

    const std::size_t ncols = has_pose ? 11 : 8;
    static const char* names[] = {"time", "vx", "vy", "omega", "throttle", "steer",
                                  "d_throttle", "d_steer", "x", "y", "theta"};

    LoadResult result;
    std::string line;
    std::size_t line_no = 1;
    double prev_time = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != ncols)
            throw SchemaError(path + ": line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(ncols));
        double v[11] = {};
        for (std::size_t i = 0; i < ncols; ++i) v[i] = parse_field(fields[i], line_no, names[i]);

        if (!(v[0] > prev_time))
            throw MonotonicityError(path + ": time is not strictly increasing at line " +
                                    std::to_string(line_no));
        prev_time = v[0];

        if (v[1] <= dynamics::kVEps) {
            ++result.dropped_low_speed;
            continue;
        }

        RawSample s;
        s.time = v[0];
        s.vx = v[1];
        s.vy = v[2];
        s.omega = v[3];
        s.throttle = v[4];
        s.steer = v[5];
        s.d_throttle = v[6];
        s.d_steer = v[7];
        s.has_pose = has_pose;
        if (has_pose) {
            s.x = v[8];
            s.y = v[9];
            s.theta = v[10];
        }
        result.samples.push_back(s);
    }
    return result;
}

void save_csv(const std::string& path, const std::vector<RawSample>& samples) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    const bool pose = !samples.empty() && samples.front().has_pose;
    out << (pose ? kPoseHeader : kBaseHeader) << '\n';
    char buf[512];
    for (const auto& s : samples) {
        if (pose) {
            std::snprintf(buf, sizeof(buf),
                          "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                          s.time, s.vx, s.vy, s.omega, s.throttle, s.steer, s.d_throttle,
                          s.d_steer, s.x, s.y, s.theta);
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                          s.time, s.vx, s.vy, s.omega, s.throttle, s.steer, s.d_throttle,
                          s.d_steer);
        }
        out << buf << '\n';
    }
}

double nominal_dt(const std::vector<RawSample>& samples) {
    if (samples.size() < 2) throw InsufficientData("need at least two samples for a dt estimate");
    std::vector<double> diffs(samples.size() - 1);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        diffs[i] = samples[i + 1].time - samples[i].time;
    auto mid = diffs.begin() + diffs.size() / 2;
    std::nth_element(diffs.begin(), mid, diffs.end());
    return *mid;
}

std::vector<WindowedSample> window(const std::vector<RawSample>& samples, int n) {
    if (n < 1) throw ConfigError("window length must be >= 1");
    if (samples.size() < static_cast<std::size_t>(n) + 1)
        throw InsufficientData("need at least N+1 samples to build a window");

    const double dt_nom = nominal_dt(samples);
    const double max_gap = 1.5 * dt_nom;

    std::vector<WindowedSample> out;
    out.reserve(samples.size() - n);
    for (std::size_t i = 0; i + n < samples.size(); ++i) {
        bool contiguous = true;
        for (std::size_t k = i; k < i + n; ++k) {
            if (samples[k + 1].time - samples[k].time > max_gap) {
                contiguous = false;
                break;
            }
        }
        if (!contiguous) continue;

        WindowedSample w;
        w.n = n;
        w.history.resize(static_cast<std::size_t>(n) * kFeaturesPerRow);
        for (int k = 0; k < n; ++k) {
            const RawSample& s = samples[i + k];
            double* r = w.history.data() + static_cast<std::size_t>(k) * kFeaturesPerRow;
            r[0] = s.vx;
            r[1] = s.vy;
            r[2] = s.omega;
            r[3] = s.throttle;
            r[4] = s.steer;
            r[5] = s.d_throttle;
            r[6] = s.d_steer;
        }
        const RawSample& next = samples[i + n];
        w.label = {next.vx, next.vy, next.omega};
        w.t_now = samples[i + n - 1].time;
        w.t_next = next.time;
        w.label_index = i + n;
        out.push_back(std::move(w));
    }
    return out;
}

Split split(const std::vector<WindowedSample>& windows, const SplitSpec& spec) {
    spec.validate();
    const std::size_t total = windows.size();
    const std::size_t take =
        std::min(total, static_cast<std::size_t>(std::ceil(spec.train_ratio * total)));

    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = substream(spec.seed, "split");
    // Partial Fisher-Yates: the first `take` entries are a uniform draw
    // without replacement.
    for (std::size_t i = 0; i < take && total > 0; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, total - 1);
        std::swap(idx[i], idx[d(rng)]);
    }

    Split result;
    result.train.reserve(take);
    for (std::size_t i = 0; i < take; ++i) result.train.push_back(windows[idx[i]]);
    result.validation = windows;
    return result;
}

}  // namespace stmid::data
