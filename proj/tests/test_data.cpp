#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "stmid/data.hpp"
#include "stmid/presets.hpp"
#include "stmid/sim.hpp"

using namespace stmid;
using doctest::Approx;

namespace {

std::filesystem::path tmp_file(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "stmid_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<data::RawSample> simulated_rows() {
    sim::SimRun run;
    run.ground_truth = presets::default_ground_truth();
    run.phi_k = presets::default_known_coefficients();
    run.seed = 11;
    return sim::generate_dataset(run, sim::default_track());
}

}  // namespace

TEST_CASE("csv round trip") {
    auto rows = simulated_rows();
    auto path = tmp_file("roundtrip.csv");
    data::save_csv(path.string(), rows);
    auto loaded = data::load_csv(path.string());

    // The writer emits full precision; surviving rows reload bit-exactly.
    std::size_t kept = rows.size() - loaded.dropped_low_speed;
    REQUIRE(loaded.samples.size() == kept);
    CHECK(loaded.dropped_low_speed > 0);  // standing-start rows
    std::size_t j = 0;
    for (const auto& r : rows) {
        if (r.vx <= dynamics::kVEps) continue;
        CHECK(loaded.samples[j].time == r.time);
        CHECK(loaded.samples[j].vx == r.vx);
        CHECK(loaded.samples[j].vy == r.vy);
        CHECK(loaded.samples[j].omega == r.omega);
        CHECK(loaded.samples[j].theta == r.theta);
        ++j;
    }
}

TEST_CASE("csv validation") {
    SUBCASE("non-monotone time") {
        auto path = tmp_file("shuffled.csv");
        std::ofstream out(path);
        out << "time,vx,vy,omega,throttle,steer,d_throttle,d_steer\n";
        out << "0.02,1,0,0,0.5,0,0,0\n";
        out << "0.0,1,0,0,0.5,0,0,0\n";
        out.close();
        CHECK_THROWS_AS(data::load_csv(path.string()), MonotonicityError);
    }
    SUBCASE("missing column") {
        auto path = tmp_file("badheader.csv");
        std::ofstream out(path);
        out << "time,vx,vy,omega,throttle,steer,d_throttle\n0,1,0,0,0,0,0\n";
        out.close();
        CHECK_THROWS_AS(data::load_csv(path.string()), SchemaError);
    }
    SUBCASE("non-numeric field") {
        auto path = tmp_file("badfield.csv");
        std::ofstream out(path);
        out << "time,vx,vy,omega,throttle,steer,d_throttle,d_steer\n0,oops,0,0,0,0,0,0\n";
        out.close();
        CHECK_THROWS_AS(data::load_csv(path.string()), SchemaError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(data::load_csv("/nonexistent/nope.csv"), MissingArtifact);
    }
    SUBCASE("50 Hz file keeps its sampling interval") {
        auto rows = simulated_rows();
        auto path = tmp_file("rate.csv");
        data::save_csv(path.string(), rows);
        auto loaded = data::load_csv(path.string());
        CHECK(data::nominal_dt(loaded.samples) == Approx(0.02).epsilon(1e-12));
    }
}

TEST_CASE("windowing") {
    std::vector<data::RawSample> rows(1000);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].time = 0.02 * static_cast<double>(i);
        rows[i].vx = 1.0 + 0.001 * i;
        rows[i].vy = 0.01 * i;
        rows[i].omega = -0.002 * i;
        rows[i].throttle = 0.5;
    }

    SUBCASE("window counts") {
        CHECK(data::window(rows, 1).size() == 999);
        CHECK(data::window(rows, 9).size() == 991);
    }
    SUBCASE("labels and history rows line up with the raw samples") {
        auto ws = data::window(rows, 4);
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const auto& w = ws[i];
            CHECK(w.label[0] == rows[i + 4].vx);
            CHECK(w.label[1] == rows[i + 4].vy);
            CHECK(w.label[2] == rows[i + 4].omega);
            CHECK(w.t_next == rows[i + 4].time);
            CHECK(w.t_now == rows[i + 3].time);
            CHECK(w.label_index == i + 4);
            // last history row reproduces raw sample i+N-1 exactly
            const double* last = w.row(3);
            CHECK(last[0] == rows[i + 3].vx);
            CHECK(last[1] == rows[i + 3].vy);
            CHECK(last[2] == rows[i + 3].omega);
            CHECK(last[3] == rows[i + 3].throttle);
            CHECK(w.t_next - w.t_now == Approx(0.02).epsilon(1e-9));
        }
    }
    SUBCASE("windows never span a time gap") {
        auto gappy = rows;
        for (std::size_t i = 500; i < gappy.size(); ++i) gappy[i].time += 1.0;
        auto ws = data::window(gappy, 4);
        // the four windows whose history or label spans rows 499->500 disappear
        CHECK(ws.size() == (1000 - 4) - 4);
        for (const auto& w : ws) CHECK(w.t_next - w.t_now < 0.03);
    }
    SUBCASE("too few samples") {
        std::vector<data::RawSample> two(rows.begin(), rows.begin() + 2);
        CHECK_THROWS_AS(data::window(two, 2), InsufficientData);
    }
}

TEST_CASE("split") {
    std::vector<data::RawSample> rows(993);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].time = 0.02 * static_cast<double>(i);
        rows[i].vx = 1.0;
    }
    auto ws = data::window(rows, 1);
    REQUIRE(ws.size() == 992);

    SUBCASE("ratio 1.0 returns the full set as train") {
        auto s = data::split(ws, {1.0, 5});
        CHECK(s.train.size() == ws.size());
        CHECK(s.validation.size() == ws.size());
        std::multiset<double> a, b;
        for (const auto& w : s.train) a.insert(w.t_next);
        for (const auto& w : s.validation) b.insert(w.t_next);
        CHECK(a == b);
    }
    SUBCASE("ceil(ratio*len) and determinism") {
        auto ws991 = std::vector<data::WindowedSample>(ws.begin(), ws.begin() + 991);
        auto s1 = data::split(ws991, {0.15, 7});
        auto s2 = data::split(ws991, {0.15, 7});
        CHECK(s1.train.size() == 149);
        REQUIRE(s1.train.size() == s2.train.size());
        for (std::size_t i = 0; i < s1.train.size(); ++i)
            CHECK(s1.train[i].t_next == s2.train[i].t_next);
        auto s3 = data::split(ws991, {0.15, 8});
        bool same = s3.train.size() == s1.train.size();
        if (same) {
            bool all_eq = true;
            for (std::size_t i = 0; i < s1.train.size(); ++i)
                all_eq = all_eq && s1.train[i].t_next == s3.train[i].t_next;
            CHECK_FALSE(all_eq);
        }
    }
    SUBCASE("train is always a subset of validation") {
        auto s = data::split(ws, {0.3, 21});
        std::multiset<double> val;
        for (const auto& w : s.validation) val.insert(w.t_next);
        for (const auto& w : s.train) CHECK(val.count(w.t_next) == 1);
        CHECK(s.validation.size() == ws.size());
    }
    SUBCASE("invalid ratio") {
        CHECK_THROWS_AS(data::split(ws, {0.0, 1}), ConfigError);
        CHECK_THROWS_AS(data::split(ws, {1.2, 1}), ConfigError);
    }
}
