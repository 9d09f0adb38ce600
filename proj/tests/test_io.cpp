#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include <json.hpp>

#include "qprep/io.hpp"

using namespace qprep;
using Catch::Approx;

#ifndef QPREP_TEST_TMPDIR
#error "QPREP_TEST_TMPDIR must be defined by the build"
#endif

namespace {
const std::string kTmp = QPREP_TEST_TMPDIR;
}

TEST_CASE("format_double round-trips binary doubles through text") {
    for (double x : {1.0, -0.3333333333333333, 1e-300, 9.753, 0.6344590962559504, 3.141592653589793}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("text file round-trip") {
    const std::string path = kTmp + "/io_roundtrip.txt";
    const std::string content = "line one\nline two\n# comment\n";
    write_text_file(path, content);
    CHECK(read_text_file(path) == content);
    CHECK_THROWS_AS(read_text_file(kTmp + "/does_not_exist.txt"), std::runtime_error);
}

TEST_CASE("config parser") {
    SECTION("key = value lines with comments and blanks") {
        const ConfigMap cfg = parse_config(
            "# experiment\n"
            "synth.levels = 64\n"
            "\n"
            "synth.gap=0.075   # inline comment\n"
            "run.path = spectral\n"
            "noise.lambdas = 1e-5, 1e-4, 1e-3\n");
        CHECK(cfg.size() == 4);
        CHECK(config_long(cfg, "synth.levels", 0) == 64);
        CHECK(config_double(cfg, "synth.gap", 0.0) == 0.075);
        CHECK(config_get(cfg, "run.path", "") == "spectral");
        const auto lambdas = config_double_list(cfg, "noise.lambdas");
        REQUIRE(lambdas.size() == 3);
        CHECK(lambdas[0] == 1e-5);
        CHECK(lambdas[2] == 1e-3);
    }

    SECTION("malformed lines report their line number") {
        CHECK_THROWS_WITH(parse_config("a = 1\nnot a pair\n"), Catch::Matchers::ContainsSubstring("line 2"));
    }

    SECTION("missing and malformed lookups") {
        const ConfigMap cfg = parse_config("x = nope\n");
        CHECK_THROWS_AS(config_require(cfg, "y"), std::invalid_argument);
        CHECK_THROWS_AS(config_double_require(cfg, "x"), std::invalid_argument);
        CHECK(config_double(cfg, "z", 2.5) == 2.5);
        CHECK_FALSE(config_has(cfg, "y"));
    }
}

TEST_CASE("prep trace CSV serialization") {
    PrepTrace trace;
    trace.records.push_back({0, 0.0, 1.0, 1.0, 0.2, 0.0});
    trace.records.push_back({1, 1.5707963267948966, 0.625, 0.625, 0.32, 1.5707963267948966});
    trace.records.push_back({2, 0.7853981633974483, 0.913, 0.5706, 0.51, 2.356194490192345});
    trace.restarts = 4;
    trace.total_sim_time = 11.25;

    const std::string csv = to_csv(trace);
    CHECK(csv.rfind("k,t,p_k,P_k,fidelity,cum_sim_time\n", 0) == 0);

    const PrepTrace back = prep_trace_from_csv(csv);
    REQUIRE(back.records.size() == trace.records.size());
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        CHECK(back.records[i].k == trace.records[i].k);
        CHECK(back.records[i].t == trace.records[i].t);
        CHECK(back.records[i].p == trace.records[i].p);
        CHECK(back.records[i].P == trace.records[i].P);
        CHECK(back.records[i].fidelity == trace.records[i].fidelity);
        CHECK(back.records[i].cum_sim_time == trace.records[i].cum_sim_time);
    }

    CHECK_THROWS_AS(prep_trace_from_csv("wrong,header\n1,2\n"), std::invalid_argument);

    const nlohmann::json sidecar = trace_sidecar_json(trace, parse_config("run.seed = 7\n"));
    CHECK(sidecar["restarts"] == 4);
    CHECK(sidecar["total_sim_time"] == 11.25);
    CHECK(sidecar["config"]["run.seed"] == "7");
}

TEST_CASE("noisy trace CSV header") {
    NoisyTrace trace;
    trace.records.push_back({0, 0.2, 1.0});
    trace.records.push_back({1, 0.35, 0.625});
    const std::string csv = to_csv(trace);
    CHECK(csv.rfind("k,fidelity,P_k\n", 0) == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
}

TEST_CASE("spectral state JSON round-trip") {
    SpectralState s;
    s.entries = {{0.0, {0.44721359549995793, 0.0}}, {1.3, {0.2, -0.7}}, {2.9, {-0.4, 0.33}}};
    s.target_index = 0;
    s.occupancy_threshold = 1e-9;

    const nlohmann::json j = to_json(s);
    const SpectralState back = spectral_state_from_json(j);
    REQUIRE(back.entries.size() == s.entries.size());
    CHECK(back.target_index == s.target_index);
    CHECK(back.occupancy_threshold == s.occupancy_threshold);
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        CHECK(back.entries[i].energy == s.entries[i].energy);
        CHECK(back.entries[i].amplitude == s.entries[i].amplitude);
    }

    const std::string path = kTmp + "/state.json";
    write_text_file(path, j.dump(2) + "\n");
    const SpectralState from_disk = read_spectral_state(path);
    CHECK(from_disk.entries.size() == s.entries.size());
}

TEST_CASE("bounds report aggregates the analytic quantities") {
    SECTION("exact-regime report pins") {
        const BoundsReport r = make_bounds_report(0.2, 1e-8, 0.075, 9.753);
        CHECK(r.period == 9);
        CHECK(r.k_bar_exact_regime == 129);
        CHECK(r.k_bar == 129);
        CHECK(r.regime() == "exact-energy");
        CHECK(r.gamma <= 0.25 + 1e-6);
        REQUIRE(!r.ks.empty());
        CHECK(r.ks.front() == 0);
        CHECK(r.ks.back() >= r.k_bar);
        REQUIRE(r.floors.size() == r.ks.size());
        CHECK(r.floors.front() == Approx(0.2).margin(1e-14));
        for (std::size_t i = 1; i < r.floors.size(); ++i) CHECK(r.floors[i] >= r.floors[i - 1] - 1e-15);
        // the guarantee closes within one period of k_bar, so the floor at
        // k_bar itself is within a factor 4 of the epsilon target
        CHECK(r.floors.back() >= 1.0 - 4.0 * r.epsilon - 1e-15);
        CHECK(std::isnan(r.cost_expected));
        CHECK(r.cost_bound_at_k_bar > 0.0);
    }

    SECTION("zero offset collapses the two regimes") {
        const BoundsReport r = make_bounds_report(0.2, 1e-8, 1.0, 7.0, 0.0);
        CHECK(r.k_bar_exact_regime == r.k_bar_approx_regime);
        CHECK(r.k_bar == r.k_bar_exact_regime);
    }

    SECTION("offset regime report") {
        const BoundsReport r = make_bounds_report(0.2, 1e-8, 1.0, 7.0, 1.0 / 3.0);
        CHECK(r.regime() == "approx-energy");
        CHECK(r.k_bar == r.k_bar_approx_regime);
        CHECK(r.k_bar_approx_regime > r.k_bar_exact_regime);
    }

    SECTION("rte floors appear when requested") {
        const BoundsReport r = make_bounds_report(0.2, 1e-8, 1.0, 7.0, 0.0, 1e-8, 40);
        REQUIRE(r.rte_floors.size() == r.ks.size());
        CHECK(r.ks.back() == 40);
        for (std::size_t i = 0; i < r.ks.size(); ++i) CHECK(r.rte_floors[i] <= r.floors[i] + 1e-12);
    }

    SECTION("report JSON is schema-stable") {
        BoundsReport r = make_bounds_report(0.3, 1e-6, 0.5, 4.0);
        r.cost_expected = 123.5;
        const nlohmann::json j = to_json(r);
        CHECK(j["regime"] == "exact-energy");
        CHECK(j["period"] == r.period);
        CHECK(j["k_bar"] == r.k_bar);
        CHECK(j["gamma"] == r.gamma);
        CHECK(j["cost_bound"] == r.cost_bound_at_k_bar);
        CHECK(j["cost_expected"] == 123.5);
        REQUIRE(j["k"].is_array());
        REQUIRE(j["fidelity_floor"].is_array());
        CHECK(j["k"].size() == r.ks.size());
        CHECK(j["fidelity_floor"].size() == r.floors.size());
        CHECK_FALSE(j.contains("rte_floor"));

        const nlohmann::json without = to_json(make_bounds_report(0.3, 1e-6, 0.5, 4.0));
        CHECK_FALSE(without.contains("cost_expected"));
    }
}
