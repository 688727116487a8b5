#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "json.hpp"
#include "nmrbell/bell.hpp"
#include "nmrbell/circuits.hpp"
#include "nmrbell/errors.hpp"
#include "nmrbell/io.hpp"
#include "nmrbell/pipeline.hpp"

using namespace nmrbell;
using nlohmann::json;
using pipeline::parse_pipeline_config;
using pipeline::PipelineConfig;
using pipeline::run_pipeline;

namespace {

constexpr double kQuantumMax = 7.9282032302755105;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("nmrbell_pipe_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    std::string dir() const { return path.string(); }
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(NMRBELL_CLI_PATH) + " " + args +
                      " > /dev/null 2> /dev/null";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parser accepts the full schema and fills defaults") {
    PipelineConfig minimal = parse_pipeline_config(R"({"source": "circuit"})");
    CHECK(minimal.source == pipeline::Source::Circuit);
    CHECK(!minimal.pps.enabled);
    CHECK(!minimal.noise.enabled);
    CHECK(!minimal.tomography.enabled);
    CHECK(!minimal.sweep.enabled);
    CHECK(!minimal.seed);
    CHECK(minimal.analysis.negativity == entanglement::NegativityConvention::Doubled);
    CHECK(minimal.analysis.fidelity == noise::FidelityConvention::Uhlmann);

    PipelineConfig full = parse_pipeline_config(R"({
        "source": "pulse",
        "seed": 7,
        "pps": {"enabled": true, "epsilon": 0.001, "analyze_core": false},
        "noise": {"enabled": true, "kind": "dephasing", "q": [0.1, 0.2, 0.3]},
        "tomography": {"enabled": true, "sigma": 0.01, "seed": 42,
                       "settings": ["III", "XXX"]},
        "sweep": {"enabled": true, "party": "B", "index": 0, "points": 19},
        "analysis": {"negativity_convention": "plain",
                     "fidelity_convention": "squared"}
    })");
    CHECK(full.source == pipeline::Source::Pulse);
    CHECK(full.seed == 7);
    CHECK(full.pps.enabled);
    CHECK(full.pps.epsilon == 0.001);
    CHECK(!full.pps.analyze_core);
    CHECK(full.noise.kind == noise::Channel::Kind::Dephasing);
    CHECK(full.noise.q == std::array<double, 3>{0.1, 0.2, 0.3});
    CHECK(full.tomography.sigma == 0.01);
    CHECK(full.tomography.seed == 42);
    CHECK(full.tomography.settings == std::vector<std::string>{"III", "XXX"});
    CHECK(full.sweep.party == 1);
    CHECK(full.sweep.index == 0);
    CHECK(full.sweep.points == 19);
    CHECK(full.analysis.negativity == entanglement::NegativityConvention::Plain);
    CHECK(full.analysis.fidelity == noise::FidelityConvention::Squared);

    PipelineConfig scalar_q = parse_pipeline_config(
        R"({"source": "circuit", "noise": {"kind": "dephasing", "q": 0.25}})");
    CHECK(scalar_q.noise.q == std::array<double, 3>{0.25, 0.25, 0.25});
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS_AS(parse_pipeline_config("not json"), FormatError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"source": "circuit", "x": 1})"),
                    FormatError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({})"), FormatError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"source": "laser"})"), FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(R"({"source": "circuit", "state_file": "x.json"})"),
        FormatError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"source": "file"})"), FormatError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"source": "circuit", "seed": -3})"),
                    FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "pps": {"epsilon": 0.0}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "pps": {"epsilon": 1.5}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "pps": {"eps": 0.1}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(R"({"source": "circuit", "noise": {"p": 0.1}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "noise": {"kind": "depolarizing"}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "noise": {"kind": "dephasing"}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit",
                "noise": {"kind": "dephasing", "q": [0.1, 0.2]}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "noise": {"kind": "thermal", "p": 0.1}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "tomography": {"sigma": -0.1}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "sweep": {"party": "D"}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "sweep": {"index": 2}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "sweep": {"points": 1}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit",
                "analysis": {"negativity_convention": "triple"}})"),
        FormatError);
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit",
                "analysis": {"fidelity_convention": "root"}})"),
        FormatError);
}

TEST_CASE("noisy tomography without any seed is rejected") {
    CHECK_THROWS_AS(
        parse_pipeline_config(
            R"({"source": "circuit", "tomography": {"sigma": 0.01}})"),
        FormatError);
    CHECK_NOTHROW(parse_pipeline_config(
        R"({"source": "circuit", "seed": 1, "tomography": {"sigma": 0.01}})"));
    CHECK_NOTHROW(parse_pipeline_config(
        R"({"source": "circuit", "tomography": {"sigma": 0.01, "seed": 1}})"));
    CHECK_NOTHROW(parse_pipeline_config(
        R"({"source": "circuit", "tomography": {"sigma": 0.0}})"));
}

TEST_CASE("default circuit run reproduces the ideal analysis numbers") {
    PipelineConfig cfg = parse_pipeline_config(R"({"source": "circuit"})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    const auto& r = out.report;

    CHECK(r["schema_version"] == 1);
    CHECK(r["source"]["kind"] == "circuit");
    CHECK(r["source"]["cnot_count"] == 4);
    CHECK(r["source"]["fidelity_to_target"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r["seeds"]["master"].is_null());
    CHECK(!r.contains("pseudopure"));
    CHECK(!r.contains("noise"));
    CHECK(!r.contains("tomography"));
    CHECK(!r.contains("sweep"));

    CHECK(r["negativity"]["convention"] == "doubled");
    for (const char* key : {"n_a_bc", "n_b_ac", "n_c_ab", "tripartite"})
        CHECK(r["negativity"][key].get<double>() ==
              doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-10));
    for (const char* key : {"c_12", "c_13", "c_23"})
        CHECK(r["concurrence"][key].get<double>() ==
              doctest::Approx(0.24401693585629253).epsilon(1e-7));

    CHECK(r["bell"]["classical_bound"] == 5.0);
    CHECK(r["bell"]["enumerated_bound"] == 5.0);
    CHECK(r["bell"]["value"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-12));
    CHECK(r["bell"]["violated"] == true);
    CHECK(r["bell"]["quantum_maximum"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-12));

    const auto& cal = r["reference_comparison"]["calibration"];
    double p_expected = 8.0 * (1.0 - 0.949 * 0.949) / 7.0;
    CHECK(cal["p_calibrated"].get<double>() ==
          doctest::Approx(p_expected).epsilon(1e-5));
    CHECK(cal["fidelity_at_calibrated"].get<double>() ==
          doctest::Approx(0.949).epsilon(1e-6));
    CHECK(cal["t26_at_calibrated"].get<double>() ==
          doctest::Approx((1.0 - p_expected) * kQuantumMax).epsilon(1e-5));
    CHECK(cal["violation_preserved"] == true);
    CHECK(cal["p_best_fit"].is_number());
    CHECK(r["reference_comparison"]["residuals"]["t26"].is_number());

    CHECK(out.analysis_state.dim() == 8);
    CHECK(out.records.empty());
    CHECK(out.sweep.empty());
}

TEST_CASE("squared fidelity convention lowers the calibrated p") {
    PipelineConfig cfg = parse_pipeline_config(
        R"({"source": "circuit", "analysis": {"fidelity_convention": "squared"}})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    const auto& cal = out.report["reference_comparison"]["calibration"];
    CHECK(cal["p_calibrated"].get<double>() ==
          doctest::Approx(8.0 * (1.0 - 0.949) / 7.0).epsilon(1e-5));
}

TEST_CASE("pseudopure core analysis matches the pure state") {
    PipelineConfig cfg = parse_pipeline_config(
        R"({"source": "circuit", "pps": {"enabled": true, "epsilon": 1e-5}})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    const auto& r = out.report;
    CHECK(r["pseudopure"]["epsilon"].get<double>() == 1e-5);
    CHECK(r["pseudopure"]["analyze_core"] == true);
    CHECK(r["fidelity"]["analysis_to_target"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r["bell"]["value"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-9));
    CHECK(r["bell"]["pps_raw"].get<double>() ==
          doctest::Approx(1e-5 * kQuantumMax).epsilon(1e-9));
    CHECK(r["bell"]["pps_renormalized"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-9));

    PipelineConfig literal = parse_pipeline_config(
        R"({"source": "circuit",
            "pps": {"enabled": true, "epsilon": 1e-5, "analyze_core": false}})");
    pipeline::PipelineOutputs lout = run_pipeline(literal);
    const auto& lr = lout.report["bell"];
    CHECK(lr["value"].get<double>() ==
          doctest::Approx(1e-5 * kQuantumMax).epsilon(1e-6));
    CHECK(lr["violated"] == false);
}

TEST_CASE("depolarizing noise scales the functional linearly") {
    PipelineConfig cfg = parse_pipeline_config(
        R"({"source": "circuit",
            "noise": {"enabled": true, "kind": "depolarizing", "p": 0.2}})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    const auto& r = out.report;
    CHECK(r["noise"]["kind"] == "depolarizing");
    CHECK(r["bell"]["value"].get<double>() ==
          doctest::Approx(0.8 * kQuantumMax).epsilon(1e-10));
    CHECK(r["negativity"]["tripartite"].get<double>() <
          2.0 * std::sqrt(2.0) / 3.0);
}

TEST_CASE("tomography stage is deterministic and accurate at the frozen seed") {
    std::string text =
        R"({"source": "circuit", "tomography": {"sigma": 0.01, "seed": 33}})";
    pipeline::PipelineOutputs a = run_pipeline(parse_pipeline_config(text));
    pipeline::PipelineOutputs b = run_pipeline(parse_pipeline_config(text));
    CHECK(a.report.dump() == b.report.dump());
    REQUIRE(a.records.size() == 7);
    CHECK(a.records[0].seed == 33);
    CHECK(a.records[6].seed == 39);
    for (int m = 0; m < 12; ++m)
        CHECK(a.records[3].amplitudes[m] == b.records[3].amplitudes[m]);

    const auto& t = a.report["tomography"];
    CHECK(t["converged"] == true);
    CHECK(t["settings"].size() == 7);
    CHECK(t["reconstruction_fidelity"].get<double>() >= 0.99);
    CHECK(a.report["seeds"]["tomography"] == 33);

    // master seed feeds the tomography stream when no stage seed is given
    pipeline::PipelineOutputs c = run_pipeline(parse_pipeline_config(
        R"({"source": "circuit", "seed": 33, "tomography": {"sigma": 0.01}})"));
    CHECK(c.report["tomography"].dump() == t.dump());
}

TEST_CASE("noiseless tomography stage reproduces the state") {
    PipelineConfig cfg = parse_pipeline_config(
        R"({"source": "circuit", "tomography": {"sigma": 0.0}})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    const auto& t = out.report["tomography"];
    CHECK(t["residual"].get<double>() < 1e-10);
    CHECK(t["reconstruction_fidelity"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sweep stage reports the peak at ninety degrees") {
    PipelineConfig cfg = parse_pipeline_config(
        R"({"source": "circuit", "sweep": {"enabled": true, "points": 19}})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    REQUIRE(out.sweep.size() == 19);
    const auto& s = out.report["sweep"];
    CHECK(s["party"] == "A");
    CHECK(s["index"] == 1);
    CHECK(s["theta_max"].get<double>() == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(s["value_max"].get<double>() ==
          doctest::Approx(1.0 + 4.0 / std::sqrt(3.0) + 8.0 / std::sqrt(3.0))
              .epsilon(1e-9));
    CHECK(s["value_at_zero"].get<double>() ==
          doctest::Approx(3.3094010767585034).epsilon(1e-9));
}

TEST_CASE("file source feeds the analysis directly") {
    TempDir tmp;
    io::write_file(tmp.file("s.json"), io::state_to_json(circuits::s_state()));
    json cfg_json = {{"source", "file"}, {"state_file", tmp.file("s.json")}};
    PipelineConfig cfg = parse_pipeline_config(cfg_json.dump());
    pipeline::PipelineOutputs out = run_pipeline(cfg);
    const auto& r = out.report;
    CHECK(r["source"]["kind"] == "file");
    CHECK(r["bell"]["value"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-12));

    PipelineConfig missing = parse_pipeline_config(
        R"({"source": "file", "state_file": "/nonexistent/state.json"})");
    CHECK_THROWS_AS(run_pipeline(missing), IoError);
}

TEST_CASE("stage failures carry the stage name") {
    TempDir tmp;
    io::write_file(tmp.file("bad.json"), "{");
    PipelineConfig cfg = parse_pipeline_config(
        json{{"source", "file"}, {"state_file", tmp.file("bad.json")}}.dump());
    try {
        run_pipeline(cfg);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).rfind("stage source:", 0) == 0);
    }
}

TEST_CASE("write_outputs emits the report and side files") {
    PipelineConfig cfg = parse_pipeline_config(
        R"({"source": "circuit",
            "tomography": {"sigma": 0.0},
            "sweep": {"enabled": true, "points": 5}})");
    pipeline::PipelineOutputs out = run_pipeline(cfg);

    TempDir tmp;
    pipeline::write_outputs(out, tmp.dir(), "json");
    CHECK(std::filesystem::exists(tmp.file("report.json")));
    CHECK(std::filesystem::exists(tmp.file("tomograph_real.csv")));
    CHECK(std::filesystem::exists(tmp.file("tomograph_imag.csv")));
    CHECK(std::filesystem::exists(tmp.file("records.json")));
    CHECK(std::filesystem::exists(tmp.file("sweep.csv")));
    json parsed = json::parse(io::read_file(tmp.file("report.json")));
    CHECK(parsed["bell"]["violated"] == true);

    TempDir tmp2;
    pipeline::write_outputs(out, tmp2.dir(), "csv");
    std::string csv = io::read_file(tmp2.file("report.csv"));
    CHECK(csv.rfind("key,value\n", 0) == 0);
    CHECK(csv.find("bell.value,") != std::string::npos);
    CHECK(csv.find("tomography.settings,\"III\";") != std::string::npos);

    CHECK_THROWS_AS(pipeline::write_outputs(out, tmp2.dir(), "yaml"), FormatError);
}

TEST_CASE("cli pipeline run writes a report and exits cleanly") {
    TempDir tmp;
    io::write_file(tmp.file("cfg.json"),
                   R"({"source": "circuit", "sweep": {"enabled": true, "points": 5}})");
    CHECK(run_cli("pipeline --config " + tmp.file("cfg.json") + " --out " +
                  tmp.dir()) == 0);
    CHECK(std::filesystem::exists(tmp.file("report.json")));
    CHECK(std::filesystem::exists(tmp.file("sweep.csv")));
    json report = json::parse(io::read_file(tmp.file("report.json")));
    CHECK(report["bell"]["value"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-12));
}

TEST_CASE("cli maps error classes to exit codes") {
    TempDir tmp;
    // malformed config -> 2
    io::write_file(tmp.file("bad.json"), R"({"source": "circuit", "zz": 1})");
    CHECK(run_cli("pipeline --config " + tmp.file("bad.json")) == 2);
    // noisy tomography without a seed -> 2
    io::write_file(tmp.file("noseed.json"),
                   R"({"source": "circuit", "tomography": {"sigma": 0.01}})");
    CHECK(run_cli("pipeline --config " + tmp.file("noseed.json")) == 2);
    // missing config file -> 4
    CHECK(run_cli("pipeline --config " + tmp.file("absent.json")) == 4);
    // grape stopped before the fidelity target -> 3
    io::write_file(tmp.file("grape.json"),
                   R"({"target": "cnot12", "segments": 20, "max_iterations": 1,
                       "stop_fidelity": 0.999, "seed": 1})");
    CHECK(run_cli("grape --config " + tmp.file("grape.json") + " --out " +
                  tmp.dir()) == 3);
    // unknown subcommand -> 2 via the argument parser
    CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("cli stage subcommands emit their files") {
    TempDir tmp;
    CHECK(run_cli("prepare --out " + tmp.dir()) == 0);
    for (const char* f : {"circuit.json", "state.json", "pulse_events.json",
                          "pulse_state.json"})
        CHECK(std::filesystem::exists(tmp.path / f));

    CHECK(run_cli("bell --out " + tmp.dir()) == 0);
    json bell_report = json::parse(io::read_file(tmp.file("bell.json")));
    CHECK(bell_report["value"].get<double>() ==
          doctest::Approx(kQuantumMax).epsilon(1e-12));
    CHECK(bell_report["enumerated_bound"] == 5.0);
    CHECK(bell_report["achievers"] == 32);

    CHECK(run_cli("entangle --out " + tmp.dir()) == 0);
    json ent = json::parse(io::read_file(tmp.file("entanglement.json")));
    CHECK(ent["negativity"]["tripartite"].get<double>() ==
          doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-10));

    io::write_file(tmp.file("tomo.json"),
                   R"({"source": "circuit", "sigma": 0.0})");
    CHECK(run_cli("tomo --config " + tmp.file("tomo.json") + " --out " +
                  tmp.dir()) == 0);
    CHECK(std::filesystem::exists(tmp.file("reconstruction.json")));

    io::write_file(tmp.file("sweep.json"), R"({"points": 9})");
    CHECK(run_cli("sweep --config " + tmp.file("sweep.json") + " --out " +
                  tmp.dir()) == 0);
    std::string sweep_csv = io::read_file(tmp.file("sweep.csv"));
    CHECK(std::count(sweep_csv.begin(), sweep_csv.end(), '\n') == 10);
}
