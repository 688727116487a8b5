#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nmrbell/io.hpp"
#include "nmrbell/pipeline.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace nmrbell;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config_path,
                                "JSON configuration file");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--format", args.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

json load_config(const CommonArgs& args, const json& fallback) {
    if (args.config_path.empty()) return fallback;
    std::string text = io::read_file(args.config_path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed config JSON: ") + e.what());
    }
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& what) {
    if (!obj.is_object()) throw FormatError(what + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw FormatError(what + ": unknown key '" + key + "'");
    }
}

pipeline::LoadedSource source_from_config(const json& cfg) {
    std::string source = cfg.value("source", std::string("circuit"));
    std::string state_file = cfg.value("state_file", std::string());
    return pipeline::load_source(pipeline::parse_source(source), state_file);
}

int cmd_prepare(const CommonArgs& args) {
    circuits::Circuit c = circuits::s_prep_circuit();
    qstate::StateVector psi = c.apply_to_ground();
    io::write_file(args.out_dir + "/circuit.json", io::circuit_to_json(c));
    io::write_file(args.out_dir + "/state.json", io::state_to_json(psi));

    nmr::SpinSystem sys;
    nmr::LoweredCircuit lowered = nmr::lower_circuit(c, sys);
    io::write_file(args.out_dir + "/pulse_events.json",
                   io::events_to_json(lowered.events));
    qstate::CMatrix u = lowered.correction.unitary() *
                        nmr::sequence_unitary(lowered.events, sys);
    qstate::CVector ground = qstate::CVector::Zero(8);
    ground(0) = 1;
    qstate::StateVector pulse_psi(u * ground);
    io::write_file(args.out_dir + "/pulse_state.json",
                   io::state_to_json(pulse_psi));

    double f = qstate::overlap(psi, circuits::s_state());
    double fp = qstate::overlap(pulse_psi, circuits::s_state());
    std::cout << "wrote circuit.json state.json pulse_events.json pulse_state.json\n"
              << "circuit overlap with target " << io::format_real(f)
              << ", pulse-level overlap " << io::format_real(fp) << "\n";
    return 0;
}

int cmd_tomo(const CommonArgs& args) {
    json cfg = load_config(args, json::object());
    check_keys(cfg, {"source", "state_file", "sigma", "seed", "settings"},
               "tomo config");
    pipeline::LoadedSource src = source_from_config(cfg);
    double sigma = cfg.value("sigma", 0.0);
    if (sigma < 0) throw FormatError("tomo config: sigma must be nonnegative");
    std::optional<std::uint64_t> seed = args.seed;
    if (!seed && cfg.contains("seed")) seed = cfg["seed"].get<std::uint64_t>();
    if (sigma > 0 && !seed)
        throw FormatError("tomo config: a seed is required when sigma > 0");

    std::vector<tomography::Setting> settings;
    if (cfg.contains("settings")) {
        for (const auto& s : cfg["settings"])
            settings.emplace_back(s.get<std::string>());
    } else {
        settings = tomography::canonical_settings();
    }
    std::vector<tomography::MeasurementRecord> records;
    for (size_t i = 0; i < settings.size(); ++i)
        records.push_back(tomography::simulate_readout(
            src.state, settings[i], sigma,
            seed.value_or(0) + static_cast<std::uint64_t>(i)));
    io::write_file(args.out_dir + "/records.json", io::records_to_json(records));

    tomography::Reconstruction rec = tomography::reconstruct(records);
    if (!rec.converged)
        throw ConvergenceError("tomographic reconstruction did not converge");
    io::write_file(args.out_dir + "/reconstruction.json",
                   io::reconstruction_to_json(rec));
    io::emit_tomograph(rec.rho_hat, args.out_dir + "/tomograph");
    std::cout << "wrote records.json reconstruction.json tomograph CSVs; residual "
              << io::format_real(rec.residual) << "\n";
    return 0;
}

int cmd_entangle(const CommonArgs& args) {
    json cfg = load_config(args, json{{"source", "circuit"}});
    check_keys(cfg, {"source", "state_file", "negativity_convention"},
               "entangle config");
    pipeline::LoadedSource src = source_from_config(cfg);
    auto conv = entanglement::NegativityConvention::Doubled;
    if (cfg.value("negativity_convention", std::string("doubled")) == "plain")
        conv = entanglement::NegativityConvention::Plain;

    entanglement::NegativityReport neg =
        entanglement::tripartite_negativity(src.state, conv);
    std::array<double, 3> conc = entanglement::pairwise_concurrences(src.state);
    ordered_json report;
    report["negativity"] = {{"n_a_bc", neg.n1_23},
                            {"n_b_ac", neg.n2_13},
                            {"n_c_ab", neg.n3_12},
                            {"tripartite", neg.tripartite},
                            {"convention", conv == entanglement::NegativityConvention::Doubled
                                               ? "doubled"
                                               : "plain"}};
    report["concurrence"] = {{"c_12", conc[0]}, {"c_13", conc[1]}, {"c_23", conc[2]}};
    io::write_file(args.out_dir + "/entanglement.json", report.dump(1) + "\n");
    std::cout << "wrote entanglement.json; tripartite negativity "
              << io::format_real(neg.tripartite) << "\n";
    return 0;
}

int cmd_bell(const CommonArgs& args) {
    json cfg = load_config(args, json{{"source", "circuit"}});
    check_keys(cfg, {"source", "state_file", "functional_file"}, "bell config");
    pipeline::LoadedSource src = source_from_config(cfg);
    bell::BellFunctional f;
    if (cfg.contains("functional_file"))
        f = bell::from_text(io::read_file(cfg["functional_file"].get<std::string>()));
    else
        f = bell::t26();

    bell::MeasurementSettings m = bell::MeasurementSettings::zx();
    double value = bell::evaluate(f, src.state, m);
    bell::ClassicalBound enumerated = bell::classical_bound_bruteforce(f);
    ordered_json report;
    report["functional"] = f.name.empty() ? "custom" : f.name;
    report["value"] = value;
    report["classical_bound"] = f.bound;
    report["enumerated_bound"] = enumerated.bound;
    report["achievers"] = enumerated.achievers.size();
    report["violated"] = value > f.bound;
    io::write_file(args.out_dir + "/bell.json", report.dump(1) + "\n");
    io::write_file(args.out_dir + "/functional.txt", bell::to_text(f));
    std::cout << "wrote bell.json functional.txt; value "
              << io::format_real(value) << " vs bound " << io::format_real(f.bound)
              << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    json cfg = load_config(args, json{{"source", "circuit"}});
    check_keys(cfg, {"source", "state_file", "party", "index", "points"},
               "sweep config");
    pipeline::LoadedSource src = source_from_config(cfg);
    std::string party = cfg.value("party", std::string("A"));
    if (party.size() != 1 || party[0] < 'A' || party[0] > 'C')
        throw FormatError("sweep config: party must be A, B or C");
    int index = cfg.value("index", 1);
    int points = cfg.value("points", 181);
    if (points < 2) throw FormatError("sweep config: points must be at least 2");

    std::vector<double> thetas(points);
    for (int k = 0; k < points; ++k) thetas[k] = kPi * k / (points - 1);
    std::vector<bell::SweepPoint> curve = bell::incompatibility_sweep(
        bell::t26(), src.state, bell::MeasurementSettings::zx(), party[0] - 'A',
        index, thetas);
    io::write_file(args.out_dir + "/sweep.csv", io::sweep_to_csv(curve));
    auto best = std::max_element(curve.begin(), curve.end(),
                                 [](const auto& a, const auto& b) {
                                     return a.value < b.value;
                                 });
    std::cout << "wrote sweep.csv; maximum " << io::format_real(best->value)
              << " at theta " << io::format_real(best->theta) << "\n";
    return 0;
}

int cmd_grape(const CommonArgs& args) {
    json cfg = load_config(args, json::object());
    check_keys(cfg,
               {"target", "segments", "duration", "max_amplitude", "seed",
                "max_iterations", "stop_fidelity"},
               "grape config");
    nmr::GrapeProblem problem;
    std::string target = cfg.value("target", std::string("cnot12"));
    if (target == "identity") {
        problem.target = qstate::identity(8);
    } else if (target.size() == 6 && target.substr(0, 4) == "cnot") {
        int control = target[4] - '0';
        int tgt = target[5] - '0';
        problem.target = circuits::Gate::cnot(control, tgt).embedded_unitary(3);
    } else {
        throw FormatError("grape config: target must be identity or cnotCT");
    }
    problem.segments = cfg.value("segments", 100);
    problem.total_duration = cfg.value("duration", 1.5 / 69.65);
    problem.max_amplitude = cfg.value("max_amplitude", 2 * kPi * 500.0);
    problem.seed = args.seed ? *args.seed : cfg.value("seed", std::uint64_t{0});
    problem.max_iterations = cfg.value("max_iterations", 2000);
    problem.stop_fidelity = cfg.value("stop_fidelity", 0.999);

    nmr::GrapeResult res = nmr::grape_optimize(problem);
    io::write_file(args.out_dir + "/controls.csv",
                   io::grape_controls_to_csv(res.controls));
    std::string history = "iteration,fidelity\n";
    for (size_t i = 0; i < res.history.size(); ++i)
        history += std::to_string(i) + "," + io::format_real(res.history[i]) + "\n";
    io::write_file(args.out_dir + "/history.csv", history);
    ordered_json report;
    report["target"] = target;
    report["segments"] = problem.segments;
    report["duration"] = problem.total_duration;
    report["max_amplitude"] = problem.max_amplitude;
    report["seed"] = problem.seed;
    report["fidelity"] = res.fidelity;
    report["iterations"] = res.history.size() - 1;
    report["converged"] = res.converged;
    io::write_file(args.out_dir + "/grape.json", report.dump(1) + "\n");
    if (!res.converged)
        throw ConvergenceError("grape optimization stopped below the target fidelity");
    std::cout << "wrote controls.csv history.csv grape.json; fidelity "
              << io::format_real(res.fidelity) << "\n";
    return 0;
}

int cmd_pipeline(const CommonArgs& args) {
    std::string text = io::read_file(args.config_path);
    pipeline::PipelineConfig cfg = pipeline::parse_pipeline_config(text);
    if (args.seed) cfg.seed = args.seed;
    pipeline::PipelineOutputs out = pipeline::run_pipeline(cfg);
    pipeline::write_outputs(out, args.out_dir, args.format);
    std::cout << "wrote report." << args.format
              << " and side files to " << args.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-qubit Bell-violation simulator and analysis toolkit"};
    app.require_subcommand(1);

    CommonArgs prepare_args, tomo_args, entangle_args, bell_args, sweep_args,
        grape_args, pipeline_args;
    add_common(app.add_subcommand("prepare",
                                  "emit the preparation circuit, pulse program "
                                  "and prepared states"),
               prepare_args, false);
    add_common(app.add_subcommand("tomo", "simulate readout and reconstruct"),
               tomo_args, false);
    add_common(app.add_subcommand("entangle", "negativity and concurrence report"),
               entangle_args, false);
    add_common(app.add_subcommand("bell", "Bell functional value and bound"),
               bell_args, false);
    add_common(app.add_subcommand("sweep", "incompatibility sweep curve"),
               sweep_args, false);
    add_common(app.add_subcommand("grape", "piecewise-constant pulse optimization"),
               grape_args, false);
    add_common(app.add_subcommand("pipeline", "full end-to-end run"),
               pipeline_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("prepare")) return cmd_prepare(prepare_args);
        if (app.got_subcommand("tomo")) return cmd_tomo(tomo_args);
        if (app.got_subcommand("entangle")) return cmd_entangle(entangle_args);
        if (app.got_subcommand("bell")) return cmd_bell(bell_args);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_args);
        if (app.got_subcommand("grape")) return cmd_grape(grape_args);
        if (app.got_subcommand("pipeline")) return cmd_pipeline(pipeline_args);
    } catch (const FormatError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
