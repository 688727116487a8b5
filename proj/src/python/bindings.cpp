#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nmrbell/bell.hpp"
#include "nmrbell/circuits.hpp"
#include "nmrbell/entanglement.hpp"
#include "nmrbell/io.hpp"
#include "nmrbell/nmr.hpp"
#include "nmrbell/noise.hpp"
#include "nmrbell/pipeline.hpp"
#include "nmrbell/qstate.hpp"
#include "nmrbell/tomography.hpp"

namespace py = pybind11;
using namespace nmrbell;
using qstate::CMatrix;
using qstate::CVector;

namespace {

qstate::DensityMatrix as_density(const CMatrix& rho) {
    return qstate::DensityMatrix(rho);
}

entanglement::NegativityConvention neg_conv(const std::string& name) {
    if (name == "plain") return entanglement::NegativityConvention::Plain;
    if (name == "doubled") return entanglement::NegativityConvention::Doubled;
    throw std::invalid_argument("convention must be 'plain' or 'doubled'");
}

noise::FidelityConvention fid_conv(const std::string& name) {
    if (name == "uhlmann") return noise::FidelityConvention::Uhlmann;
    if (name == "squared") return noise::FidelityConvention::Squared;
    throw std::invalid_argument("convention must be 'uhlmann' or 'squared'");
}

}  // namespace

PYBIND11_MODULE(_nmrbell, m) {
    m.doc() = "Three-qubit Bell-violation simulator core";
    m.attr("__version__") = "1.0.0";

    m.def("reference_state",
          [](const std::string& name) {
              return CVector(circuits::reference_state(name).amplitudes());
          },
          py::arg("name"),
          "Named three-qubit state: 'S', 'GHZ', 'W' or '000'.");

    m.def("s_prep_unitary",
          [] { return CMatrix(circuits::s_prep_circuit().unitary()); },
          "Unitary of the preparation circuit.");

    m.def("s_prep_circuit_json",
          [] { return io::circuit_to_json(circuits::s_prep_circuit()); });

    m.def("s_prep_cnot_count",
          [] { return circuits::s_prep_circuit().cnot_count(); });

    m.def("pseudopure_density",
          [](double epsilon, const CVector& core) {
              return CMatrix(
                  circuits::pseudopure_density(
                      {epsilon, qstate::StateVector(core)})
                      .matrix());
          },
          py::arg("epsilon"), py::arg("core"));

    m.def("partial_trace", &qstate::partial_trace, py::arg("rho"),
          py::arg("keep"), "Keep the listed qubits (1-based, increasing).");

    m.def("partial_transpose", &qstate::partial_transpose, py::arg("rho"),
          py::arg("party"));

    m.def("state_fidelity",
          [](const CMatrix& rho, const CMatrix& sigma, bool squared) {
              double f = qstate::state_fidelity(as_density(rho), as_density(sigma));
              return squared ? f * f : f;
          },
          py::arg("rho"), py::arg("sigma"), py::arg("squared") = false);

    m.def("trace_distance",
          [](const CMatrix& rho, const CMatrix& sigma) {
              return qstate::trace_distance(as_density(rho), as_density(sigma));
          },
          py::arg("rho"), py::arg("sigma"));

    m.def("tripartite_negativity",
          [](const CMatrix& rho, const std::string& convention) {
              auto rep = entanglement::tripartite_negativity(as_density(rho),
                                                             neg_conv(convention));
              py::dict d;
              d["n_a_bc"] = rep.n1_23;
              d["n_b_ac"] = rep.n2_13;
              d["n_c_ab"] = rep.n3_12;
              d["tripartite"] = rep.tripartite;
              d["convention"] = convention;
              return d;
          },
          py::arg("rho"), py::arg("convention") = "doubled");

    m.def("concurrence",
          [](const CMatrix& rho2) {
              return entanglement::concurrence(as_density(rho2));
          },
          py::arg("rho2"));

    m.def("pairwise_concurrences",
          [](const CMatrix& rho) {
              return entanglement::pairwise_concurrences(as_density(rho));
          },
          py::arg("rho"), "Concurrences of the 12, 13, 23 marginals.");

    m.def("t26_text", [] { return bell::to_text(bell::t26()); });

    m.def("t26_quantum_maximum", &bell::t26_quantum_maximum);

    m.def("evaluate_t26",
          [](const CMatrix& rho) {
              return bell::evaluate(bell::t26(), as_density(rho),
                                    bell::MeasurementSettings::zx());
          },
          py::arg("rho"),
          "T26 value under the sigma_z / sigma_x settings.");

    m.def("classical_bound_t26", [] {
        auto cb = bell::classical_bound_bruteforce(bell::t26());
        return py::make_tuple(cb.bound, cb.achievers);
    });

    m.def("incompatibility_sweep",
          [](const CMatrix& rho, int party, int index,
             const std::vector<double>& thetas) {
              auto curve = bell::incompatibility_sweep(
                  bell::t26(), as_density(rho), bell::MeasurementSettings::zx(),
                  party, index, thetas);
              std::vector<std::pair<double, double>> out;
              for (const auto& p : curve) out.emplace_back(p.theta, p.value);
              return out;
          },
          py::arg("rho"), py::arg("party"), py::arg("index"), py::arg("thetas"));

    m.def("hamiltonian",
          [](const std::array<double, 3>& offsets_hz, double j12, double j13,
             double j23) {
              nmr::SpinSystem sys;
              sys.offsets_hz = offsets_hz;
              sys.j12_hz = j12;
              sys.j13_hz = j13;
              sys.j23_hz = j23;
              return CMatrix(nmr::hamiltonian(sys));
          },
          py::arg("offsets_hz") = std::array<double, 3>{0.0, 0.0, 0.0},
          py::arg("j12") = 69.65, py::arg("j13") = 47.67,
          py::arg("j23") = -128.23);

    m.def("cnot_pulse_unitary",
          [](int control, int target) {
              nmr::SpinSystem sys;
              auto prog = nmr::cnot_pulse_program(control, target, sys);
              return CMatrix(prog.correction.unitary() *
                             nmr::sequence_unitary(prog.events, sys));
          },
          py::arg("control"), py::arg("target"),
          "J-coupling cnot after phase correction.");

    m.def("pulse_prepared_state", [] {
        nmr::SpinSystem sys;
        auto lowered = nmr::lower_circuit(circuits::s_prep_circuit(), sys);
        CMatrix u = lowered.correction.unitary() *
                    nmr::sequence_unitary(lowered.events, sys);
        CVector ground = CVector::Zero(8);
        ground(0) = 1;
        return CVector(u * ground);
    });

    m.def("grape_optimize",
          [](const CMatrix& target, int segments, double duration,
             double max_amplitude, std::uint64_t seed, int max_iterations,
             double stop_fidelity) {
              nmr::GrapeProblem p;
              p.target = target;
              p.segments = segments;
              p.total_duration = duration;
              p.max_amplitude = max_amplitude;
              p.seed = seed;
              p.max_iterations = max_iterations;
              p.stop_fidelity = stop_fidelity;
              nmr::GrapeResult r = nmr::grape_optimize(p);
              py::dict d;
              d["controls"] = r.controls;
              d["history"] = r.history;
              d["fidelity"] = r.fidelity;
              d["converged"] = r.converged;
              return d;
          },
          py::arg("target"), py::arg("segments") = 100,
          py::arg("duration") = 1.5 / 69.65,
          py::arg("max_amplitude") = 2 * kPi * 500.0, py::arg("seed") = 0,
          py::arg("max_iterations") = 2000, py::arg("stop_fidelity") = 0.999);

    m.def("simulate_readout",
          [](const CMatrix& rho, const std::string& label, double sigma,
             std::uint64_t seed) {
              auto rec = tomography::simulate_readout(
                  as_density(rho), tomography::Setting(label), sigma, seed);
              CVector amps(12);
              for (int k = 0; k < 12; ++k) amps(k) = rec.amplitudes[k];
              return CVector(amps);
          },
          py::arg("rho"), py::arg("label"), py::arg("sigma") = 0.0,
          py::arg("seed") = 0);

    m.def("sensing_ranks",
          [](const std::vector<std::string>& labels) {
              std::vector<tomography::Setting> settings;
              for (const auto& l : labels) settings.emplace_back(l);
              auto d = tomography::sensing_matrix(settings);
              return py::make_tuple(d.rank_traceless, d.rank_with_trace);
          },
          py::arg("labels"));

    m.def("canonical_settings", [] {
        std::vector<std::string> labels;
        for (const auto& s : tomography::canonical_settings())
            labels.push_back(s.label);
        return labels;
    });

    m.def("reconstruct",
          [](const std::vector<std::pair<std::string, CVector>>& records) {
              std::vector<tomography::MeasurementRecord> recs;
              for (const auto& [label, amps] : records) {
                  if (amps.size() != 12)
                      throw std::invalid_argument("expected 12 amplitudes");
                  tomography::MeasurementRecord r{tomography::Setting(label),
                                                  {},
                                                  0.0,
                                                  0};
                  for (int k = 0; k < 12; ++k) r.amplitudes[k] = amps(k);
                  recs.push_back(std::move(r));
              }
              auto rec = tomography::reconstruct(recs);
              py::dict d;
              d["rho_hat"] = CMatrix(rec.rho_hat.matrix());
              d["residual"] = rec.residual;
              d["iterations"] = rec.iterations;
              d["converged"] = rec.converged;
              return d;
          },
          py::arg("records"),
          "records: list of (setting label, 12 complex amplitudes).");

    m.def("apply_depolarizing",
          [](const CMatrix& rho, double p) {
              return CMatrix(
                  noise::Channel::depolarizing(p).apply(as_density(rho)).matrix());
          },
          py::arg("rho"), py::arg("p"));

    m.def("apply_dephasing",
          [](const CMatrix& rho, const std::array<double, 3>& q) {
              return CMatrix(
                  noise::Channel::dephasing(q).apply(as_density(rho)).matrix());
          },
          py::arg("rho"), py::arg("q"));

    m.def("calibrate_to_fidelity",
          [](double target, const CVector& core, const std::string& kind,
             const std::string& convention) {
              noise::Channel::Kind k;
              if (kind == "depolarizing")
                  k = noise::Channel::Kind::Depolarizing;
              else if (kind == "dephasing")
                  k = noise::Channel::Kind::Dephasing;
              else
                  throw std::invalid_argument(
                      "kind must be 'depolarizing' or 'dephasing'");
              return noise::calibrate_to_fidelity(
                  target, qstate::StateVector(core), k, fid_conv(convention));
          },
          py::arg("target"), py::arg("core"), py::arg("kind") = "depolarizing",
          py::arg("convention") = "uhlmann");

    m.def("run_pipeline",
          [](const std::string& config_json) {
              auto cfg = pipeline::parse_pipeline_config(config_json);
              auto out = pipeline::run_pipeline(cfg);
              return out.report.dump(1);
          },
          py::arg("config_json"),
          "Run the full pipeline; returns the report as a JSON string.");
}
