#pragma once

#include <string>
#include <vector>

#include "nmrbell/bell.hpp"
#include "nmrbell/circuits.hpp"
#include "nmrbell/errors.hpp"
#include "nmrbell/nmr.hpp"
#include "nmrbell/qstate.hpp"
#include "nmrbell/tomography.hpp"

namespace nmrbell::io {

using qstate::CMatrix;
using qstate::CVector;
using qstate::DensityMatrix;
using qstate::StateVector;

// 17 significant digits, fixed formatting for byte-stable output files.
std::string format_real(double v);

// State and density files share one schema: {"dim": n, "data": [[re, im],
// ...]} with matrices stored row-major. Readers validate the invariants of
// the corresponding type.
std::string state_to_json(const StateVector& psi);
std::string density_to_json(const DensityMatrix& rho);
StateVector state_from_json(const std::string& text);
DensityMatrix density_from_json(const std::string& text);

// Sniffs vector versus matrix payload by data length.
struct LoadedState {
    bool is_pure = false;
    CVector amplitudes;  // when pure
    CMatrix density;     // always filled
};
LoadedState load_state_file(const std::string& path);

std::string circuit_to_json(const circuits::Circuit& c);
circuits::Circuit circuit_from_json(const std::string& text);

std::string events_to_json(const std::vector<nmr::Event>& events);
std::vector<nmr::Event> events_from_json(const std::string& text);

std::string records_to_json(const std::vector<tomography::MeasurementRecord>& recs);
std::vector<tomography::MeasurementRecord> records_from_json(const std::string& text);

std::string reconstruction_to_json(const tomography::Reconstruction& rec);

// One row per segment, header "u1x,u1y,u2x,u2y,u3x,u3y".
std::string grape_controls_to_csv(const Eigen::MatrixXd& controls);
Eigen::MatrixXd grape_controls_from_csv(const std::string& text);

std::string sweep_to_csv(const std::vector<bell::SweepPoint>& points);

// Two CSV files <prefix>_real.csv and <prefix>_imag.csv, each 8x8 with basis
// labels 1..8 on both axes.
void emit_tomograph(const DensityMatrix& rho, const std::string& path_prefix);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace nmrbell::io
