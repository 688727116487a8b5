#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nmrbell/qstate.hpp"

namespace nmrbell::tomography {

using qstate::CMatrix;
using qstate::Complex;
using qstate::DensityMatrix;

// A readout setting is a per-spin pre-rotation: 'I' none, 'X' a pi/2
// rotation about x, 'Y' a pi/2 rotation about y. Label example: "XYX".
struct Setting {
    std::string label;

    explicit Setting(std::string l);
    CMatrix rotation() const;  // 8x8 unitary applied before readout
};

// The seven-setting scheme used throughout: III, IIY, IYY, YII, XYX, XXY, XXX.
std::vector<Setting> canonical_settings();

// Single-quantum readout: for the rotated state U rho U^dagger, the twelve
// complex amplitudes <1_i, s| U rho U^dagger |0_i, s> for spin i in 1..3 and
// spectator basis state s of the other two spins (s ascending, spin-major).
std::array<Complex, 12> exact_readout(const DensityMatrix& rho, const Setting& s);

struct MeasurementRecord {
    Setting setting;
    std::array<Complex, 12> amplitudes;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Readout with additive Gaussian noise of standard deviation sigma on every
// real and imaginary part, independently, from a deterministic stream.
MeasurementRecord simulate_readout(const DensityMatrix& rho, const Setting& s,
                                   double sigma, std::uint64_t seed);

// Real linear map from the 64-dimensional Hermitian parametrization to the
// stacked (Re, Im) amplitude data; 24 rows per setting.
struct SensingDesign {
    Eigen::MatrixXd matrix;
    int rank_traceless = 0;   // rank restricted to the traceless subspace
    int rank_with_trace = 0;  // rank with the unit-trace row adjoined
};
SensingDesign sensing_matrix(const std::vector<Setting>& settings);

struct Reconstruction {
    DensityMatrix rho_hat;
    double residual = 0.0;  // ||A x - b||_2 at the solution
    int iterations = 0;
    bool converged = false;
};

// Constrained least squares over the set of density matrices (unit trace,
// PSD), solved by accelerated projected gradient descent. The trace
// constraint is exact at every iterate; the stopping rule is a successive
// iterate change below 1e-10. Throws std::runtime_error when the settings
// are informationally incomplete.
Reconstruction reconstruct(const std::vector<MeasurementRecord>& records,
                           int max_iterations = 20000);

// Orthonormal Hermitian basis used by the sensing map: 8 diagonal
// projectors, then (symmetric, antisymmetric)/sqrt(2) pairs for i < j.
CMatrix hermitian_basis_element(int index);
CMatrix compose_hermitian(const Eigen::VectorXd& x);
Eigen::VectorXd decompose_hermitian(const CMatrix& m);

}  // namespace nmrbell::tomography
