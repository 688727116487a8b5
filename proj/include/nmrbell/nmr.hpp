#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "nmrbell/circuits.hpp"
#include "nmrbell/qstate.hpp"

namespace nmrbell::nmr {

using qstate::CMatrix;
using qstate::Complex;
using qstate::CVector;
using qstate::RVector;

// Three-spin liquid-state system in the rotating frame. Frequencies in Hz.
struct SpinSystem {
    std::array<double, 3> offsets_hz{0.0, 0.0, 0.0};  // omega_i - omega_rf, in Hz
    double j12_hz = 69.65;
    double j13_hz = 47.67;
    double j23_hz = -128.23;

    double coupling_hz(int a, int b) const;
};

// Spin operator I_iz etc. embedded in the three-spin space (sigma/2).
CMatrix spin_op(char axis, int spin);

// Rotating-frame Hamiltonian in angular units (rad/s):
//   H = -sum_i 2 pi offset_i I_iz + sum_{i<j} 2 pi J_ij I_iz I_jz.
// Diagonal in the computational basis.
CMatrix hamiltonian(const SpinSystem& sys);

// exp(-i H t) for Hermitian H.
CMatrix expm_hermitian(const CMatrix& h, double t);

enum class PulseModel { Instantaneous, Finite };

// One pulse-sequence element: either free evolution under the system
// Hamiltonian or an rf rotation. Phase 0 is the x axis, pi/2 the y axis.
struct Event {
    enum class Kind { Delay, Rf };

    Kind kind;
    double duration = 0.0;          // seconds; delays and finite pulses
    std::vector<int> targets;       // rf only
    double angle = 0.0;             // rf flip angle, radians
    double phase = 0.0;             // rf phase, radians

    static Event delay(double seconds);
    static Event rf(std::vector<int> targets, double angle, double phase,
                    double duration = 0.0);
};

CMatrix event_unitary(const Event& e, const SpinSystem& sys,
                      PulseModel model = PulseModel::Instantaneous);

CMatrix sequence_unitary(const std::vector<Event>& events, const SpinSystem& sys,
                         PulseModel model = PulseModel::Instantaneous);

// Residual local-z frame: diag_k exp(i(phase + sum_q s_q(k) angle_q / 2))
// with s_q(k) = +1 when qubit q is |0> in basis state k. Satisfies
// unitary() * achieved == target for the fit below.
struct ZCorrection {
    std::array<double, 3> angles{0.0, 0.0, 0.0};
    double phase = 0.0;

    CMatrix unitary() const;
};

// Fit target == D * achieved with D of the ZCorrection form. Throws
// std::runtime_error when the residual exceeds 1e-9.
ZCorrection fit_z_correction(const CMatrix& achieved, const CMatrix& target);

// J-coupling cnot: ry(pi/2) on the target, a refocused 1/(2|J|) evolution
// with pi pulses on the spectator spin, then rx(+-pi/2) on the target.
// Equals the embedded cnot up to the returned local-z correction.
struct PulseProgram {
    std::vector<Event> events;
    ZCorrection correction;
};
PulseProgram cnot_pulse_program(int control, int target, const SpinSystem& sys);

// Compile a gate circuit to a pulse sequence. z rotations are virtual: they
// fold into the phases of later pulses and into the trailing correction.
// correction.unitary() * sequence_unitary(events) reproduces the circuit
// unitary exactly (including global phase).
struct LoweredCircuit {
    std::vector<Event> events;
    ZCorrection correction;
};
LoweredCircuit lower_circuit(const circuits::Circuit& c, const SpinSystem& sys);

// Piecewise-constant control optimization for a three-spin target unitary.
// Controls are x/y rf amplitudes per spin in rad/s, stored as a
// segments x 6 matrix with columns (u1x, u1y, u2x, u2y, u3x, u3y).
struct GrapeProblem {
    CMatrix target;
    int segments = 100;
    double total_duration = 0.0;        // seconds
    double max_amplitude = 0.0;         // rad/s, clamp per channel
    std::uint64_t seed = 0;
    std::optional<Eigen::MatrixXd> initial_controls;  // random init when absent
    SpinSystem system;
    int max_iterations = 2000;
    double stop_fidelity = 0.999;
};

struct GrapeResult {
    Eigen::MatrixXd controls;
    std::vector<double> history;  // accepted fidelity per iteration, monotone
    double fidelity = 0.0;
    bool converged = false;
};

// Gate overlap Phi = |tr(target^dagger U(controls))|^2 / dim^2.
double grape_fidelity(const GrapeProblem& p, const Eigen::MatrixXd& controls);

// Exact gradient of grape_fidelity via the eigendecomposition of each
// segment Hamiltonian (Frechet derivative of the exponential).
Eigen::MatrixXd grape_gradient(const GrapeProblem& p,
                               const Eigen::MatrixXd& controls);

// Gradient ascent with backtracking line search. Deterministic for a fixed
// seed. Non-convergence is reported through the flag, not an exception.
GrapeResult grape_optimize(const GrapeProblem& p);

}  // namespace nmrbell::nmr
