#pragma once

#include <string>
#include <vector>

#include "nmrbell/qstate.hpp"

namespace nmrbell::circuits {

using qstate::CMatrix;
using qstate::Complex;
using qstate::CVector;
using qstate::DensityMatrix;
using qstate::StateVector;

enum class Axis { X, Y, Z };

// Single-qubit rotation exp(-i angle sigma_axis / 2).
CMatrix rotation_matrix(Axis axis, double angle);

struct Gate {
    enum class Kind { Rotation, Cnot, Custom };

    Kind kind;
    Axis axis = Axis::Z;            // rotations only
    double angle = 0.0;             // rotations only
    std::vector<int> targets;       // one qubit for rotations, {control, target} for cnot
    CMatrix matrix;                 // custom only, validated unitary

    static Gate rotation(Axis axis, double angle, int qubit);
    static Gate cnot(int control, int target);
    static Gate custom(CMatrix unitary, std::vector<int> targets);

    // Unitary on the full n-qubit register.
    CMatrix embedded_unitary(int n_qubits) const;
};

class Circuit {
  public:
    explicit Circuit(int n_qubits);

    Circuit& add(Gate g);
    const std::vector<Gate>& gates() const { return gates_; }
    int qubits() const { return n_; }
    int cnot_count() const;

    // Product of the gate unitaries, first gate applied first.
    CMatrix unitary() const;

    // Apply to a state (default |0...0>).
    StateVector apply(const StateVector& in) const;
    DensityMatrix apply(const DensityMatrix& in) const;
    StateVector apply_to_ground() const;

  private:
    int n_;
    std::vector<Gate> gates_;
};

// Target state (1/sqrt 6)(|001> + |010> - |100>) + (1/sqrt 2)|111>.
StateVector s_state();

// Named three-qubit reference states: "S", "GHZ", "W", "000".
StateVector reference_state(const std::string& name);

// Exact preparation circuit for s_state() from |000>: one y rotation on
// qubit 1, a uniformly controlled y rotation on qubit 2 (synthesized as
// ry/cnot/ry/cnot), two entangling cnots, and one x flip on qubit 3.
// apply_to_ground() matches s_state() up to global phase.
Circuit s_prep_circuit();

// Pseudopure mixture (1-epsilon)/dim * I + epsilon |core><core|.
struct PseudopureSpec {
    double epsilon;
    StateVector core;
};
DensityMatrix pseudopure_density(const PseudopureSpec& spec);

}  // namespace nmrbell::circuits
