#include "nmrbell/circuits.hpp"

#include <cmath>
#include <stdexcept>

namespace nmrbell::circuits {

namespace {
constexpr Complex kI{0.0, 1.0};
}

CMatrix rotation_matrix(Axis axis, double angle) {
    CMatrix sigma;
    switch (axis) {
        case Axis::X: sigma = qstate::pauli_x(); break;
        case Axis::Y: sigma = qstate::pauli_y(); break;
        case Axis::Z: sigma = qstate::pauli_z(); break;
        default: throw std::invalid_argument("bad axis");
    }
    double c = std::cos(angle / 2);
    double s = std::sin(angle / 2);
    return c * qstate::identity(2) - kI * s * sigma;
}

Gate Gate::rotation(Axis axis, double angle, int qubit) {
    Gate g;
    g.kind = Kind::Rotation;
    g.axis = axis;
    g.angle = angle;
    g.targets = {qubit};
    return g;
}

Gate Gate::cnot(int control, int target) {
    if (control == target)
        throw std::invalid_argument("cnot control equals target");
    Gate g;
    g.kind = Kind::Cnot;
    g.targets = {control, target};
    return g;
}

Gate Gate::custom(CMatrix unitary, std::vector<int> targets) {
    if (unitary.rows() != unitary.cols())
        throw std::invalid_argument("custom gate must be square");
    if (unitary.rows() != (Eigen::Index{1} << targets.size()))
        throw std::invalid_argument("custom gate dimension mismatch");
    CMatrix defect = unitary.adjoint() * unitary -
                     qstate::identity(unitary.rows());
    if (defect.cwiseAbs().maxCoeff() > tol::kUnitary)
        throw std::invalid_argument("custom gate is not unitary");
    Gate g;
    g.kind = Kind::Custom;
    g.matrix = std::move(unitary);
    g.targets = std::move(targets);
    return g;
}

CMatrix Gate::embedded_unitary(int n_qubits) const {
    if (kind == Kind::Rotation)
        return qstate::embed(rotation_matrix(axis, angle), targets, n_qubits);
    if (kind == Kind::Custom) return qstate::embed(matrix, targets, n_qubits);
    CMatrix cnot = CMatrix::Zero(4, 4);
    cnot(0, 0) = 1;
    cnot(1, 1) = 1;
    cnot(2, 3) = 1;
    cnot(3, 2) = 1;
    return qstate::embed(cnot, targets, n_qubits);
}

Circuit::Circuit(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 10)
        throw std::invalid_argument("unsupported qubit count");
}

Circuit& Circuit::add(Gate g) {
    for (int t : g.targets)
        if (t < 1 || t > n_)
            throw std::invalid_argument("gate target out of range");
    gates_.push_back(std::move(g));
    return *this;
}

int Circuit::cnot_count() const {
    int c = 0;
    for (const auto& g : gates_)
        if (g.kind == Gate::Kind::Cnot) ++c;
    return c;
}

CMatrix Circuit::unitary() const {
    const Eigen::Index dim = Eigen::Index{1} << n_;
    CMatrix u = CMatrix::Identity(dim, dim);
    for (const auto& g : gates_) u = g.embedded_unitary(n_) * u;
    return u;
}

StateVector Circuit::apply(const StateVector& in) const {
    if (in.qubits() != n_) throw std::invalid_argument("state size mismatch");
    return StateVector(unitary() * in.amplitudes());
}

DensityMatrix Circuit::apply(const DensityMatrix& in) const {
    if (in.qubits() != n_) throw std::invalid_argument("state size mismatch");
    CMatrix u = unitary();
    return DensityMatrix(u * in.matrix() * u.adjoint());
}

StateVector Circuit::apply_to_ground() const {
    const Eigen::Index dim = Eigen::Index{1} << n_;
    CVector ground = CVector::Zero(dim);
    ground(0) = 1;
    return StateVector(unitary() * ground);
}

StateVector s_state() {
    CVector v = CVector::Zero(8);
    const double a = 1.0 / std::sqrt(6.0);
    v(1) = a;                      // |001>
    v(2) = a;                      // |010>
    v(4) = -a;                     // |100>
    v(7) = 1.0 / std::sqrt(2.0);   // |111>
    return StateVector(v);
}

StateVector reference_state(const std::string& name) {
    if (name == "S") return s_state();
    CVector v = CVector::Zero(8);
    if (name == "GHZ") {
        v(0) = 1.0 / std::sqrt(2.0);
        v(7) = 1.0 / std::sqrt(2.0);
    } else if (name == "W") {
        const double a = 1.0 / std::sqrt(3.0);
        v(1) = a;
        v(2) = a;
        v(4) = a;
    } else if (name == "000") {
        v(0) = 1;
    } else {
        throw std::invalid_argument("unknown reference state: " + name);
    }
    return StateVector(v);
}

Circuit s_prep_circuit() {
    // Angles for the uniformly controlled y rotation on qubit 2: psi for
    // control 0, phi for control 1, realized as ry((psi+phi)/2), cnot,
    // ry((psi-phi)/2), cnot.
    const double theta1 = 2.0 * std::acos(1.0 / std::sqrt(3.0));
    const double psi = kPi / 2;
    const double phi = 4.0 * kPi / 3;
    Circuit c(3);
    c.add(Gate::rotation(Axis::Y, theta1, 1))
        .add(Gate::rotation(Axis::Y, (psi + phi) / 2, 2))
        .add(Gate::cnot(1, 2))
        .add(Gate::rotation(Axis::Y, (psi - phi) / 2, 2))
        .add(Gate::cnot(1, 2))
        .add(Gate::cnot(2, 3))
        .add(Gate::cnot(1, 3))
        .add(Gate::rotation(Axis::X, kPi, 3));
    return c;
}

DensityMatrix pseudopure_density(const PseudopureSpec& spec) {
    if (spec.epsilon < 0.0 || spec.epsilon > 1.0)
        throw std::invalid_argument("epsilon must lie in [0, 1]");
    const Eigen::Index dim = spec.core.dim();
    CMatrix rho = (1.0 - spec.epsilon) / static_cast<double>(dim) *
                      qstate::identity(dim) +
                  spec.epsilon * spec.core.density();
    return DensityMatrix(rho);
}

}  // namespace nmrbell::circuits
