#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "nmrbell/constants.hpp"

namespace nmrbell::qstate {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Number of qubits for a power-of-two dimension. Throws std::invalid_argument
// if dim is not a power of two or is out of range.
int qubit_count(Eigen::Index dim);

// Bit of basis index k belonging to qubit q (1-based, qubit 1 is the leftmost
// / most significant bit).
inline int bit_of(Eigen::Index k, int qubit, int n_qubits) {
    return static_cast<int>((k >> (n_qubits - qubit)) & 1);
}

// Normalized pure state. The constructor validates |norm - 1| <= tol::kNorm.
class StateVector {
  public:
    explicit StateVector(CVector amplitudes);

    const CVector& amplitudes() const { return amps_; }
    Eigen::Index dim() const { return amps_.size(); }
    int qubits() const { return n_; }
    Complex amplitude(Eigen::Index k) const { return amps_(k); }

    CMatrix density() const { return amps_ * amps_.adjoint(); }

  private:
    CVector amps_;
    int n_;
};

// Hermitian, unit-trace, PSD matrix. The constructor validates hermiticity
// (tol::kHermitian), trace (tol::kNorm) and the eigenvalue floor (-tol::kPsd).
class DensityMatrix {
  public:
    explicit DensityMatrix(CMatrix rho);
    explicit DensityMatrix(const StateVector& psi) : DensityMatrix(psi.density()) {}

    const CMatrix& matrix() const { return rho_; }
    Eigen::Index dim() const { return rho_.rows(); }
    int qubits() const { return n_; }

  private:
    CMatrix rho_;
    int n_;
};

// Hermitian observable with an optional label for reporting.
class HermitianOperator {
  public:
    explicit HermitianOperator(CMatrix m, std::string label = "");

    const CMatrix& matrix() const { return m_; }
    const std::string& label() const { return label_; }
    Eigen::Index dim() const { return m_.rows(); }

  private:
    CMatrix m_;
    std::string label_;
};

// Pauli matrices and friends.
CMatrix pauli_i();
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix identity(Eigen::Index dim);

// Kronecker product, leftmost factor = qubit 1.
CMatrix tensor(const CMatrix& a, const CMatrix& b);
CMatrix tensor(const std::vector<CMatrix>& factors);
CVector tensor(const CVector& a, const CVector& b);
CVector tensor(const std::vector<CVector>& factors);

// Embed an operator acting on `targets` (distinct, 1-based) into the n-qubit
// space, identity elsewhere. op must be 2^targets.size() dimensional; the
// order of `targets` gives the order of the op's tensor slots.
CMatrix embed(const CMatrix& op, const std::vector<int>& targets, int n_qubits);

// Partial trace keeping the listed qubits (1-based, strictly increasing
// output order follows the `keep` order which must be increasing).
CMatrix partial_trace(const CMatrix& rho, const std::vector<int>& keep);

// Partial transpose with respect to one party.
CMatrix partial_transpose(const CMatrix& rho, int party);

// Eigenvalues of a Hermitian matrix, sorted descending. Validates hermiticity
// on entry and the residuals ||M v - lambda v|| <= 1e-8 and
// |sum(lambda) - tr M| <= 1e-9 on exit.
RVector hermitian_eigenvalues(const CMatrix& m);

// Full Hermitian eigensystem (eigenvalues ascending, Eigen's order) without
// the sorted-descending convention; used internally.
void hermitian_eigensystem(const CMatrix& m, RVector& evals, CMatrix& evecs);

// tr(rho A); imaginary part must vanish within 1e-10 and is discarded.
double expectation(const CMatrix& rho, const CMatrix& a);

// Hermitian PSD square root via eigendecomposition; eigenvalues below zero
// are clipped at -tol::kPsd and floored to 0.
CMatrix psd_sqrt(const CMatrix& m);

// Uhlmann fidelity F = tr sqrt(sqrt(rho) sigma sqrt(rho)). Not squared.
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double state_fidelity_squared(const DensityMatrix& rho, const DensityMatrix& sigma);

// Trace distance 0.5 * ||rho - sigma||_1.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// Pure-state overlap |<a|b>|.
double overlap(const StateVector& a, const StateVector& b);

}  // namespace nmrbell::qstate
