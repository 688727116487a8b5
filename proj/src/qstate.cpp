#include "nmrbell/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmrbell::qstate {

namespace {
constexpr Complex kI{0.0, 1.0};

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

int qubit_count(Eigen::Index dim) {
    require(dim >= 2, "dimension must be at least 2");
    int n = 0;
    Eigen::Index d = dim;
    while (d > 1) {
        require(d % 2 == 0, "dimension must be a power of two");
        d /= 2;
        ++n;
    }
    return n;
}

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
    n_ = qubit_count(amps_.size());
    double defect = std::abs(amps_.norm() - 1.0);
    require(defect <= tol::kNorm, "state vector not normalized (defect " +
                                      std::to_string(defect) + ")");
}

DensityMatrix::DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {
    require(rho_.rows() == rho_.cols(), "density matrix must be square");
    n_ = qubit_count(rho_.rows());
    double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    require(herm <= tol::kHermitian,
            "density matrix not Hermitian (defect " + std::to_string(herm) + ")");
    rho_ = 0.5 * (rho_ + rho_.adjoint().eval());
    double tr_defect = std::abs(rho_.trace() - Complex{1.0, 0.0});
    require(tr_defect <= tol::kNorm,
            "density matrix trace differs from 1 by " + std::to_string(tr_defect));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
    double min_eval = es.eigenvalues().minCoeff();
    require(min_eval >= -tol::kPsd,
            "density matrix has eigenvalue " + std::to_string(min_eval) +
                " below the PSD floor");
}

HermitianOperator::HermitianOperator(CMatrix m, std::string label)
    : m_(std::move(m)), label_(std::move(label)) {
    require(m_.rows() == m_.cols(), "operator must be square");
    double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    require(herm <= tol::kHermitian,
            "operator not Hermitian (defect " + std::to_string(herm) + ")");
    m_ = 0.5 * (m_ + m_.adjoint().eval());
}

CMatrix pauli_i() { return CMatrix::Identity(2, 2); }

CMatrix pauli_x() {
    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

CMatrix pauli_y() {
    CMatrix y(2, 2);
    y << 0, -kI, kI, 0;
    return y;
}

CMatrix pauli_z() {
    CMatrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix tensor(const std::vector<CMatrix>& factors) {
    require(!factors.empty(), "tensor of zero factors");
    CMatrix out = factors.front();
    for (size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
    return out;
}

CVector tensor(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

CVector tensor(const std::vector<CVector>& factors) {
    require(!factors.empty(), "tensor of zero factors");
    CVector out = factors.front();
    for (size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
    return out;
}

CMatrix embed(const CMatrix& op, const std::vector<int>& targets, int n_qubits) {
    require(op.rows() == op.cols(), "embedded operator must be square");
    const int m = static_cast<int>(targets.size());
    require(m >= 1 && m <= n_qubits, "bad target count");
    require(op.rows() == (Eigen::Index{1} << m), "operator dimension mismatch");
    for (int t : targets) {
        require(t >= 1 && t <= n_qubits, "target out of range");
        require(std::count(targets.begin(), targets.end(), t) == 1,
                "duplicate target");
    }
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    CMatrix out = CMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            bool spectators_match = true;
            for (int q = 1; q <= n_qubits; ++q) {
                bool is_target =
                    std::find(targets.begin(), targets.end(), q) != targets.end();
                if (!is_target && bit_of(i, q, n_qubits) != bit_of(j, q, n_qubits)) {
                    spectators_match = false;
                    break;
                }
            }
            if (!spectators_match) continue;
            Eigen::Index iu = 0;
            Eigen::Index ju = 0;
            for (int t : targets) {
                iu = (iu << 1) | bit_of(i, t, n_qubits);
                ju = (ju << 1) | bit_of(j, t, n_qubits);
            }
            out(i, j) = op(iu, ju);
        }
    }
    return out;
}

CMatrix partial_trace(const CMatrix& rho, const std::vector<int>& keep) {
    require(rho.rows() == rho.cols(), "partial trace needs a square matrix");
    const int n = qubit_count(rho.rows());
    require(!keep.empty() && static_cast<int>(keep.size()) < n,
            "keep set must be a proper nonempty subset");
    for (size_t i = 0; i < keep.size(); ++i) {
        require(keep[i] >= 1 && keep[i] <= n, "kept qubit out of range");
        if (i > 0) require(keep[i] > keep[i - 1], "keep list must be increasing");
    }
    std::vector<int> traced;
    for (int q = 1; q <= n; ++q)
        if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);

    const int nk = static_cast<int>(keep.size());
    const int nt = static_cast<int>(traced.size());
    const Eigen::Index dk = Eigen::Index{1} << nk;
    const Eigen::Index dt = Eigen::Index{1} << nt;
    CMatrix out = CMatrix::Zero(dk, dk);

    auto full_index = [&](Eigen::Index kept_bits, Eigen::Index traced_bits) {
        Eigen::Index idx = 0;
        for (int q = 1; q <= n; ++q) {
            int bit;
            auto it = std::find(keep.begin(), keep.end(), q);
            if (it != keep.end()) {
                int pos = static_cast<int>(it - keep.begin());
                bit = static_cast<int>((kept_bits >> (nk - 1 - pos)) & 1);
            } else {
                auto jt = std::find(traced.begin(), traced.end(), q);
                int pos = static_cast<int>(jt - traced.begin());
                bit = static_cast<int>((traced_bits >> (nt - 1 - pos)) & 1);
            }
            idx = (idx << 1) | bit;
        }
        return idx;
    };

    for (Eigen::Index a = 0; a < dk; ++a)
        for (Eigen::Index b = 0; b < dk; ++b) {
            Complex sum = 0;
            for (Eigen::Index t = 0; t < dt; ++t)
                sum += rho(full_index(a, t), full_index(b, t));
            out(a, b) = sum;
        }
    return out;
}

CMatrix partial_transpose(const CMatrix& rho, int party) {
    require(rho.rows() == rho.cols(), "partial transpose needs a square matrix");
    const int n = qubit_count(rho.rows());
    require(party >= 1 && party <= n, "party out of range");
    const Eigen::Index dim = rho.rows();
    CMatrix out(dim, dim);
    const Eigen::Index mask = Eigen::Index{1} << (n - party);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            Eigen::Index ii = (i & ~mask) | (j & mask);
            Eigen::Index jj = (j & ~mask) | (i & mask);
            out(ii, jj) = rho(i, j);
        }
    return out;
}

void hermitian_eigensystem(const CMatrix& m, RVector& evals, CMatrix& evecs) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed to converge");
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
}

RVector hermitian_eigenvalues(const CMatrix& m) {
    require(m.rows() == m.cols(), "eigenvalues need a square matrix");
    double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    require(herm <= tol::kHermitian,
            "matrix not Hermitian (defect " + std::to_string(herm) + ")");
    RVector evals;
    CMatrix evecs;
    hermitian_eigensystem(m, evals, evecs);
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < evals.size(); ++k) {
        double resid = (m * evecs.col(k) - evals(k) * evecs.col(k)).norm();
        if (resid > 1e-8 * scale)
            throw std::runtime_error("eigenpair residual above tolerance");
    }
    if (std::abs(evals.sum() - m.trace().real()) > 1e-9 * scale)
        throw std::runtime_error("eigenvalue sum disagrees with trace");
    std::sort(evals.begin(), evals.end(), std::greater<double>());
    return evals;
}

double expectation(const CMatrix& rho, const CMatrix& a) {
    require(rho.rows() == rho.cols() && a.rows() == a.cols(),
            "expectation needs square matrices");
    require(rho.rows() == a.rows(), "dimension mismatch");
    Complex v = (rho * a).trace();
    if (std::abs(v.imag()) > 1e-10)
        throw std::runtime_error("expectation value has imaginary part " +
                                 std::to_string(v.imag()));
    return v.real();
}

CMatrix psd_sqrt(const CMatrix& m) {
    RVector evals;
    CMatrix evecs;
    hermitian_eigensystem(m, evals, evecs);
    if (evals.minCoeff() < -tol::kPsd)
        throw std::invalid_argument("matrix is not PSD within tolerance");
    RVector root = evals.cwiseMax(0.0).cwiseSqrt();
    return evecs * root.asDiagonal() * evecs.adjoint();
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require(rho.dim() == sigma.dim(), "dimension mismatch");
    CMatrix sr = psd_sqrt(rho.matrix());
    CMatrix inner = sr * sigma.matrix() * sr;
    inner = 0.5 * (inner + inner.adjoint().eval());
    RVector evals;
    CMatrix evecs;
    hermitian_eigensystem(inner, evals, evecs);
    double f = 0;
    for (Eigen::Index k = 0; k < evals.size(); ++k) {
        double v = evals(k);
        if (v < -tol::kPsd)
            throw std::runtime_error("fidelity inner matrix not PSD");
        f += std::sqrt(std::max(0.0, v));
    }
    if (f > 1.0 + 1e-6)
        throw std::runtime_error("fidelity exceeds 1 beyond roundoff");
    return std::min(f, 1.0);
}

double state_fidelity_squared(const DensityMatrix& rho, const DensityMatrix& sigma) {
    double f = state_fidelity(rho, sigma);
    return f * f;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require(rho.dim() == sigma.dim(), "dimension mismatch");
    RVector evals = hermitian_eigenvalues(rho.matrix() - sigma.matrix());
    return 0.5 * evals.cwiseAbs().sum();
}

double overlap(const StateVector& a, const StateVector& b) {
    require(a.dim() == b.dim(), "dimension mismatch");
    return std::abs(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace nmrbell::qstate
