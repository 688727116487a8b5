#include "nmrbell/entanglement.hpp"

#include <cmath>
#include <stdexcept>

namespace nmrbell::entanglement {

double bipartite_negativity(const DensityMatrix& rho, int party,
                            NegativityConvention conv) {
    if (rho.dim() != 8) throw std::invalid_argument("expected a three-qubit state");
    CMatrix pt = qstate::partial_transpose(rho.matrix(), party);
    qstate::RVector evals = qstate::hermitian_eigenvalues(pt);
    double neg = 0.0;
    for (Eigen::Index k = 0; k < evals.size(); ++k)
        if (evals(k) < 0) neg -= evals(k);
    return conv == NegativityConvention::Doubled ? 2.0 * neg : neg;
}

NegativityReport tripartite_negativity(const DensityMatrix& rho,
                                       NegativityConvention conv) {
    NegativityReport r;
    r.convention = conv;
    r.n1_23 = bipartite_negativity(rho, 1, conv);
    r.n2_13 = bipartite_negativity(rho, 2, conv);
    r.n3_12 = bipartite_negativity(rho, 3, conv);
    r.tripartite = std::cbrt(r.n1_23 * r.n2_13 * r.n3_12);
    return r;
}

double concurrence(const DensityMatrix& rho2) {
    if (rho2.dim() != 4) throw std::invalid_argument("expected a two-qubit state");
    const CMatrix& rho = rho2.matrix();
    CMatrix yy = qstate::tensor(qstate::pauli_y(), qstate::pauli_y());
    CMatrix flipped = yy * rho.conjugate() * yy;
    // Hermitian route: eigenvalues of rho * flipped equal those of
    // sqrt(rho) * flipped * sqrt(rho), which is Hermitian PSD.
    CMatrix sr = qstate::psd_sqrt(rho);
    CMatrix m = sr * flipped * sr;
    m = 0.5 * (m + m.adjoint().eval());
    qstate::RVector evals = qstate::hermitian_eigenvalues(m);  // descending
    for (Eigen::Index k = 0; k < evals.size(); ++k) {
        if (evals(k) < -1e-10)
            throw std::runtime_error("spin-flip spectrum has a large negative value");
        evals(k) = std::max(0.0, evals(k));
    }
    double c = std::sqrt(evals(0)) - std::sqrt(evals(1)) - std::sqrt(evals(2)) -
               std::sqrt(evals(3));
    return std::max(0.0, c);
}

std::array<double, 3> pairwise_concurrences(const DensityMatrix& rho) {
    if (rho.dim() != 8) throw std::invalid_argument("expected a three-qubit state");
    auto marginal = [&](int a, int b) {
        return DensityMatrix(qstate::partial_trace(rho.matrix(), {a, b}));
    };
    return {concurrence(marginal(1, 2)), concurrence(marginal(1, 3)),
            concurrence(marginal(2, 3))};
}

}  // namespace nmrbell::entanglement
