#pragma once

#include <array>

#include "nmrbell/qstate.hpp"

namespace nmrbell::entanglement {

using qstate::CMatrix;
using qstate::DensityMatrix;

// Plain: sum of |negative eigenvalues| of the partial transpose.
// Doubled: twice that (equals 1 for a Bell pair). The doubled convention is
// the one used for comparison with the experimental reference value.
enum class NegativityConvention { Plain, Doubled };

// Negativity of a three-qubit state across the cut (party | rest).
double bipartite_negativity(const DensityMatrix& rho, int party,
                            NegativityConvention conv = NegativityConvention::Doubled);

struct NegativityReport {
    double n1_23 = 0.0;  // cut 1 | 23
    double n2_13 = 0.0;
    double n3_12 = 0.0;
    double tripartite = 0.0;  // geometric mean of the three
    NegativityConvention convention = NegativityConvention::Doubled;
};

NegativityReport tripartite_negativity(
    const DensityMatrix& rho,
    NegativityConvention conv = NegativityConvention::Doubled);

// Two-qubit Wootters concurrence. Eigenvalues of the spin-flipped product
// below -1e-10 are an error; small negatives are clipped to zero.
double concurrence(const DensityMatrix& rho2);

// Concurrences of the three two-qubit marginals of an 8x8 state, in the
// order (qubits 12, 13, 23).
std::array<double, 3> pairwise_concurrences(const DensityMatrix& rho);

}  // namespace nmrbell::entanglement
