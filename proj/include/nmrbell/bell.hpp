#pragma once

#include <array>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include "nmrbell/circuits.hpp"
#include "nmrbell/qstate.hpp"

namespace nmrbell::bell {

using qstate::CMatrix;
using qstate::DensityMatrix;

// One correlator in a three-party, two-setting scenario. A setting index of
// -1 means the party does not measure (identity); otherwise 0 or 1.
struct TermKey {
    int a = -1;
    int b = -1;
    int c = -1;

    auto operator<=>(const TermKey&) const = default;
    std::string label() const;  // e.g. "A_0*B_1" ("1" for the empty term)
};

// Integer combination of correlators with a classical bound.
struct BellFunctional {
    std::string name;
    std::map<TermKey, int> terms;
    double bound = 0.0;
};

// Dichotomic observables, two per party. settings[party][index] with
// party 0 = A (qubit 1), 1 = B, 2 = C.
struct MeasurementSettings {
    std::array<std::array<CMatrix, 2>, 3> observables;

    // A_0 = B_0 = C_0 = sigma_z, A_1 = B_1 = C_1 = sigma_x.
    static MeasurementSettings zx();
};

// The 13-term tight inequality (Sliwa's no. 26) whose maximal quantum value
// 1 + 4*sqrt(3) is reached by the state this library prepares. Classical
// bound 5.
BellFunctional t26();

// Largest quantum value of t26 over all states and dichotomic settings.
double t26_quantum_maximum();

// sum_k coeff_k tr(rho O_k) with O_k the tensor product of the chosen
// observables (identity for absent parties). Validates that every observable
// is Hermitian with +-1 spectrum.
double evaluate(const BellFunctional& f, const DensityMatrix& rho,
                const MeasurementSettings& m);

// The functional as one 8x8 Hermitian operator for fixed settings.
CMatrix functional_operator(const BellFunctional& f, const MeasurementSettings& m);

// Exhaustive maximum over the 64 deterministic +-1 assignments
// (a0, a1, b0, b1, c0, c1). Achievers are listed in ascending enumeration
// order of that tuple with -1 encoded before +1.
struct ClassicalBound {
    double bound = 0.0;
    std::vector<std::array<int, 6>> achievers;
};
ClassicalBound classical_bound_bruteforce(const BellFunctional& f);

// Replace one observable by cos(theta) sigma_z + sin(theta) sigma_x and
// evaluate across a theta grid. party in {0, 1, 2}, index in {0, 1}.
struct SweepPoint {
    double theta = 0.0;
    double value = 0.0;
};
std::vector<SweepPoint> incompatibility_sweep(const BellFunctional& f,
                                              const DensityMatrix& rho,
                                              const MeasurementSettings& base,
                                              int party, int index,
                                              const std::vector<double>& thetas);

// Value on a pseudopure mixture together with the value on the pure core.
// The identity part contributes nothing to a sum of traceless correlators,
// so raw = epsilon * renormalized; the renormalized number is what deviation
// readout reports.
struct PseudopureValue {
    double raw = 0.0;
    double renormalized = 0.0;
};
PseudopureValue pps_scaled_evaluate(const BellFunctional& f,
                                    const circuits::PseudopureSpec& spec,
                                    const MeasurementSettings& m);

// Text round-trip: one "<coeff> <label>" line per term plus "bound <value>".
std::string to_text(const BellFunctional& f);
BellFunctional from_text(const std::string& text);

}  // namespace nmrbell::bell
