#pragma once

#include <array>
#include <vector>

#include "nmrbell/qstate.hpp"

namespace nmrbell::noise {

using qstate::CMatrix;
using qstate::DensityMatrix;
using qstate::StateVector;

enum class FidelityConvention { Uhlmann, Squared };

// Parametric channels on three qubits. Depolarizing mixes toward I/8 with
// probability p; dephasing applies sigma_z per qubit with probability q_i.
// Composite applies children in order.
class Channel {
  public:
    enum class Kind { Depolarizing, Dephasing, Composite };

    static Channel depolarizing(double p);
    static Channel dephasing(double q);
    static Channel dephasing(const std::array<double, 3>& q);
    static Channel composite(std::vector<Channel> children);

    Kind kind() const { return kind_; }
    double p() const { return p_; }
    const std::array<double, 3>& q() const { return q_; }
    const std::vector<Channel>& children() const { return children_; }

    // Kraus decomposition. Completeness sum_k K^dagger K = I is validated to
    // 1e-10 at construction time. Composite channels return the composed
    // list (products of the children's operators).
    std::vector<CMatrix> kraus() const;

    DensityMatrix apply(const DensityMatrix& rho) const;

  private:
    Channel() = default;

    Kind kind_ = Kind::Depolarizing;
    double p_ = 0.0;
    std::array<double, 3> q_{0.0, 0.0, 0.0};
    std::vector<Channel> children_;
};

// Fidelity between the channel output on |core><core| and the core itself,
// under the chosen convention.
double channel_fidelity(const Channel& ch, const StateVector& core,
                        FidelityConvention conv);

// Bisection for the channel strength that reproduces a target fidelity on
// the given core state. Monotone families only (single-parameter kinds).
// Throws std::invalid_argument when the target is unreachable. Result is
// within 1e-6 of the exact parameter, never more than 60 iterations.
double calibrate_to_fidelity(double target_fidelity, const StateVector& core,
                             Channel::Kind kind, FidelityConvention conv);

}  // namespace nmrbell::noise
