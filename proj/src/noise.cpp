#include "nmrbell/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace nmrbell::noise {

namespace {

void check_probability(double p, const char* what) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

void check_completeness(const std::vector<CMatrix>& ops) {
    CMatrix sum = CMatrix::Zero(8, 8);
    for (const auto& k : ops) sum += k.adjoint() * k;
    if ((sum - qstate::identity(8)).cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("Kraus completeness violated");
}

}  // namespace

Channel Channel::depolarizing(double p) {
    check_probability(p, "depolarizing p");
    Channel c;
    c.kind_ = Kind::Depolarizing;
    c.p_ = p;
    check_completeness(c.kraus());
    return c;
}

Channel Channel::dephasing(double q) { return dephasing(std::array<double, 3>{q, q, q}); }

Channel Channel::dephasing(const std::array<double, 3>& q) {
    for (double qi : q) check_probability(qi, "dephasing q");
    Channel c;
    c.kind_ = Kind::Dephasing;
    c.q_ = q;
    check_completeness(c.kraus());
    return c;
}

Channel Channel::composite(std::vector<Channel> children) {
    if (children.empty())
        throw std::invalid_argument("composite channel needs children");
    Channel c;
    c.kind_ = Kind::Composite;
    c.children_ = std::move(children);
    check_completeness(c.kraus());
    return c;
}

std::vector<CMatrix> Channel::kraus() const {
    std::vector<CMatrix> ops;
    switch (kind_) {
        case Kind::Depolarizing: {
            // (1-p) rho + p I/8 written as the uniform Pauli twirl: the
            // identity operator keeps weight 1 - 63p/64, each of the other
            // 63 Pauli words gets p/64.
            std::array<CMatrix, 4> paulis{qstate::pauli_i(), qstate::pauli_x(),
                                          qstate::pauli_y(), qstate::pauli_z()};
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int c = 0; c < 4; ++c) {
                        double weight = (a == 0 && b == 0 && c == 0)
                                            ? 1.0 - p_ + p_ / 64.0
                                            : p_ / 64.0;
                        CMatrix word = qstate::tensor(
                            qstate::tensor(paulis[a], paulis[b]), paulis[c]);
                        ops.push_back(std::sqrt(weight) * word);
                    }
            break;
        }
        case Kind::Dephasing: {
            ops.push_back(qstate::identity(8));
            for (int spin = 1; spin <= 3; ++spin) {
                std::vector<CMatrix> next;
                CMatrix z = qstate::embed(qstate::pauli_z(), {spin}, 3);
                double q = q_[spin - 1];
                for (const auto& k : ops) {
                    next.push_back(std::sqrt(1.0 - q) * k);
                    next.push_back(std::sqrt(q) * (z * k));
                }
                ops = std::move(next);
            }
            break;
        }
        case Kind::Composite: {
            ops.push_back(qstate::identity(8));
            for (const auto& child : children_) {
                std::vector<CMatrix> next;
                for (const auto& ck : child.kraus())
                    for (const auto& k : ops) next.push_back(ck * k);
                ops = std::move(next);
            }
            break;
        }
    }
    return ops;
}

DensityMatrix Channel::apply(const DensityMatrix& rho) const {
    if (rho.dim() != 8) throw std::invalid_argument("expected a three-qubit state");
    if (kind_ == Kind::Composite) {
        DensityMatrix out = rho;
        for (const auto& child : children_) out = child.apply(out);
        return out;
    }
    CMatrix acc = CMatrix::Zero(8, 8);
    for (const auto& k : kraus()) acc += k * rho.matrix() * k.adjoint();
    return DensityMatrix(acc);
}

double channel_fidelity(const Channel& ch, const StateVector& core,
                        FidelityConvention conv) {
    DensityMatrix pure(core);
    DensityMatrix out = ch.apply(pure);
    double f = qstate::state_fidelity(out, pure);
    return conv == FidelityConvention::Squared ? f * f : f;
}

double calibrate_to_fidelity(double target_fidelity, const StateVector& core,
                             Channel::Kind kind, FidelityConvention conv) {
    auto make = [&](double p) {
        switch (kind) {
            case Channel::Kind::Depolarizing: return Channel::depolarizing(p);
            case Channel::Kind::Dephasing: return Channel::dephasing(p);
            default:
                throw std::invalid_argument(
                    "calibration needs a single-parameter channel kind");
        }
    };
    // Dephasing fidelity is symmetric about q = 0.5 (full phase scrambling);
    // restrict to the monotone branch.
    const double p_max = kind == Channel::Kind::Dephasing ? 0.5 : 1.0;
    double f_lo = channel_fidelity(make(0.0), core, conv);  // strongest fidelity
    double f_hi = channel_fidelity(make(p_max), core, conv);
    if (target_fidelity > f_lo + 1e-12 || target_fidelity < f_hi - 1e-12)
        throw std::invalid_argument("target fidelity unreachable in this family");
    double lo = 0.0;
    double hi = p_max;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double f = channel_fidelity(make(mid), core, conv);
        if (f > target_fidelity)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-7) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace nmrbell::noise
