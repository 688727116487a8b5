#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nmrbell/bell.hpp"
#include "nmrbell/circuits.hpp"
#include "nmrbell/noise.hpp"
#include "nmrbell/qstate.hpp"
#include "oracles.hpp"

using namespace nmrbell;
using noise::Channel;
using noise::FidelityConvention;
using qstate::CMatrix;
using qstate::Complex;
using qstate::DensityMatrix;
using qstate::StateVector;

namespace {

void check_completeness(const Channel& ch) {
    CMatrix sum = CMatrix::Zero(8, 8);
    for (const CMatrix& k : ch.kraus()) sum += k.adjoint() * k;
    CHECK((sum - qstate::identity(8)).cwiseAbs().maxCoeff() < 1e-10);
}

}  // namespace

TEST_CASE("depolarizing output is the uniform mixture") {
    DensityMatrix s{circuits::s_state()};
    for (double p : {0.0, 0.3, 1.0}) {
        DensityMatrix out = Channel::depolarizing(p).apply(s);
        CMatrix want = (1.0 - p) * s.matrix() + p / 8.0 * qstate::identity(8);
        CHECK((out.matrix() - want).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(Channel::depolarizing(0.4).kraus().size() == 64);
    check_completeness(Channel::depolarizing(0.4));
    CHECK_THROWS_AS(Channel::depolarizing(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(Channel::depolarizing(1.1), std::invalid_argument);
}

TEST_CASE("dephasing damps coherences qubit by qubit") {
    DensityMatrix s{circuits::s_state()};
    const std::array<double, 3> q{0.1, 0.25, 0.4};
    DensityMatrix out = Channel::dephasing(q).apply(s);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            double damp = 1.0;
            for (int qubit = 1; qubit <= 3; ++qubit)
                if (qstate::bit_of(r, qubit, 3) != qstate::bit_of(c, qubit, 3))
                    damp *= 1.0 - 2.0 * q[qubit - 1];
            CHECK(std::abs(out.matrix()(r, c) - damp * s.matrix()(r, c)) < 1e-12);
        }
    check_completeness(Channel::dephasing(q));
    check_completeness(Channel::dephasing(0.2));

    // q = 1/2 kills the qubit's coherences; q = 1 is the unitary z flip
    DensityMatrix dead = Channel::dephasing({0.5, 0.0, 0.0}).apply(s);
    CHECK(std::abs(dead.matrix()(4, 1)) == doctest::Approx(0.0));
    DensityMatrix flip = Channel::dephasing({1.0, 1.0, 1.0}).apply(s);
    CMatrix z3 = qstate::tensor(std::vector<CMatrix>{qstate::pauli_z(), qstate::pauli_z(), qstate::pauli_z()});
    CHECK((flip.matrix() - z3 * s.matrix() * z3).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(Channel::dephasing(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(Channel::dephasing(1.01), std::invalid_argument);
}

TEST_CASE("composite channels apply left to right") {
    DensityMatrix s{circuits::s_state()};
    Channel a = Channel::depolarizing(0.2);
    Channel b = Channel::dephasing(0.15);
    Channel both = Channel::composite({a, b});
    DensityMatrix seq = b.apply(a.apply(s));
    CHECK((both.apply(s).matrix() - seq.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    check_completeness(both);
    CHECK(both.kraus().size() == 64 * 8);
    CHECK_THROWS_AS(Channel::composite({}), std::invalid_argument);
}

TEST_CASE("channel fidelity closed forms") {
    StateVector s = circuits::s_state();
    for (double p : {0.0, 0.0583, 0.2, 0.7}) {
        double squared = 1.0 - 7.0 * p / 8.0;
        CHECK(noise::channel_fidelity(Channel::depolarizing(p), s,
                                      FidelityConvention::Squared) ==
              doctest::Approx(squared).epsilon(1e-7));
        CHECK(noise::channel_fidelity(Channel::depolarizing(p), s,
                                      FidelityConvention::Uhlmann) ==
              doctest::Approx(std::sqrt(squared)).epsilon(1e-7));
    }
    CHECK(noise::channel_fidelity(Channel::depolarizing(0.0583), s,
                                  FidelityConvention::Uhlmann) ==
          doctest::Approx(0.9741598944731814).epsilon(1e-7));
}

TEST_CASE("calibration recovers the closed-form parameters") {
    StateVector s = circuits::s_state();
    double p_sq = noise::calibrate_to_fidelity(0.949, s, Channel::Kind::Depolarizing,
                                               FidelityConvention::Squared);
    CHECK(p_sq == doctest::Approx(8.0 * (1.0 - 0.949) / 7.0).epsilon(1e-5));

    double p_uh = noise::calibrate_to_fidelity(0.949, s, Channel::Kind::Depolarizing,
                                               FidelityConvention::Uhlmann);
    CHECK(p_uh == doctest::Approx(8.0 * (1.0 - 0.949 * 0.949) / 7.0).epsilon(1e-5));
    CHECK(noise::channel_fidelity(Channel::depolarizing(p_uh), s,
                                  FidelityConvention::Uhlmann) ==
          doctest::Approx(0.949).epsilon(1e-6));
}

TEST_CASE("dephasing calibration works on the monotone branch") {
    StateVector s = circuits::s_state();
    double q = noise::calibrate_to_fidelity(0.9, s, Channel::Kind::Dephasing,
                                            FidelityConvention::Uhlmann);
    CHECK(q >= 0.0);
    CHECK(q <= 0.5);
    CHECK(noise::channel_fidelity(Channel::dephasing(q), s, FidelityConvention::Uhlmann) ==
          doctest::Approx(0.9).epsilon(1e-6));

    // the floor at q = 1/2 keeps only the diagonal, fidelity sqrt(1/3)
    CHECK(noise::channel_fidelity(Channel::dephasing(0.5), s,
                                  FidelityConvention::Uhlmann) ==
          doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-7));
    CHECK_THROWS_AS(noise::calibrate_to_fidelity(0.5, s, Channel::Kind::Dephasing,
                                                 FidelityConvention::Uhlmann),
                    std::invalid_argument);
    CHECK_THROWS_AS(noise::calibrate_to_fidelity(1.2, s, Channel::Kind::Depolarizing,
                                                 FidelityConvention::Uhlmann),
                    std::invalid_argument);
    CHECK_THROWS_AS(noise::calibrate_to_fidelity(0.9, s, Channel::Kind::Composite,
                                                 FidelityConvention::Uhlmann),
                    std::invalid_argument);
}

TEST_CASE("violation decays linearly and dies at the threshold") {
    DensityMatrix s{circuits::s_state()};
    bell::BellFunctional f = bell::t26();
    bell::MeasurementSettings m = bell::MeasurementSettings::zx();
    const double vmax = bell::t26_quantum_maximum();
    for (double p : {0.0, 0.1, 0.25, 0.3693, 0.5, 0.8, 1.0}) {
        DensityMatrix out = Channel::depolarizing(p).apply(s);
        CHECK(bell::evaluate(f, out, m) ==
              doctest::Approx((1.0 - p) * vmax).epsilon(1e-9));
    }
    const double p_star = 1.0 - 5.0 / vmax;
    CHECK(p_star == doctest::Approx(0.3693400818855841).epsilon(1e-12));
    DensityMatrix below = Channel::depolarizing(p_star - 1e-4).apply(s);
    DensityMatrix above = Channel::depolarizing(p_star + 1e-4).apply(s);
    CHECK(bell::evaluate(f, below, m) > 5.0);
    CHECK(bell::evaluate(f, above, m) < 5.0);
}
