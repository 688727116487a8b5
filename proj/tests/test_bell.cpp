#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "nmrbell/bell.hpp"
#include "nmrbell/circuits.hpp"
#include "nmrbell/qstate.hpp"
#include "oracles.hpp"

using namespace nmrbell;
using bell::BellFunctional;
using bell::MeasurementSettings;
using bell::TermKey;
using qstate::CMatrix;
using qstate::Complex;
using qstate::CVector;
using qstate::DensityMatrix;
using qstate::StateVector;

namespace {

double substitute(const BellFunctional& f, const std::array<int, 6>& v) {
    double value = 0.0;
    for (const auto& [key, coeff] : f.terms) {
        int prod = 1;
        if (key.a >= 0) prod *= v[key.a];
        if (key.b >= 0) prod *= v[2 + key.b];
        if (key.c >= 0) prod *= v[4 + key.c];
        value += coeff * prod;
    }
    return value;
}

std::vector<oracle::OracleTerm> as_oracle_terms(const BellFunctional& f) {
    std::vector<oracle::OracleTerm> out;
    for (const auto& [key, coeff] : f.terms)
        out.push_back({key.a, key.b, key.c, static_cast<double>(coeff)});
    return out;
}

std::array<std::array<Eigen::Matrix2cd, 2>, 3> zx_oracle_settings() {
    std::array<std::array<Eigen::Matrix2cd, 2>, 3> obs;
    for (int p = 0; p < 3; ++p) {
        obs[p][0] = Eigen::Matrix2cd(qstate::pauli_z());
        obs[p][1] = Eigen::Matrix2cd(qstate::pauli_x());
    }
    return obs;
}

BellFunctional chsh() {
    BellFunctional f;
    f.name = "CHSH";
    f.bound = 2.0;
    f.terms[{0, 0, -1}] = 1;
    f.terms[{0, 1, -1}] = 1;
    f.terms[{1, 0, -1}] = 1;
    f.terms[{1, 1, -1}] = -1;
    return f;
}

}  // namespace

TEST_CASE("term labels") {
    CHECK(TermKey{0, -1, -1}.label() == "A_0");
    CHECK(TermKey{1, 1, -1}.label() == "A_1*B_1");
    CHECK(TermKey{0, 1, 1}.label() == "A_0*B_1*C_1");
    CHECK(TermKey{-1, -1, 0}.label() == "C_0");
    CHECK(TermKey{-1, -1, -1}.label() == "1");
}

TEST_CASE("prepared state reaches the quantum maximum") {
    DensityMatrix s{circuits::s_state()};
    double value = bell::evaluate(bell::t26(), s, MeasurementSettings::zx());
    CHECK(value == doctest::Approx(1.0 + 4.0 * std::sqrt(3.0)).epsilon(1e-9));
    CHECK(value == doctest::Approx(bell::t26_quantum_maximum()).epsilon(1e-9));
    CHECK(value > bell::t26().bound);
}

TEST_CASE("evaluate agrees with the naive per-term route") {
    auto obs = zx_oracle_settings();
    auto terms = as_oracle_terms(bell::t26());
    DensityMatrix s{circuits::s_state()};
    CHECK(bell::evaluate(bell::t26(), s, MeasurementSettings::zx()) ==
          doctest::Approx(oracle::bell_value(s.matrix(), obs, terms)).epsilon(1e-12));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Eigen::MatrixXcd rho = oracle::random_density(8, 30 + seed);
        CHECK(bell::evaluate(bell::t26(), DensityMatrix{CMatrix(rho)},
                             MeasurementSettings::zx()) ==
              doctest::Approx(oracle::bell_value(rho, obs, terms)).epsilon(1e-12));
    }
}

TEST_CASE("enumerated classical bound") {
    bell::ClassicalBound cb = bell::classical_bound_bruteforce(bell::t26());
    CHECK(cb.bound == 5.0);
    CHECK(cb.bound == doctest::Approx(bell::t26().bound));
    CHECK(cb.achievers.size() == 32);
    for (const auto& v : cb.achievers)
        CHECK(substitute(bell::t26(), v) == doctest::Approx(5.0));
    // achievers are reported in ascending enumeration order
    for (size_t i = 1; i < cb.achievers.size(); ++i)
        CHECK(cb.achievers[i - 1] < cb.achievers[i]);
}

TEST_CASE("functional operator spectrum certifies the maximum") {
    CMatrix op = bell::functional_operator(bell::t26(), MeasurementSettings::zx());
    CHECK((op - op.adjoint()).norm() < 1e-12);
    qstate::RVector evals = qstate::hermitian_eigenvalues(op);
    CHECK(evals(0) == doctest::Approx(1.0 + 4.0 * std::sqrt(3.0)).epsilon(1e-9));
    std::vector<double> jac = oracle::eigenvalues(op);
    CHECK(jac[0] == doctest::Approx(evals(0)).epsilon(1e-10));

    qstate::RVector all;
    CMatrix vecs;
    qstate::hermitian_eigensystem(op, all, vecs);
    CVector top = vecs.col(7);  // ascending order
    CHECK(std::abs(top.dot(circuits::s_state().amplitudes())) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("chsh embeds as a two-party functional") {
    BellFunctional f = chsh();
    bell::ClassicalBound cb = bell::classical_bound_bruteforce(f);
    CHECK(cb.bound == 2.0);

    CVector v = CVector::Zero(8);
    v(0) = 1.0 / std::sqrt(2.0);  // (|00> + |11>) on qubits 1,2
    v(6) = 1.0 / std::sqrt(2.0);
    DensityMatrix rho{StateVector{v}};

    MeasurementSettings m = MeasurementSettings::zx();
    const double r = 1.0 / std::sqrt(2.0);
    m.observables[1][0] = r * (qstate::pauli_z() + qstate::pauli_x());
    m.observables[1][1] = r * (qstate::pauli_z() - qstate::pauli_x());
    CHECK(bell::evaluate(f, rho, m) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("product states never violate") {
    BellFunctional f = bell::t26();
    MeasurementSettings m = MeasurementSettings::zx();
    for (int k = 0; k < 8; ++k) {
        CVector v = CVector::Zero(8);
        v(k) = 1.0;
        CHECK(bell::evaluate(f, DensityMatrix{StateVector{v}}, m) <= 5.0 + 1e-9);
    }
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CVector> qubits;
        for (int q = 0; q < 3; ++q) {
            CVector one(2);
            double t = ang(gen), ph = 2 * ang(gen);
            one << std::cos(t / 2), std::sin(t / 2) * std::exp(Complex(0.0, ph));
            qubits.push_back(one);
        }
        StateVector prod{qstate::tensor(qubits)};
        CHECK(bell::evaluate(f, DensityMatrix{prod}, m) <= 5.0 + 1e-9);
    }
}

TEST_CASE("settings validation") {
    MeasurementSettings bad = MeasurementSettings::zx();
    bad.observables[0][1] = 0.5 * qstate::pauli_x();
    DensityMatrix s{circuits::s_state()};
    CHECK_THROWS_AS(bell::evaluate(bell::t26(), s, bad), std::invalid_argument);

    MeasurementSettings skew = MeasurementSettings::zx();
    skew.observables[2][0] = Complex(0.0, 1.0) * qstate::pauli_x();
    CHECK_THROWS_AS(bell::evaluate(bell::t26(), s, skew), std::invalid_argument);

    Eigen::MatrixXcd rho4 = oracle::random_density(4, 2);
    CHECK_THROWS_AS(bell::evaluate(bell::t26(), DensityMatrix{CMatrix(rho4)},
                                   MeasurementSettings::zx()),
                    std::invalid_argument);

    BellFunctional empty;
    empty.bound = 1.0;
    CHECK_THROWS_AS(bell::evaluate(empty, s, MeasurementSettings::zx()),
                    std::invalid_argument);
}

TEST_CASE("incompatibility sweep follows the sine curve") {
    DensityMatrix s{circuits::s_state()};
    std::vector<double> thetas;
    for (int k = 0; k <= 24; ++k) thetas.push_back(kPi * k / 24);
    std::vector<bell::SweepPoint> curve = bell::incompatibility_sweep(
        bell::t26(), s, MeasurementSettings::zx(), 0, 1, thetas);
    REQUIRE(curve.size() == thetas.size());
    const double base = 1.0 + 4.0 / std::sqrt(3.0);
    const double swing = 8.0 / std::sqrt(3.0);
    for (const auto& pt : curve)
        CHECK(pt.value == doctest::Approx(base + swing * std::sin(pt.theta)).epsilon(1e-9));

    CHECK(curve.front().value == doctest::Approx(3.3094010767585034).epsilon(1e-9));
    CHECK(curve[12].value == doctest::Approx(bell::t26_quantum_maximum()).epsilon(1e-9));
    CHECK(curve.front().value < curve[12].value - 1.0);

    CHECK_THROWS_AS(bell::incompatibility_sweep(bell::t26(), s,
                                                MeasurementSettings::zx(), 3, 0, thetas),
                    std::invalid_argument);
    CHECK_THROWS_AS(bell::incompatibility_sweep(bell::t26(), s,
                                                MeasurementSettings::zx(), 0, 2, thetas),
                    std::invalid_argument);
}

TEST_CASE("pseudopure value scales linearly with epsilon") {
    const double eps = 1e-5;
    circuits::PseudopureSpec spec{eps, circuits::s_state()};
    bell::PseudopureValue v =
        bell::pps_scaled_evaluate(bell::t26(), spec, MeasurementSettings::zx());
    CHECK(v.renormalized == doctest::Approx(bell::t26_quantum_maximum()).epsilon(1e-9));
    CHECK(v.raw == doctest::Approx(eps * v.renormalized).epsilon(1e-9));
}

TEST_CASE("text round trip") {
    BellFunctional f = bell::t26();
    std::string text = bell::to_text(f);
    BellFunctional g = bell::from_text(text);
    CHECK(g.bound == f.bound);
    REQUIRE(g.terms.size() == f.terms.size());
    for (const auto& [key, coeff] : f.terms) {
        REQUIRE(g.terms.count(key) == 1);
        CHECK(g.terms.at(key) == coeff);
    }
    DensityMatrix s{circuits::s_state()};
    CHECK(bell::evaluate(g, s, MeasurementSettings::zx()) ==
          doctest::Approx(bell::evaluate(f, s, MeasurementSettings::zx())).epsilon(1e-12));
}

TEST_CASE("text parser rejects malformed input") {
    CHECK_THROWS_AS(bell::from_text("1 A_0\n"), std::invalid_argument);  // no bound
    CHECK_THROWS_AS(bell::from_text("x A_0\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1.5 A_0\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1 D_0\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1 A_2\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1 A_0*A_1\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1 A_0\n1 A_0\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1 A_0 junk\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("1 A_0\nbound 2\nbound 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(bell::from_text("bound 2\n"), std::invalid_argument);
    CHECK_NOTHROW(bell::from_text("2 B_1*C_0\n\n-1 A_0\nbound 3.5\n"));
}
