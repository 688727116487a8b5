#include "nmrbell/bell.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nmrbell::bell {

std::string TermKey::label() const {
    std::string out;
    auto append = [&](char party, int idx) {
        if (idx < 0) return;
        if (!out.empty()) out += '*';
        out += party;
        out += '_';
        out += static_cast<char>('0' + idx);
    };
    append('A', a);
    append('B', b);
    append('C', c);
    return out.empty() ? "1" : out;
}

MeasurementSettings MeasurementSettings::zx() {
    MeasurementSettings m;
    for (int p = 0; p < 3; ++p) {
        m.observables[p][0] = qstate::pauli_z();
        m.observables[p][1] = qstate::pauli_x();
    }
    return m;
}

BellFunctional t26() {
    BellFunctional f;
    f.name = "T26";
    f.bound = 5.0;
    f.terms[{0, -1, -1}] = 1;   // A_0
    f.terms[{-1, 0, -1}] = 1;   // B_0
    f.terms[{0, 0, -1}] = 1;    // A_0 B_0
    f.terms[{1, 1, -1}] = 2;    // A_1 B_1
    f.terms[{-1, -1, 0}] = 1;   // C_0
    f.terms[{0, -1, 0}] = 1;    // A_0 C_0
    f.terms[{-1, 0, 0}] = 1;    // B_0 C_0
    f.terms[{0, 0, 0}] = -1;    // A_0 B_0 C_0
    f.terms[{1, 1, 0}] = -2;    // A_1 B_1 C_0
    f.terms[{1, -1, 1}] = 2;    // A_1 C_1
    f.terms[{1, 0, 1}] = -2;    // A_1 B_0 C_1
    f.terms[{-1, 1, 1}] = -2;   // B_1 C_1
    f.terms[{0, 1, 1}] = 2;     // A_0 B_1 C_1
    return f;
}

double t26_quantum_maximum() { return 1.0 + 4.0 * std::sqrt(3.0); }

namespace {

void validate_settings(const MeasurementSettings& m) {
    for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 2; ++i) {
            const CMatrix& o = m.observables[p][i];
            if (o.rows() != 2 || o.cols() != 2)
                throw std::invalid_argument("observables must be single-qubit");
            if ((o - o.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian)
                throw std::invalid_argument("observable is not Hermitian");
            CMatrix sq = o * o;
            if ((sq - qstate::identity(2)).cwiseAbs().maxCoeff() > 1e-9)
                throw std::invalid_argument("observable is not dichotomic (O^2 != I)");
        }
}

void validate_terms(const BellFunctional& f) {
    if (f.terms.empty()) throw std::invalid_argument("functional has no terms");
    for (const auto& [key, coeff] : f.terms) {
        for (int idx : {key.a, key.b, key.c})
            if (idx < -1 || idx > 1)
                throw std::invalid_argument("setting index out of range");
        if (key.a == -1 && key.b == -1 && key.c == -1)
            throw std::invalid_argument("constant term is not allowed");
        (void)coeff;
    }
}

}  // namespace

CMatrix functional_operator(const BellFunctional& f, const MeasurementSettings& m) {
    validate_terms(f);
    validate_settings(m);
    CMatrix op = CMatrix::Zero(8, 8);
    for (const auto& [key, coeff] : f.terms) {
        std::array<int, 3> idx{key.a, key.b, key.c};
        CMatrix term = CMatrix::Identity(1, 1);
        for (int p = 0; p < 3; ++p) {
            const CMatrix factor =
                idx[p] < 0 ? qstate::identity(2) : m.observables[p][idx[p]];
            term = qstate::tensor(term, factor);
        }
        op += static_cast<double>(coeff) * term;
    }
    return op;
}

double evaluate(const BellFunctional& f, const DensityMatrix& rho,
                const MeasurementSettings& m) {
    if (rho.dim() != 8) throw std::invalid_argument("expected a three-qubit state");
    return qstate::expectation(rho.matrix(), functional_operator(f, m));
}

ClassicalBound classical_bound_bruteforce(const BellFunctional& f) {
    validate_terms(f);
    ClassicalBound result;
    bool first = true;
    for (int bits = 0; bits < 64; ++bits) {
        std::array<int, 6> v;  // (a0, a1, b0, b1, c0, c1)
        for (int i = 0; i < 6; ++i) v[i] = ((bits >> (5 - i)) & 1) ? 1 : -1;
        double value = 0.0;
        for (const auto& [key, coeff] : f.terms) {
            int prod = 1;
            if (key.a >= 0) prod *= v[key.a];
            if (key.b >= 0) prod *= v[2 + key.b];
            if (key.c >= 0) prod *= v[4 + key.c];
            value += coeff * prod;
        }
        if (first || value > result.bound + 1e-12) {
            result.bound = value;
            result.achievers.clear();
            result.achievers.push_back(v);
            first = false;
        } else if (std::abs(value - result.bound) <= 1e-12) {
            result.achievers.push_back(v);
        }
    }
    return result;
}

std::vector<SweepPoint> incompatibility_sweep(const BellFunctional& f,
                                              const DensityMatrix& rho,
                                              const MeasurementSettings& base,
                                              int party, int index,
                                              const std::vector<double>& thetas) {
    if (party < 0 || party > 2) throw std::invalid_argument("party out of range");
    if (index < 0 || index > 1) throw std::invalid_argument("setting index out of range");
    std::vector<SweepPoint> out;
    out.reserve(thetas.size());
    MeasurementSettings m = base;
    for (double theta : thetas) {
        m.observables[party][index] =
            std::cos(theta) * qstate::pauli_z() + std::sin(theta) * qstate::pauli_x();
        out.push_back({theta, evaluate(f, rho, m)});
    }
    return out;
}

PseudopureValue pps_scaled_evaluate(const BellFunctional& f,
                                    const circuits::PseudopureSpec& spec,
                                    const MeasurementSettings& m) {
    PseudopureValue v;
    v.raw = evaluate(f, circuits::pseudopure_density(spec), m);
    v.renormalized = evaluate(f, DensityMatrix(spec.core), m);
    return v;
}

std::string to_text(const BellFunctional& f) {
    validate_terms(f);
    std::ostringstream os;
    os.precision(17);
    for (const auto& [key, coeff] : f.terms)
        os << coeff << ' ' << key.label() << '\n';
    os << "bound " << f.bound << '\n';
    return os.str();
}

BellFunctional from_text(const std::string& text) {
    BellFunctional f;
    bool have_bound = false;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank line
        if (first == "bound") {
            if (have_bound)
                throw std::invalid_argument("duplicate bound line");
            if (!(ls >> f.bound))
                throw std::invalid_argument("malformed bound line");
            have_bound = true;
            continue;
        }
        int coeff = 0;
        try {
            size_t used = 0;
            coeff = std::stoi(first, &used);
            if (used != first.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected an integer coefficient");
        }
        std::string label;
        if (!(ls >> label))
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": missing term label");
        std::string extra;
        if (ls >> extra)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": trailing tokens");
        TermKey key;
        std::istringstream parts(label);
        std::string part;
        while (std::getline(parts, part, '*')) {
            if (part.size() != 3 || part[1] != '_' || (part[2] != '0' && part[2] != '1'))
                throw std::invalid_argument("line " + std::to_string(lineno) +
                                            ": bad factor '" + part + "'");
            int idx = part[2] - '0';
            int* slot = nullptr;
            switch (part[0]) {
                case 'A': slot = &key.a; break;
                case 'B': slot = &key.b; break;
                case 'C': slot = &key.c; break;
                default:
                    throw std::invalid_argument("line " + std::to_string(lineno) +
                                                ": unknown party '" + part + "'");
            }
            if (*slot != -1)
                throw std::invalid_argument("line " + std::to_string(lineno) +
                                            ": repeated party in term");
            *slot = idx;
        }
        if (key.a == -1 && key.b == -1 && key.c == -1)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": empty term label");
        if (f.terms.count(key))
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": duplicate term " + key.label());
        f.terms[key] = coeff;
    }
    if (!have_bound) throw std::invalid_argument("missing bound line");
    validate_terms(f);
    return f;
}

}  // namespace nmrbell::bell
