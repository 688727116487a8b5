#include "nmrbell/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmrbell/circuits.hpp"
#include "nmrbell/rng.hpp"

namespace nmrbell::tomography {

Setting::Setting(std::string l) : label(std::move(l)) {
    if (label.size() != 3)
        throw std::invalid_argument("setting label must have three characters");
    for (char c : label)
        if (c != 'I' && c != 'X' && c != 'Y')
            throw std::invalid_argument("setting characters must be I, X or Y");
}

CMatrix Setting::rotation() const {
    std::vector<CMatrix> factors;
    for (char c : label) {
        switch (c) {
            case 'I': factors.push_back(qstate::identity(2)); break;
            case 'X':
                factors.push_back(
                    circuits::rotation_matrix(circuits::Axis::X, kPi / 2));
                break;
            case 'Y':
                factors.push_back(
                    circuits::rotation_matrix(circuits::Axis::Y, kPi / 2));
                break;
        }
    }
    return qstate::tensor(factors);
}

std::vector<Setting> canonical_settings() {
    std::vector<Setting> out;
    for (const char* l : {"III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX"})
        out.emplace_back(l);
    return out;
}

namespace {

// Basis indices (row = spin i excited, col = spin i ground) for readout slot
// m = 4 * (i - 1) + s, spectator bits s in ascending basis order.
std::pair<Eigen::Index, Eigen::Index> readout_indices(int m) {
    const int spin = m / 4 + 1;
    const int s = m % 4;
    std::array<int, 2> spectators;
    int w = 0;
    for (int q = 1; q <= 3; ++q)
        if (q != spin) spectators[w++] = q;
    Eigen::Index col = 0;
    for (int b = 0; b < 2; ++b)
        if ((s >> (1 - b)) & 1) col |= Eigen::Index{1} << (3 - spectators[b]);
    Eigen::Index row = col | (Eigen::Index{1} << (3 - spin));
    return {row, col};
}

}  // namespace

std::array<Complex, 12> exact_readout(const DensityMatrix& rho, const Setting& s) {
    if (rho.dim() != 8) throw std::invalid_argument("expected a three-qubit state");
    CMatrix u = s.rotation();
    CMatrix rotated = u * rho.matrix() * u.adjoint();
    std::array<Complex, 12> out;
    for (int m = 0; m < 12; ++m) {
        auto [row, col] = readout_indices(m);
        out[m] = rotated(row, col);
    }
    return out;
}

MeasurementRecord simulate_readout(const DensityMatrix& rho, const Setting& s,
                                   double sigma, std::uint64_t seed) {
    if (sigma < 0) throw std::invalid_argument("noise sigma must be nonnegative");
    MeasurementRecord rec{s, exact_readout(rho, s), sigma, seed};
    if (sigma > 0) {
        rng::Stream stream(seed);
        for (auto& amp : rec.amplitudes) {
            amp += Complex{sigma * stream.gaussian(), sigma * stream.gaussian()};
        }
    }
    return rec;
}

CMatrix hermitian_basis_element(int index) {
    if (index < 0 || index > 63)
        throw std::invalid_argument("basis index out of range");
    CMatrix b = CMatrix::Zero(8, 8);
    if (index < 8) {
        b(index, index) = 1.0;
        return b;
    }
    const int pair = (index - 8) / 2;
    int i = 0;
    int j = 1;
    int count = pair;
    for (i = 0; i < 8; ++i) {
        int row_pairs = 7 - i;
        if (count < row_pairs) {
            j = i + 1 + count;
            break;
        }
        count -= row_pairs;
    }
    const double r = 1.0 / std::sqrt(2.0);
    if ((index - 8) % 2 == 0) {
        b(i, j) = r;
        b(j, i) = r;
    } else {
        b(i, j) = Complex{0.0, -r};
        b(j, i) = Complex{0.0, r};
    }
    return b;
}

CMatrix compose_hermitian(const Eigen::VectorXd& x) {
    if (x.size() != 64) throw std::invalid_argument("expected 64 coordinates");
    CMatrix m = CMatrix::Zero(8, 8);
    for (int k = 0; k < 8; ++k) m(k, k) = x(k);
    const double r = 1.0 / std::sqrt(2.0);
    int idx = 8;
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) {
            const double xs = x(idx++);
            const double xa = x(idx++);
            m(i, j) = Complex{xs * r, -xa * r};
            m(j, i) = Complex{xs * r, xa * r};
        }
    return m;
}

Eigen::VectorXd decompose_hermitian(const CMatrix& m) {
    if (m.rows() != 8 || m.cols() != 8)
        throw std::invalid_argument("expected an 8x8 matrix");
    Eigen::VectorXd x(64);
    for (int k = 0; k < 8; ++k) x(k) = m(k, k).real();
    const double r = std::sqrt(2.0);
    int idx = 8;
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) {
            x(idx++) = r * m(i, j).real();
            x(idx++) = -r * m(i, j).imag();
        }
    return x;
}

namespace {

Eigen::VectorXd trace_vector() {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(64);
    t.head(8).setOnes();
    return t;
}

Eigen::MatrixXd build_sensing(const std::vector<Setting>& settings) {
    if (settings.empty()) throw std::invalid_argument("no settings given");
    Eigen::MatrixXd a(24 * settings.size(), 64);
    Eigen::Index row = 0;
    for (const auto& s : settings) {
        CMatrix u = s.rotation();
        for (int m = 0; m < 12; ++m) {
            auto [r, c] = readout_indices(m);
            CMatrix e = CMatrix::Zero(8, 8);
            e(c, r) = 1.0;  // tr(rho' |c><r|) = <r| rho' |c>
            CMatrix back = u.adjoint() * e * u;
            for (int k = 0; k < 64; ++k) {
                Complex v = (hermitian_basis_element(k) * back).trace();
                a(row, k) = v.real();
                a(row + 1, k) = v.imag();
            }
            row += 2;
        }
    }
    return a;
}

int svd_rank(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = 1e-8 * sv(0);
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++rank;
    return rank;
}

// Euclidean projection of a real vector onto the probability simplex.
Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
    Eigen::VectorXd sorted = v;
    std::sort(sorted.data(), sorted.data() + sorted.size(),
              std::greater<double>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < sorted.size(); ++k) {
        cumsum += sorted(k);
        double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (sorted(k) - candidate > 0) theta = candidate;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

// Frobenius projection onto {rho : rho PSD, tr rho = 1} via eigenvalue
// projection onto the simplex.
Eigen::VectorXd project_density(const Eigen::VectorXd& x) {
    CMatrix m = compose_hermitian(x);
    qstate::RVector evals;
    CMatrix evecs;
    qstate::hermitian_eigensystem(m, evals, evecs);
    Eigen::VectorXd lam = project_simplex(evals);
    CMatrix projected = evecs * lam.asDiagonal() * evecs.adjoint();
    return decompose_hermitian(projected);
}

}  // namespace

SensingDesign sensing_matrix(const std::vector<Setting>& settings) {
    SensingDesign d;
    d.matrix = build_sensing(settings);
    Eigen::VectorXd t = trace_vector();
    Eigen::MatrixXd traceless =
        d.matrix - (d.matrix * t) * (t.transpose() / t.squaredNorm());
    d.rank_traceless = svd_rank(traceless);
    Eigen::MatrixXd with_trace(d.matrix.rows() + 1, 64);
    with_trace.topRows(d.matrix.rows()) = d.matrix;
    with_trace.bottomRows(1) = t.transpose();
    d.rank_with_trace = svd_rank(with_trace);
    return d;
}

Reconstruction reconstruct(const std::vector<MeasurementRecord>& records,
                           int max_iterations) {
    if (records.empty()) throw std::invalid_argument("no measurement records");
    std::vector<Setting> settings;
    settings.reserve(records.size());
    for (const auto& r : records) settings.push_back(r.setting);

    Eigen::MatrixXd a = build_sensing(settings);
    Eigen::VectorXd b(24 * static_cast<Eigen::Index>(records.size()));
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(records.size()); ++r)
        for (int m = 0; m < 12; ++m) {
            b(24 * r + 2 * m) = records[r].amplitudes[m].real();
            b(24 * r + 2 * m + 1) = records[r].amplitudes[m].imag();
        }

    Eigen::VectorXd t = trace_vector();
    {
        Eigen::MatrixXd with_trace(a.rows() + 1, 64);
        with_trace.topRows(a.rows()) = a;
        with_trace.bottomRows(1) = t.transpose();
        if (svd_rank(with_trace) < 64)
            throw std::runtime_error(
                "settings are informationally incomplete for reconstruction");
    }

    // Trace-constrained unconstrained least squares as a warm start.
    Eigen::MatrixXd ata = a.transpose() * a;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(65, 65);
    kkt.topLeftCorner(64, 64) = 2.0 * ata;
    kkt.topRightCorner(64, 1) = t;
    kkt.bottomLeftCorner(1, 64) = t.transpose();
    Eigen::VectorXd rhs(65);
    rhs.head(64) = 2.0 * a.transpose() * b;
    rhs(64) = 1.0;
    Eigen::VectorXd x = kkt.fullPivLu().solve(rhs).head(64);
    x = project_density(x);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ata, Eigen::EigenvaluesOnly);
    const double step = 1.0 / (2.0 * es.eigenvalues().maxCoeff());

    Reconstruction out{DensityMatrix(compose_hermitian(x)), 0.0, 0, false};
    Eigen::VectorXd y = x;
    double tk = 1.0;
    const double kStop = 1e-10;
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd grad = 2.0 * (a.transpose() * (a * y - b));
        Eigen::VectorXd x_new = project_density(y - step * grad);
        const double change = (x_new - x).norm();
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = x_new + ((tk - 1.0) / t_next) * (x_new - x);
        x = x_new;
        tk = t_next;
        out.iterations = it;
        if (change <= kStop) {
            out.converged = true;
            break;
        }
    }
    out.rho_hat = DensityMatrix(compose_hermitian(x));
    out.residual = (a * x - b).norm();
    return out;
}

}  // namespace nmrbell::tomography
