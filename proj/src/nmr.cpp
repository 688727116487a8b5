#include "nmrbell/nmr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmrbell/rng.hpp"

namespace nmrbell::nmr {

namespace {
constexpr Complex kI{0.0, 1.0};

int sign_bit(Eigen::Index k, int qubit) {
    return qstate::bit_of(k, qubit, 3) == 0 ? 1 : -1;
}
}  // namespace

double SpinSystem::coupling_hz(int a, int b) const {
    if (a > b) std::swap(a, b);
    if (a == 1 && b == 2) return j12_hz;
    if (a == 1 && b == 3) return j13_hz;
    if (a == 2 && b == 3) return j23_hz;
    throw std::invalid_argument("coupling indices must be distinct spins 1..3");
}

CMatrix spin_op(char axis, int spin) {
    CMatrix half;
    switch (axis) {
        case 'x': half = 0.5 * qstate::pauli_x(); break;
        case 'y': half = 0.5 * qstate::pauli_y(); break;
        case 'z': half = 0.5 * qstate::pauli_z(); break;
        default: throw std::invalid_argument("axis must be x, y or z");
    }
    return qstate::embed(half, {spin}, 3);
}

CMatrix hamiltonian(const SpinSystem& sys) {
    CMatrix h = CMatrix::Zero(8, 8);
    for (int i = 1; i <= 3; ++i)
        h -= 2.0 * kPi * sys.offsets_hz[i - 1] * spin_op('z', i);
    for (int i = 1; i <= 3; ++i)
        for (int j = i + 1; j <= 3; ++j)
            h += 2.0 * kPi * sys.coupling_hz(i, j) * spin_op('z', i) * spin_op('z', j);
    return h;
}

CMatrix expm_hermitian(const CMatrix& h, double t) {
    RVector evals;
    CMatrix evecs;
    qstate::hermitian_eigensystem(0.5 * (h + h.adjoint().eval()), evals, evecs);
    CVector phases(evals.size());
    for (Eigen::Index k = 0; k < evals.size(); ++k)
        phases(k) = std::exp(-kI * evals(k) * t);
    return evecs * phases.asDiagonal() * evecs.adjoint();
}

Event Event::delay(double seconds) {
    if (seconds < 0) throw std::invalid_argument("delay must be nonnegative");
    Event e;
    e.kind = Kind::Delay;
    e.duration = seconds;
    return e;
}

Event Event::rf(std::vector<int> targets, double angle, double phase,
                double duration) {
    if (targets.empty()) throw std::invalid_argument("rf needs at least one target");
    for (int t : targets)
        if (t < 1 || t > 3) throw std::invalid_argument("rf target out of range");
    if (duration < 0) throw std::invalid_argument("rf duration must be nonnegative");
    Event e;
    e.kind = Kind::Rf;
    e.targets = std::move(targets);
    e.angle = angle;
    e.phase = phase;
    e.duration = duration;
    return e;
}

CMatrix event_unitary(const Event& e, const SpinSystem& sys, PulseModel model) {
    if (e.kind == Event::Kind::Delay) {
        return expm_hermitian(hamiltonian(sys), e.duration);
    }
    const bool finite = model == PulseModel::Finite && e.duration > 0;
    if (!finite) {
        CMatrix u = CMatrix::Identity(8, 8);
        CMatrix axis = std::cos(e.phase) * qstate::pauli_x() +
                       std::sin(e.phase) * qstate::pauli_y();
        double c = std::cos(e.angle / 2);
        double s = std::sin(e.angle / 2);
        CMatrix r = c * qstate::identity(2) - kI * s * axis;
        for (int t : e.targets) u = qstate::embed(r, {t}, 3) * u;
        return u;
    }
    CMatrix h = hamiltonian(sys);
    const double rate = e.angle / e.duration;  // rad/s nutation
    for (int t : e.targets)
        h += rate * (std::cos(e.phase) * spin_op('x', t) +
                     std::sin(e.phase) * spin_op('y', t));
    return expm_hermitian(h, e.duration);
}

CMatrix sequence_unitary(const std::vector<Event>& events, const SpinSystem& sys,
                         PulseModel model) {
    CMatrix u = CMatrix::Identity(8, 8);
    for (const auto& e : events) u = event_unitary(e, sys, model) * u;
    return u;
}

CMatrix ZCorrection::unitary() const {
    CVector d(8);
    for (Eigen::Index k = 0; k < 8; ++k) {
        double arg = phase;
        for (int q = 1; q <= 3; ++q) arg += sign_bit(k, q) * angles[q - 1] / 2.0;
        d(k) = std::exp(kI * arg);
    }
    return CMatrix(d.asDiagonal());
}

ZCorrection fit_z_correction(const CMatrix& achieved, const CMatrix& target) {
    if (achieved.rows() != 8 || achieved.cols() != 8 || target.rows() != 8 ||
        target.cols() != 8)
        throw std::invalid_argument("fit expects 8x8 unitaries");
    CMatrix m = target * achieved.adjoint();
    const double kFitTol = 1e-9;
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j)
            if (i != j && std::abs(m(i, j)) > kFitTol)
                throw std::runtime_error(
                    "operators differ by more than a local-z frame (off-diagonal)");
    CVector diag(8);
    for (Eigen::Index k = 0; k < 8; ++k) {
        if (std::abs(std::abs(m(k, k)) - 1.0) > kFitTol)
            throw std::runtime_error(
                "operators differ by more than a local-z frame (modulus)");
        diag(k) = m(k, k) / std::abs(m(k, k));
    }
    ZCorrection fit;
    for (int q = 1; q <= 3; ++q) {
        Complex r = 0;
        const Eigen::Index mask = Eigen::Index{1} << (3 - q);
        for (Eigen::Index k = 0; k < 8; ++k)
            if ((k & mask) == 0) r += diag(k) * std::conj(diag(k | mask));
        fit.angles[q - 1] = std::arg(r);
    }
    Complex ph = 0;
    for (Eigen::Index k = 0; k < 8; ++k) {
        double local = 0;
        for (int q = 1; q <= 3; ++q) local += sign_bit(k, q) * fit.angles[q - 1] / 2.0;
        ph += diag(k) * std::exp(-kI * local);
    }
    fit.phase = std::arg(ph);
    CMatrix check = fit.unitary() * achieved - target;
    if (check.cwiseAbs().maxCoeff() > kFitTol)
        throw std::runtime_error("local-z frame fit residual above tolerance");
    return fit;
}

PulseProgram cnot_pulse_program(int control, int target, const SpinSystem& sys) {
    if (control == target || control < 1 || control > 3 || target < 1 || target > 3)
        throw std::invalid_argument("cnot needs two distinct spins in 1..3");
    const double j = sys.coupling_hz(control, target);
    if (j == 0.0) throw std::invalid_argument("spins are not coupled");
    int spectator = 6 - control - target;
    const double tau = 1.0 / (2.0 * std::abs(j));

    PulseProgram prog;
    prog.events.push_back(Event::rf({target}, kPi / 2, kPi / 2));
    prog.events.push_back(Event::delay(tau / 2));
    prog.events.push_back(Event::rf({spectator}, kPi, 0.0));
    prog.events.push_back(Event::delay(tau / 2));
    prog.events.push_back(Event::rf({spectator}, kPi, 0.0));
    prog.events.push_back(Event::rf({target}, kPi / 2, j > 0 ? 0.0 : kPi));

    CMatrix cnot = CMatrix::Zero(4, 4);
    cnot(0, 0) = 1;
    cnot(1, 1) = 1;
    cnot(2, 3) = 1;
    cnot(3, 2) = 1;
    CMatrix embedded = qstate::embed(cnot, {control, target}, 3);
    prog.correction =
        fit_z_correction(sequence_unitary(prog.events, sys), embedded);
    return prog;
}

LoweredCircuit lower_circuit(const circuits::Circuit& c, const SpinSystem& sys) {
    if (c.qubits() != 3)
        throw std::invalid_argument("pulse lowering supports three qubits");
    LoweredCircuit out;
    // Pending frame F = exp(i gamma) * prod_q Rz_q(f_q) sitting to the left
    // of everything emitted so far; Rz(a) = diag(exp(-ia/2), exp(+ia/2)).
    std::array<double, 3> f{0.0, 0.0, 0.0};
    double gamma = 0.0;

    auto emit_shifted = [&](const Event& e) {
        if (e.kind == Event::Kind::Delay) {
            out.events.push_back(e);
            return;
        }
        for (int t : e.targets)
            out.events.push_back(
                Event::rf({t}, e.angle, e.phase - f[t - 1], e.duration));
    };

    for (const auto& g : c.gates()) {
        if (g.kind == circuits::Gate::Kind::Rotation) {
            const int q = g.targets[0];
            if (g.axis == circuits::Axis::Z) {
                f[q - 1] += g.angle;
                continue;
            }
            const double axis_phase = g.axis == circuits::Axis::X ? 0.0 : kPi / 2;
            emit_shifted(Event::rf({q}, g.angle, axis_phase));
        } else if (g.kind == circuits::Gate::Kind::Custom) {
            throw std::invalid_argument("custom gates have no pulse lowering");
        } else {
            PulseProgram prog =
                cnot_pulse_program(g.targets[0], g.targets[1], sys);
            for (const auto& e : prog.events) emit_shifted(e);
            // Fold the program's residual frame into the pending one:
            // correction = exp(i phase) * prod_q Rz_q(-angles_q).
            gamma += prog.correction.phase;
            for (int q = 1; q <= 3; ++q) f[q - 1] -= prog.correction.angles[q - 1];
        }
    }
    out.correction.phase = gamma;
    for (int q = 1; q <= 3; ++q) out.correction.angles[q - 1] = -f[q - 1];
    return out;
}

namespace {

struct GrapeWork {
    CMatrix h0;
    std::array<CMatrix, 6> control_ops;  // x1, y1, x2, y2, x3, y3
    double dt = 0.0;
};

GrapeWork make_work(const GrapeProblem& p) {
    if (p.segments < 1) throw std::invalid_argument("segments must be positive");
    if (p.total_duration <= 0)
        throw std::invalid_argument("total duration must be positive");
    if (p.max_amplitude <= 0)
        throw std::invalid_argument("max amplitude must be positive");
    if (p.target.rows() != 8 || p.target.cols() != 8)
        throw std::invalid_argument("target must be 8x8");
    GrapeWork w;
    w.h0 = hamiltonian(p.system);
    for (int i = 0; i < 3; ++i) {
        w.control_ops[2 * i] = spin_op('x', i + 1);
        w.control_ops[2 * i + 1] = spin_op('y', i + 1);
    }
    w.dt = p.total_duration / p.segments;
    return w;
}

CMatrix segment_hamiltonian(const GrapeWork& w, const Eigen::MatrixXd& u, int k) {
    CMatrix h = w.h0;
    for (int c = 0; c < 6; ++c) h += u(k, c) * w.control_ops[c];
    return h;
}

Complex trace_overlap(const GrapeProblem& p, const GrapeWork& w,
                      const Eigen::MatrixXd& u, std::vector<CMatrix>* segs) {
    CMatrix acc = CMatrix::Identity(8, 8);
    for (int k = 0; k < p.segments; ++k) {
        CMatrix uk = expm_hermitian(segment_hamiltonian(w, u, k), w.dt);
        if (segs) (*segs)[k] = uk;
        acc = uk * acc;
    }
    return (p.target.adjoint() * acc).trace();
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

Eigen::MatrixXd clamp_controls(Eigen::MatrixXd u, double max_amp) {
    return u.cwiseMax(-max_amp).cwiseMin(max_amp);
}

}  // namespace

double grape_fidelity(const GrapeProblem& p, const Eigen::MatrixXd& controls) {
    GrapeWork w = make_work(p);
    if (controls.rows() != p.segments || controls.cols() != 6)
        throw std::invalid_argument("controls must be segments x 6");
    Complex g = trace_overlap(p, w, controls, nullptr);
    return std::norm(g) / 64.0;
}

Eigen::MatrixXd grape_gradient(const GrapeProblem& p,
                               const Eigen::MatrixXd& controls) {
    GrapeWork w = make_work(p);
    if (controls.rows() != p.segments || controls.cols() != 6)
        throw std::invalid_argument("controls must be segments x 6");
    const int n = p.segments;

    std::vector<CMatrix> segs(n);
    Complex g = trace_overlap(p, w, controls, &segs);

    // pre[k] = U_k ... U_1 (pre[0] = I); post[k] = U_n ... U_{k+1}.
    std::vector<CMatrix> pre(n + 1), post(n + 1);
    pre[0] = CMatrix::Identity(8, 8);
    for (int k = 0; k < n; ++k) pre[k + 1] = segs[k] * pre[k];
    post[n] = CMatrix::Identity(8, 8);
    for (int k = n - 1; k >= 0; --k) post[k] = post[k + 1] * segs[k];

    Eigen::MatrixXd grad(n, 6);
    for (int k = 0; k < n; ++k) {
        RVector evals;
        CMatrix q;
        qstate::hermitian_eigensystem(segment_hamiltonian(w, controls, k), evals, q);
        CMatrix gamma(8, 8);
        for (Eigen::Index a = 0; a < 8; ++a)
            for (Eigen::Index b = 0; b < 8; ++b) {
                double mean = 0.5 * (evals(a) + evals(b)) * w.dt;
                double diff = 0.5 * (evals(a) - evals(b)) * w.dt;
                gamma(a, b) = -kI * w.dt * std::exp(-kI * mean) * sinc(diff);
            }
        // dG/du = tr(W dU), W = pre_{k-1} target^dagger post_{k+1},
        // dU = Q (gamma o Q^dagger B Q) Q^dagger.
        CMatrix wk = pre[k] * p.target.adjoint() * post[k + 1];
        CMatrix y = q.adjoint() * wk * q;
        for (int c = 0; c < 6; ++c) {
            CMatrix z = q.adjoint() * w.control_ops[c] * q;
            Complex dg = 0;
            for (Eigen::Index a = 0; a < 8; ++a)
                for (Eigen::Index b = 0; b < 8; ++b)
                    dg += y(a, b) * gamma(b, a) * z(b, a);
            grad(k, c) = 2.0 * std::real(std::conj(g) * dg) / 64.0;
        }
    }
    return grad;
}

GrapeResult grape_optimize(const GrapeProblem& p) {
    GrapeWork w = make_work(p);
    Eigen::MatrixXd u;
    if (p.initial_controls) {
        u = *p.initial_controls;
        if (u.rows() != p.segments || u.cols() != 6)
            throw std::invalid_argument("initial controls must be segments x 6");
        u = clamp_controls(u, p.max_amplitude);
    } else {
        rng::Stream stream(p.seed);
        u.resize(p.segments, 6);
        for (int k = 0; k < p.segments; ++k)
            for (int c = 0; c < 6; ++c)
                u(k, c) = stream.uniform(-p.max_amplitude / 10, p.max_amplitude / 10);
    }

    GrapeResult res;
    double phi = grape_fidelity(p, u);
    res.history.push_back(phi);
    double alpha = -1.0;  // set from the first gradient scale

    for (int it = 0; it < p.max_iterations && phi < p.stop_fidelity; ++it) {
        Eigen::MatrixXd grad = grape_gradient(p, u);
        double gmax = grad.cwiseAbs().maxCoeff();
        if (gmax < 1e-15) break;
        if (alpha <= 0) alpha = 0.1 * p.max_amplitude / gmax;

        bool improved = false;
        for (int halving = 0; halving < 40; ++halving) {
            Eigen::MatrixXd cand = clamp_controls(u + alpha * grad, p.max_amplitude);
            double cand_phi = grape_fidelity(p, cand);
            if (cand_phi > phi) {
                u = std::move(cand);
                phi = cand_phi;
                improved = true;
                if (halving == 0) alpha *= 1.5;
                break;
            }
            alpha /= 2;
        }
        res.history.push_back(phi);
        if (!improved) break;
    }

    res.controls = std::move(u);
    res.fidelity = phi;
    res.converged = phi >= p.stop_fidelity;
    return res;
}

}  // namespace nmrbell::nmr
