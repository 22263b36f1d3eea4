#include "qflow/routh.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qflow::routh {

namespace {

Eigen::LLT<Mat> checked_llt(const Mat& M, const char* name) {
    Eigen::LLT<Mat> llt(M);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(name) +
                             " is not symmetric positive-definite (factorization failed)");
    return llt;
}

bool is_symmetric(const Mat& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <=
           1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

}  // namespace

std::vector<Mat> fd_matrix_derivatives(const MatrixFn& M, const Vec& q) {
    const double croot = std::cbrt(std::numeric_limits<double>::epsilon());
    std::vector<Mat> out(static_cast<size_t>(q.size()));
    Vec qp = q, qm = q;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        const double h = croot * std::max(1.0, std::abs(q[k]));
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        out[static_cast<size_t>(k)] = (M(qp) - M(qm)) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return out;
}

std::vector<Mat> KineticSystem::b_derivatives(const Vec& q) const {
    return dB ? dB(q) : fd_matrix_derivatives(B, q);
}

std::vector<Mat> KineticSystem::a_derivatives(const Vec& q) const {
    return dA ? dA(q) : fd_matrix_derivatives(A, q);
}

void validate_system(const KineticSystem& sys, std::span<const Vec> q_samples) {
    for (const Vec& q : q_samples) {
        const Mat b = sys.B(q);
        const Mat a = sys.A(q);
        if (b.rows() != sys.n_visible || b.cols() != sys.n_visible)
            throw ConfigError("B(q) has wrong dimensions");
        if (a.rows() != sys.n_concealed || a.cols() != sys.n_concealed)
            throw ConfigError("A(q) has wrong dimensions");
        if (!is_symmetric(b)) throw NumericalError("B(q) is not symmetric at a sampled q");
        if (!is_symmetric(a)) throw NumericalError("A(q) is not symmetric at a sampled q");
        checked_llt(b, "B(q)");
        checked_llt(a, "A(q)");
    }
}

Accelerations full_accelerations(const KineticSystem& sys, const DiscreteState& s) {
    if (s.q.size() != sys.n_visible || s.Qdot.size() != sys.n_concealed)
        throw ConfigError("state dimensions do not match the system");

    const Mat B = sys.B(s.q);
    const Mat A = sys.A(s.q);
    const auto dB = sys.b_derivatives(s.q);
    const auto dA = sys.a_derivatives(s.q);

    // (B qddot)_i = 1/2 qdot' dB_i qdot + 1/2 Qdot' dA_i Qdot
    //               - sum_k qdot_k (dB_k qdot)_i
    Vec rhs(sys.n_visible);
    for (int i = 0; i < sys.n_visible; ++i)
        rhs[i] = 0.5 * s.qdot.dot(dB[i] * s.qdot) + 0.5 * s.Qdot.dot(dA[i] * s.Qdot);
    for (int k = 0; k < sys.n_visible; ++k)
        rhs -= s.qdot[k] * (dB[k] * s.qdot);

    // A Qddot = - sum_k qdot_k dA_k Qdot
    Vec rhs_Q = Vec::Zero(sys.n_concealed);
    for (int k = 0; k < sys.n_visible; ++k)
        rhs_Q -= s.qdot[k] * (dA[k] * s.Qdot);

    Accelerations acc;
    acc.qddot = checked_llt(B, "B(q)").solve(rhs);
    acc.Qddot = checked_llt(A, "A(q)").solve(rhs_Q);
    return acc;
}

ReducedSystem reduce(const KineticSystem& sys, const DiscreteState& s0) {
    const Mat A0 = sys.A(s0.q);
    Eigen::SelfAdjointEigenSolver<Mat> es(A0);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <=
            1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
        throw NumericalError("A(q0) is singular or degenerate; cannot form concealed momenta");
    ReducedSystem red;
    red.base = sys;
    red.P = A0 * s0.Qdot;
    return red;
}

Vec ReducedSystem::concealed_velocity(const Vec& q) const {
    return checked_llt(base.A(q), "A(q)").solve(P);
}

double ReducedSystem::emergent_potential(const Vec& q) const {
    return 0.5 * P.dot(concealed_velocity(q));
}

double ReducedSystem::lagrangian(const Vec& q, const Vec& qdot) const {
    return 0.5 * qdot.dot(base.B(q) * qdot) - emergent_potential(q);
}

Vec reduced_accelerations(const ReducedSystem& red, const Vec& q, const Vec& qdot) {
    const KineticSystem& sys = red.base;
    const Mat B = sys.B(q);
    const auto dB = sys.b_derivatives(q);
    const auto dA = sys.a_derivatives(q);
    const Vec Y = red.concealed_velocity(q);  // A^{-1} P

    // d/dq_i of -1/2 P' A^{-1} P equals +1/2 Y' dA_i Y, so the emergent
    // potential feeds back exactly like the concealed kinetic term did.
    Vec rhs(sys.n_visible);
    for (int i = 0; i < sys.n_visible; ++i)
        rhs[i] = 0.5 * qdot.dot(dB[i] * qdot) + 0.5 * Y.dot(dA[i] * Y);
    for (int k = 0; k < sys.n_visible; ++k)
        rhs -= qdot[k] * (dB[k] * qdot);

    return checked_llt(B, "B(q)").solve(rhs);
}

ConcealedPath reconstruct_concealed(const ReducedSystem& red,
                                    std::span<const double> t,
                                    std::span<const Vec> q_path,
                                    const Vec& Q0) {
    if (t.size() != q_path.size() || t.size() < 2)
        throw ConfigError("reconstruct_concealed: need matching t and q series");
    const double dt = t[1] - t[0];
    for (size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw ConfigError("reconstruct_concealed: time mesh must be uniform");

    ConcealedPath path;
    path.Qdot.reserve(t.size());
    path.Q.reserve(t.size());
    for (const Vec& q : q_path) path.Qdot.push_back(red.concealed_velocity(q));
    Vec Q = Q0;
    path.Q.push_back(Q);
    for (size_t i = 1; i < t.size(); ++i) {
        Q += 0.5 * dt * (path.Qdot[i - 1] + path.Qdot[i]);
        path.Q.push_back(Q);
    }
    return path;
}

namespace {

void check_finite(const Vec& pos, const Vec& vel, int step) {
    if (!pos.allFinite() || !vel.allFinite())
        throw NumericalError("integration produced a non-finite state at step " +
                             std::to_string(step));
}

}  // namespace

OdeTrajectory integrate(const AccelFn& accel, const Vec& pos0, const Vec& vel0,
                        double dt, int n_steps, Scheme scheme) {
    if (dt <= 0.0) throw ConfigError("integrate: dt must be positive");
    OdeTrajectory out;
    out.t.reserve(n_steps + 1);
    out.pos.reserve(n_steps + 1);
    out.vel.reserve(n_steps + 1);

    Vec x = pos0, v = vel0;
    double t = 0.0;
    out.t.push_back(t);
    out.pos.push_back(x);
    out.vel.push_back(v);

    for (int step = 1; step <= n_steps; ++step) {
        if (scheme == Scheme::VelocityVerlet) {
            const Vec a0 = accel(t, x, v);
            const Vec vh = v + 0.5 * dt * a0;
            x += dt * vh;
            t += dt;
            // Final half-kick; accelerations may depend on velocity, close
            // the implicit relation by fixed-point iteration.
            Vec vg = vh + 0.5 * dt * a0;
            for (int it = 0; it < 8; ++it) {
                const Vec vn = vh + 0.5 * dt * accel(t, x, vg);
                const double delta = (vn - vg).cwiseAbs().maxCoeff();
                vg = vn;
                if (delta <= 1e-14 * (1.0 + vg.cwiseAbs().maxCoeff())) break;
            }
            v = vg;
        } else {
            // Classic RK4 on (x, v).
            const Vec k1x = v;
            const Vec k1v = accel(t, x, v);
            const Vec k2x = v + 0.5 * dt * k1v;
            const Vec k2v = accel(t + 0.5 * dt, x + 0.5 * dt * k1x, k2x);
            const Vec k3x = v + 0.5 * dt * k2v;
            const Vec k3v = accel(t + 0.5 * dt, x + 0.5 * dt * k2x, k3x);
            const Vec k4x = v + dt * k3v;
            const Vec k4v = accel(t + dt, x + dt * k3x, k4x);
            x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            v += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            t += dt;
        }
        check_finite(x, v, step);
        out.t.push_back(t);
        out.pos.push_back(x);
        out.vel.push_back(v);
    }
    return out;
}

AccelFn make_full_accel(const KineticSystem& sys) {
    return [sys](double t, const Vec& pos, const Vec& vel) {
        DiscreteState s;
        s.q = pos.head(sys.n_visible);
        s.Q = pos.tail(sys.n_concealed);
        s.qdot = vel.head(sys.n_visible);
        s.Qdot = vel.tail(sys.n_concealed);
        s.t = t;
        const Accelerations acc = full_accelerations(sys, s);
        return stack(acc.qddot, acc.Qddot);
    };
}

AccelFn make_reduced_accel(const ReducedSystem& red) {
    return [red](double, const Vec& pos, const Vec& vel) {
        return reduced_accelerations(red, pos, vel);
    };
}

}  // namespace qflow::routh
