#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "qflow/errors.hpp"

namespace qflow::routh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using MatrixFn = std::function<Mat(const Vec& q)>;
/// Returns one matrix per visible coordinate: out[k] = dM/dq_k.
using MatrixDerivFn = std::function<std::vector<Mat>(const Vec& q)>;

/// Pure-kinetic Lagrangian L = 1/2 qdot^T B(q) qdot + 1/2 Qdot^T A(q) Qdot.
/// B couples the visible coordinates q, A the concealed coordinates Q; both
/// depend on q only, so the Q are ignorable.
struct KineticSystem {
    int n_visible = 0;
    int n_concealed = 0;
    MatrixFn B;
    MatrixFn A;
    MatrixDerivFn dB;  // optional; central differences when absent
    MatrixDerivFn dA;

    std::vector<Mat> b_derivatives(const Vec& q) const;
    std::vector<Mat> a_derivatives(const Vec& q) const;
};

struct DiscreteState {
    Vec q, qdot, Q, Qdot;
    double t = 0.0;
};

struct Accelerations {
    Vec qddot, Qddot;
};

/// Central finite-difference derivatives of a matrix-valued map, step
/// h_k = eps^(1/3) * max(1, |q_k|).
std::vector<Mat> fd_matrix_derivatives(const MatrixFn& M, const Vec& q);

/// Checks symmetry and positive-definiteness of A and B at a sample of
/// states; throws NumericalError naming the offending matrix.
void validate_system(const KineticSystem& sys, std::span<const Vec> q_samples);

/// Euler-Lagrange accelerations of the full Lagrangian.
Accelerations full_accelerations(const KineticSystem& sys, const DiscreteState& s);

/// Routhian L' = 1/2 qdot^T B qdot - 1/2 P^T A^{-1}(q) P with the concealed
/// momenta P frozen at their initial values.
struct ReducedSystem {
    KineticSystem base;
    Vec P;

    /// Concealed velocity recovered from the visible position: A^{-1}(q) P.
    Vec concealed_velocity(const Vec& q) const;
    /// Emergent potential V_q(q) = 1/2 P^T A^{-1}(q) P; identical to the
    /// concealed kinetic energy T_Q at the same q.
    double emergent_potential(const Vec& q) const;
    double lagrangian(const Vec& q, const Vec& qdot) const;
};

/// Forms the reduced system from the full initial state: P = A(q0) Qdot0.
/// Rejects degenerate A(q0) (an eigenvalue within 1e-12 of zero).
ReducedSystem reduce(const KineticSystem& sys, const DiscreteState& s0);

/// Euler-Lagrange accelerations of the Routhian.
Vec reduced_accelerations(const ReducedSystem& red, const Vec& q, const Vec& qdot);

/// Concealed motion rebuilt from a visible path on a uniform time mesh:
/// Qdot(t) = A^{-1}(q(t)) P pointwise, Q by cumulative trapezoid from Q0.
struct ConcealedPath {
    std::vector<Vec> Qdot, Q;
};
ConcealedPath reconstruct_concealed(const ReducedSystem& red,
                                    std::span<const double> t,
                                    std::span<const Vec> q_path,
                                    const Vec& Q0);

enum class Scheme { VelocityVerlet, RK4 };

using AccelFn = std::function<Vec(double t, const Vec& pos, const Vec& vel)>;

struct OdeTrajectory {
    std::vector<double> t;
    std::vector<Vec> pos, vel;
};

/// Fixed-step integration of pos'' = accel(t, pos, vel). Velocity-Verlet
/// treats the second-order form (velocity-dependent accelerations handled by
/// a fixed-point closure of the final half-kick); RK4 treats the first-order
/// form. Throws NumericalError with the step index on non-finite states.
OdeTrajectory integrate(const AccelFn& accel, const Vec& pos0, const Vec& vel0,
                        double dt, int n_steps, Scheme scheme);

/// Adapters between DiscreteState-shaped systems and the flat integrator.
AccelFn make_full_accel(const KineticSystem& sys);
AccelFn make_reduced_accel(const ReducedSystem& red);

inline Vec stack(const Vec& a, const Vec& b) {
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

}  // namespace qflow::routh
