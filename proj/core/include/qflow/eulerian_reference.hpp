#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qflow/errors.hpp"
#include "qflow/finite_difference.hpp"
#include "qflow/lagrangian_fluid.hpp"

namespace qflow {

/// Wavefunction and derived hydrodynamic fields on a fixed spatial grid.
/// Homogeneous Dirichlet walls; scenarios must keep |psi| < 1e-8 there.
struct EulerianFields {
    std::vector<double> x;
    double dx = 0.0;
    std::vector<std::complex<double>> psi;
    std::vector<double> rho;
    std::vector<double> v;     // probability-current velocity j/rho
    std::vector<double> u;     // dlog(rho)/dx
    std::vector<std::uint8_t> valid;  // rho above floor; v,u zeroed elsewhere
    double t = 0.0;
    double hbar_over_mass = 1.0;  // scales the current into a velocity
    DiffOp d_dx;

    int size() const { return static_cast<int>(x.size()); }
    double quadrature(std::span<const double> f) const;
};

/// Relative density floor below which v and u are masked.
inline constexpr double kEulerianRhoFloor = 1e-8;
/// Relative |u| threshold for recovering V = W u^2.
inline constexpr double kEulerianUMask = 1e-6;

/// Samples psi0 on a symmetric grid [-half_width, half_width] (Dirichlet
/// endpoints forced to zero) and computes the polar fields.
EulerianFields make_eulerian_fields(const PhysicalParams& params, int m_grid,
                                    double half_width,
                                    const std::function<std::complex<double>(double)>& psi0);

/// One Crank-Nicolson step of i hbar dpsi/dt = -(hbar^2/2m) psi'' + V psi.
/// Unconditionally stable; preserves the norm to round-off. Refreshes the
/// polar fields afterwards.
void cn_step(EulerianFields& fields, const PhysicalParams& params);

/// rho = |psi|^2, v from the probability current (no phase unwrapping),
/// u = rho'/rho; all masked where rho is below the floor.
void polar_fields(EulerianFields& fields);

/// Phase S as a diagnostic: cumulative integral of m v from the first valid
/// point (gauge S=0 there). Masked points carry the running value.
std::vector<double> reconstruct_phase(const EulerianFields& fields, double mass);

/// Velocity snapshots for trajectory tracing.
struct VelocityHistory {
    std::vector<double> x;
    double dx = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> v;
};

struct TraceBundle {
    std::vector<double> labels;
    std::vector<double> times;
    std::vector<std::vector<double>> q;       // q[time][label]
    std::vector<std::uint8_t> escaped;        // label left the grid; excluded
};

/// Integral curves of dq/dt = v(q,t): RK4 in t with cubic interpolation of v
/// in x and linear interpolation between stored snapshots.
TraceBundle advect_trace(const VelocityHistory& hist, std::span<const double> labels);

/// Transported quantity W = V/(u.u) of the concealed continuity equation and
/// the recovered concealed velocity field V = W u^2.
struct ConcealedEulerian {
    std::vector<double> W;
    std::vector<double> V;
    std::vector<std::uint8_t> mask;  // |u| below threshold; V invalid there
};

/// W(x,0) = Qdot0(x)/u0^2(x) with the same hbar/2m ratio convention as the
/// Lagrangian module; masked points filled by linear interpolation.
ConcealedEulerian init_concealed_eulerian(const EulerianFields& fields,
                                          const PhysicalParams& params);

/// Advecting velocity for the continuity solve: the current velocity where
/// the density is trustworthy (rho >= 1e-6 max), extended linearly beyond.
/// Masking v to zero instead would park a spurious wall at the moving
/// wavepacket front and pile W up against it.
std::vector<double> advection_velocity(const EulerianFields& fields);

/// One conservative first-order upwind step of d(W)/dt + d(W v)/dx = 0.
/// Throws on CFL violation (dt max|v|/dx > 0.9).
void concealed_continuity_step(ConcealedEulerian& conc, const EulerianFields& fields,
                               double dt);

/// Pushes Lagrangian fields to the spatial grid by inverting the monotone
/// map q(a): rho = rho0/J, V = Qdot/J. Points outside the trajectory span
/// are masked.
struct MappedFields {
    std::vector<double> rho;
    std::vector<double> V;
    std::vector<std::uint8_t> valid;
};
MappedFields lagrangian_to_eulerian(const LabelGrid& grid, const TrajectoryField& traj,
                                    const ConcealedField& conc,
                                    std::span<const double> x);

}  // namespace qflow
