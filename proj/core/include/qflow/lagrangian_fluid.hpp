#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qflow/errors.hpp"
#include "qflow/finite_difference.hpp"

namespace qflow {

/// External scalar potential V(x) with its analytic gradient.
struct ScalarPotential {
    std::function<double(double)> value;
    std::function<double(double)> grad;
};

ScalarPotential harmonic_potential(double mass, double omega, double center = 0.0);

struct PhysicalParams {
    double hbar = 1.0;
    double mass = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    std::optional<ScalarPotential> external;
};

/// Initial hydrodynamic data. rho0 must be normalized over the retained
/// label domain; psi0 is the matching wavefunction for the Eulerian
/// reference solver.
struct InitialState {
    std::function<double(double)> rho0;
    std::function<double(double)> v0;
    std::function<std::complex<double>(double)> psi0;
    double center = 0.0;
    double sigma0 = 1.0;
    /// Explicit label domain for profiles without a natural density floor
    /// (e.g. uniform density in tests).
    std::optional<std::pair<double, double>> label_domain;
};

InitialState gaussian_packet(double hbar, double mass, double sigma0,
                             double center, double p0);

/// Fluid-particle labels with reference densities and quadrature weights.
/// Labels are uniform; the retained domain keeps rho0 >= 1e-8 * max(rho0).
struct LabelGrid {
    std::vector<double> a;
    double da = 0.0;
    std::vector<double> rho0;
    std::vector<double> rho0_concealed;  // concealed reference density, = rho0
    std::vector<double> log_rho0;
    std::vector<double> weights;  // trapezoid: da with half-weight ends
    std::vector<double> sponge;   // tail absorption strength, 0 in the interior
    DiffOp d_da;

    int size() const { return static_cast<int>(a.size()); }
    double quadrature(std::span<const double> f) const;
};

/// Visible flow q(a,t) with its Jacobian and log-density gradient.
struct TrajectoryField {
    std::vector<double> q, qdot;
    std::vector<double> J;       // dq/da, must stay positive
    std::vector<double> u;       // dlog(rho)/dx evaluated on trajectories
    std::vector<double> u0;      // cached t=0 gradient
    double t = 0.0;
};

/// Concealed companion flow. P is frozen at t=0; Q advances through the
/// running integral I(a,t) of u^2 along each trajectory.
struct ConcealedField {
    std::vector<double> Q0, Qdot0;
    std::vector<double> P;        // momentum density, constant in time
    std::vector<double> R;        // regularized Qdot0 / (u0.u0)
    std::vector<double> I;        // integral of u^2 dt per label
    std::vector<double> Q;
    std::vector<double> u2_prev;  // last u^2 sample for the trapezoid rule
    std::vector<std::uint8_t> masked;  // labels where |u0| fell below the floor
};

struct FluidSystem {
    LabelGrid grid;
    TrajectoryField traj;
    ConcealedField conc;
};

struct GridSpec {
    int n_labels = 1024;
    /// Optional clip applied to the natural (floor-truncated) domain; the
    /// clipped boundary must satisfy rho0 <= 1e-3 * max(rho0).
    std::optional<double> clip_half_width;
};

/// Density floor defining the retained label domain.
inline constexpr double kDensityFloor = 1e-8;
/// Relative |u0| threshold below which the ratio R is interpolated.
inline constexpr double kRatioMaskFloor = 1e-6;
/// Labels with rho0 below this fraction of the peak form the absorbing
/// sponge: short-wavelength noise is transported toward the rarefied tail
/// and amplified like rho0^(-1/2) there, so it must be dissipated before it
/// reflects.
inline constexpr double kSpongeFloor = 1e-4;

/// Builds grid and fields at t=0: q=a, J=1, u=u0, Q=Q0 (default Q0(a)=a),
/// I=0, P frozen. Throws ConfigError for non-normalizable rho0 or a clipped
/// domain whose boundary density is too large.
FluidSystem init_scenario(const PhysicalParams& params, const GridSpec& spec,
                          const InitialState& init,
                          const std::function<double(double)>& Q0 = {});

/// Refreshes J = dq/da and u = (1/J) d/da [log rho0 - log J]. Throws
/// NumericalError with the label index when trajectories cross (J <= 0).
void jacobian_and_u(const LabelGrid& grid, TrajectoryField& traj);

/// Force per label: -d/dq [Q_B + V] with the Bohm quantum potential
/// Q_B = -(hbar^2/4m)(du/dq + u^2/2) evaluated through the label stencils.
std::vector<double> quantum_force(const PhysicalParams& params,
                                  const LabelGrid& grid,
                                  const TrajectoryField& traj);

/// Largest velocity-Verlet step the quantum-pressure dispersion tolerates on
/// this grid: dt = 4 m h^2 / (hbar * eta^2), eta the stencil's peak symbol.
double quantum_stable_dt(const PhysicalParams& params, const LabelGrid& grid);

/// Number of internal Verlet substeps per outer dt (fixed for a run).
int visible_substeps(const PhysicalParams& params, const LabelGrid& grid);

/// Advances the visible flow by one outer step params.dt using n_sub
/// identical velocity-Verlet substeps (n_sub from visible_substeps when not
/// given). J and u are current on return.
void step_visible(const PhysicalParams& params, const LabelGrid& grid,
                  TrajectoryField& traj, int n_sub = 0);

/// Initial concealed speed (hbar/2m) u0; the magnitude is the quantized
/// choice, the sign convention follows u0.
std::vector<double> initial_concealed_velocity(const PhysicalParams& params,
                                               const TrajectoryField& traj);

/// Momentum density P(a) = m rho0(a) Qdot0(a), frozen for the whole run.
std::vector<double> concealed_momenta(const PhysicalParams& params,
                                      const LabelGrid& grid,
                                      std::span<const double> Qdot0);

ConcealedField make_concealed(const PhysicalParams& params, const LabelGrid& grid,
                              const TrajectoryField& traj,
                              const std::function<double(double)>& Q0 = {});

/// Accumulates I by the trapezoid rule using the current u field and updates
/// Q = Q0 + R * I. Call once per outer step, after step_visible.
void advance_concealed(ConcealedField& conc, const TrajectoryField& traj, double dt);

/// Current concealed velocity Qdot(a) = R(a) u^2(q(a)).
std::vector<double> concealed_velocity(const ConcealedField& conc,
                                       const TrajectoryField& traj);

struct LagrangianValue {
    double T_visible;
    double U_quantum;
    double L_prime;
};
LagrangianValue modified_lagrangian_value(const PhysicalParams& params,
                                          const LabelGrid& grid,
                                          const TrajectoryField& traj);

struct Classicality {
    std::vector<double> ratio;  // (hbar/2m)|u| / max(|qdot|, floor)
    double energy_ratio;        // U_quantum / T_visible
};
Classicality classicality(const PhysicalParams& params, const LabelGrid& grid,
                          const TrajectoryField& traj);

}  // namespace qflow
