#pragma once

#include "qflow/eulerian_reference.hpp"
#include "qflow/lagrangian_fluid.hpp"

namespace qflow {

/// One row of the energy ledger. The four H values agree up to the stated
/// discretization tolerances; H_metric equals T_visible + T_concealed by
/// construction and guards the bookkeeping.
struct EnergyReport {
    double t = 0.0;
    double T_visible = 0.0;
    double T_concealed = 0.0;
    double V_external = 0.0;
    double H_lagrangian = 0.0;
    double H_eulerian = 0.0;   // NaN when the reference solver is off
    double H_operator = 0.0;   // NaN when the reference solver is off
    double H_metric = 0.0;
};

struct KineticSplit {
    double T_visible;
    double T_concealed;
};

/// T_visible = sum 1/2 m rho0 qdot^2; T_concealed through the regularized
/// ratio: sum 1/2 m rho0 u0^2 R^2 u^2 (equals the quantum potential energy).
KineticSplit energy_lagrangian(const PhysicalParams& params, const LabelGrid& grid,
                               const TrajectoryField& traj, const ConcealedField& conc);

/// Kinetic functional on the spatial grid: int [1/2 m rho v^2 +
/// (hbar^2/8m) rho u^2] dx. External potential handled separately.
double energy_eulerian(const PhysicalParams& params, const EulerianFields& fields);

/// int rho V dx on the spatial grid.
double potential_expectation_eulerian(const PhysicalParams& params,
                                      const EulerianFields& fields);

/// int rho0 V(q) da on labels (the Lagrangian form of <V>).
double external_potential_energy(const PhysicalParams& params, const LabelGrid& grid,
                                 const TrajectoryField& traj);

struct OperatorEnergy {
    double value;                   // (hbar^2/2m) int |psi'|^2 dx (+ <V>)
    double second_derivative_form;  // -(hbar^2/2m) int Re(psi* psi'') dx (+ <V>)
};

/// Kinetic operator expectation in the integrated-by-parts form (manifestly
/// real); the second-derivative form is reported as a discretization check.
OperatorEnergy energy_operator(const PhysicalParams& params, const EulerianFields& fields);

/// Block-metric form: per-label contraction of diag(1, u0^2/u^2) with
/// (qdot, Qdot). Independent code path for T_visible + T_concealed.
double energy_metric(const PhysicalParams& params, const LabelGrid& grid,
                     const TrajectoryField& traj, const ConcealedField& conc);

/// Assembles the full ledger row; fields may be null when the reference
/// solver is disabled.
EnergyReport make_energy_report(const PhysicalParams& params, const LabelGrid& grid,
                                const TrajectoryField& traj, const ConcealedField& conc,
                                const EulerianFields* fields);

}  // namespace qflow
