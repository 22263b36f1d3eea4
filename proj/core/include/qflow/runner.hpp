#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qflow/energy.hpp"
#include "qflow/eulerian_reference.hpp"
#include "qflow/routh.hpp"
#include "qflow/scenario.hpp"

namespace qflow {

struct RunOptions {
    std::string out_dir;  // empty: compute only, write nothing
    bool quiet = false;
};

struct Metric {
    std::string name;
    double value = 0.0;
    std::optional<double> tolerance;
    bool pass = true;
};

/// Scalar diagnostics collected at each output time.
struct FrameDiagnostics {
    double t = 0.0;
    EnergyReport energy;
    double traj_err;        // sup |q - q_exact|; NaN without closed forms
    double conc_err;        // sup |(Q-Q0) - dQ_exact|
    double identity_resid;  // |T_concealed - U_quantum|
    double momentum_resid;  // sup |m rho0 u0^2 R - P|
    double jw_err;          // sup rel J*W drift over the comparison set
    double density_l2;      // L2 distance of mapped rho vs |psi|^2
    double energy_ratio;    // U_quantum / T_visible
};

struct FluidRunResult {
    ScenarioConfig config;
    double half_width = 0.0;  // after auto-widening
    bool widened = false;
    int n_sub = 1;
    int n_steps = 0;
    double masked_fraction = 0.0;   // labels with interpolated ratio R
    double jw_fraction = 0.0;       // labels in the J*W comparison set

    std::vector<FrameDiagnostics> frames;

    LabelGrid grid;
    TrajectoryField traj;
    ConcealedField conc;
    std::optional<EulerianFields> fields;
    std::optional<ConcealedEulerian> continuity;

    double trace_err;   // sup |advected trace - q(a,t)|; NaN without reference
    double V_l2_rel;    // continuity V vs mapped V at t_final, L2 relative

    double max_energy_drift() const;
    double max_traj_err() const;
    double max_conc_err() const;
    double max_jw_err() const;
    double max_identity_rel() const;  // vs T_concealed(0)
};

/// Relative |u0| threshold selecting labels for the J*W invariance check;
/// the excluded measure around density extrema is reported.
inline constexpr double kJwComparisonFloor = 0.05;

FluidRunResult run_fluid(const ScenarioConfig& config, const RunOptions& options = {});

struct RouthDemoResult {
    std::vector<double> t;
    std::vector<double> q_full, qdot_full, q_reduced, qdot_reduced;
    std::vector<double> Q, Qdot, momentum_drift;
    double equivalence_err = 0.0;  // sup |q_full - q_reduced|
    double traj_err = 0.0;         // sup |q_full - sqrt(1+t^2)|
    double conc_err = 0.0;         // sup |Q - arctan(t)|
    double momentum_drift_max = 0.0;
    double partition_resid = 0.0;  // sup |T_Q - V_q| along the path
    double energy_drift = 0.0;     // max relative drift of T_q + T_Q
};

RouthDemoResult run_routh_demo(const ScenarioConfig& config, const RunOptions& options = {});

struct RunReport {
    ScenarioKind scenario;
    std::vector<Metric> metrics;
    std::string text;
    bool ok = true;
};

/// Runs the configured scenario, writes the CSV set and report.txt when
/// out_dir is set, and returns the metric summary. Numerical failures write
/// a partial report and rethrow.
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct ConvergenceRow {
    double factor = 1.0;
    int n_labels = 0, m_grid = 0;
    double dt = 0.0;
    double traj_err, conc_err, density_l2, energy_drift, continuity_err;
};

struct ConvergenceOrders {
    double traj, conc, density, energy, continuity;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::vector<ConvergenceOrders> orders;  // between consecutive rows
    std::string text;
};

/// Reruns the scenario at each refinement factor (da, dt, dx together) and
/// reports observed Richardson orders.
ConvergenceTable converge(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace qflow
