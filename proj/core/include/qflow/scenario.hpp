#pragma once

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "qflow/lagrangian_fluid.hpp"

namespace qflow {

enum class ScenarioKind {
    GaussianFree,
    GaussianBoosted,
    HarmonicCoherent,
    RouthDemo,
    Custom,
};

std::string scenario_name(ScenarioKind kind);
ScenarioKind scenario_from_name(const std::string& name);  // throws ConfigError

/// Parsed and validated run configuration. Plain-text format: key=value
/// lines, '#' comments, sections [physical] / [numerics] / [toggles];
/// `scenario` stands alone before the first section. Unknown keys are
/// errors.
struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::GaussianFree;

    // [physical]
    double hbar = 1.0;
    double mass = 1.0;
    double sigma0 = 1.0;
    double p0 = 0.0;
    double omega = 0.0;
    double x0 = 0.0;

    // [numerics]
    int n_labels = 1024;
    int m_grid = 4096;
    double dt = 1e-3;
    double t_final = 2.0;
    double half_width = 12.5;
    int output_stride = 20;
    int label_output_stride = 0;  // 0 = auto (~256 labels per frame)
    int x_output_stride = 0;      // 0 = auto (~512 grid points per frame)
    double traj_tol = 5e-3;
    double conc_tol = 5e-3;

    // [toggles]
    bool run_reference = true;
    bool run_concealed = true;
    std::vector<double> convergence_levels{1.0, 2.0};

    bool sigma0_explicit = false;
    bool half_width_explicit = false;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig default_config(ScenarioKind kind);

/// Everything the runner needs to set up a fluid scenario: physics, initial
/// data, the (possibly widened) spatial half-width and, for the analytic
/// scenarios, closed-form references used in reports.
struct ScenarioSetup {
    PhysicalParams params;
    InitialState initial;
    double half_width = 0.0;
    bool widened = false;

    bool has_closed_forms = false;
    std::function<double(double a, double t)> q_exact;
    std::function<double(double a, double t)> dQ_exact;  // Q(a,t) - Q0(a)
};

/// Builds the setup for the fluid scenarios (everything except routh-demo).
ScenarioSetup build_scenario(const ScenarioConfig& config);

}  // namespace qflow
