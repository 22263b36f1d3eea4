#include "qflow/energy.hpp"

#include <cmath>
#include <limits>

namespace qflow {

KineticSplit energy_lagrangian(const PhysicalParams& params, const LabelGrid& grid,
                               const TrajectoryField& traj, const ConcealedField& conc) {
    const int n = grid.size();
    std::vector<double> tv(n), tc(n);
    for (int i = 0; i < n; ++i) {
        tv[i] = 0.5 * params.mass * grid.rho0[i] * traj.qdot[i] * traj.qdot[i];
        // 1/2 m rho0 (u0.u0)(u.u)^-1 Qdot^2 with Qdot = R u^2 collapses to
        // 1/2 m rho0 u0^2 R^2 u^2, finite through the regularized R.
        const double u0 = traj.u0[i];
        const double u2 = traj.u[i] * traj.u[i];
        tc[i] = 0.5 * params.mass * grid.rho0[i] * u0 * u0 * conc.R[i] * conc.R[i] * u2;
    }
    return {grid.quadrature(tv), grid.quadrature(tc)};
}

double energy_eulerian(const PhysicalParams& params, const EulerianFields& f) {
    const int m = f.size();
    std::vector<double> density(m);
    const double cu = params.hbar * params.hbar / (8.0 * params.mass);
    for (int i = 0; i < m; ++i)
        density[i] = 0.5 * params.mass * f.rho[i] * f.v[i] * f.v[i] +
                     cu * f.rho[i] * f.u[i] * f.u[i];
    return f.quadrature(density);
}

double potential_expectation_eulerian(const PhysicalParams& params,
                                      const EulerianFields& f) {
    if (!params.external) return 0.0;
    std::vector<double> density(f.size());
    for (int i = 0; i < f.size(); ++i)
        density[i] = f.rho[i] * params.external->value(f.x[i]);
    return f.quadrature(density);
}

double external_potential_energy(const PhysicalParams& params, const LabelGrid& grid,
                                 const TrajectoryField& traj) {
    if (!params.external) return 0.0;
    std::vector<double> density(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        density[i] = grid.rho0[i] * params.external->value(traj.q[i]);
    return grid.quadrature(density);
}

OperatorEnergy energy_operator(const PhysicalParams& params, const EulerianFields& f) {
    const int m = f.size();
    const double kin = params.hbar * params.hbar / (2.0 * params.mass);

    std::vector<std::complex<double>> dpsi(m);
    f.d_dx.apply(f.psi, dpsi);
    std::vector<double> grad2(m);
    for (int i = 0; i < m; ++i) grad2[i] = std::norm(dpsi[i]);

    DiffOp d2(m, f.dx, 2);
    std::vector<std::complex<double>> ddpsi(m);
    d2.apply(f.psi, ddpsi);
    std::vector<double> lap(m);
    for (int i = 0; i < m; ++i)
        lap[i] = -std::real(std::conj(f.psi[i]) * ddpsi[i]);

    const double vexp = potential_expectation_eulerian(params, f);
    OperatorEnergy out;
    out.value = kin * f.quadrature(grad2) + vexp;
    out.second_derivative_form = kin * f.quadrature(lap) + vexp;
    return out;
}

double energy_metric(const PhysicalParams& params, const LabelGrid& grid,
                     const TrajectoryField& traj, const ConcealedField& conc) {
    // Explicit 2x2 block contraction per label: xi_dot = (qdot, Qdot),
    // g = diag(1, u0^2/u^2). Guarded where u underflows; there the concealed
    // entry is evaluated in its collapsed finite form.
    const int n = grid.size();
    std::vector<double> density(n);
    for (int i = 0; i < n; ++i) {
        const double u = traj.u[i];
        const double u0 = traj.u0[i];
        const double qdot = traj.qdot[i];
        const double Qdot = conc.R[i] * u * u;
        double concealed_term;
        if (std::abs(u) > 1e-300) {
            const double g_conc = (u0 * u0) / (u * u);
            concealed_term = g_conc * Qdot * Qdot;
        } else {
            concealed_term = u0 * u0 * conc.R[i] * conc.R[i] * u * u;
        }
        density[i] = 0.5 * params.mass * grid.rho0[i] * (qdot * qdot + concealed_term);
    }
    return grid.quadrature(density);
}

EnergyReport make_energy_report(const PhysicalParams& params, const LabelGrid& grid,
                                const TrajectoryField& traj, const ConcealedField& conc,
                                const EulerianFields* fields) {
    EnergyReport r;
    r.t = traj.t;
    const KineticSplit split = energy_lagrangian(params, grid, traj, conc);
    r.T_visible = split.T_visible;
    r.T_concealed = split.T_concealed;
    r.V_external = external_potential_energy(params, grid, traj);
    r.H_lagrangian = r.T_visible + r.T_concealed + r.V_external;
    r.H_metric = energy_metric(params, grid, traj, conc) + r.V_external;
    if (fields) {
        r.H_eulerian = energy_eulerian(params, *fields) +
                       potential_expectation_eulerian(params, *fields);
        r.H_operator = energy_operator(params, *fields).value;
    } else {
        r.H_eulerian = std::numeric_limits<double>::quiet_NaN();
        r.H_operator = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace qflow
