#include "qflow/lagrangian_fluid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qflow {

namespace {
constexpr double kVelocityFloor = 1e-12;
constexpr double kSubstepSafety = 0.8;
}

ScalarPotential harmonic_potential(double mass, double omega, double center) {
    ScalarPotential pot;
    pot.value = [mass, omega, center](double x) {
        const double d = x - center;
        return 0.5 * mass * omega * omega * d * d;
    };
    pot.grad = [mass, omega, center](double x) {
        return mass * omega * omega * (x - center);
    };
    return pot;
}

InitialState gaussian_packet(double hbar, double mass, double sigma0,
                             double center, double p0) {
    if (sigma0 <= 0.0) throw ConfigError("gaussian_packet: sigma0 must be positive");
    InitialState init;
    init.center = center;
    init.sigma0 = sigma0;
    const double var = sigma0 * sigma0;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
    init.rho0 = [center, var, norm](double a) {
        const double d = a - center;
        return norm * std::exp(-0.5 * d * d / var);
    };
    init.v0 = [p0, mass](double) { return p0 / mass; };
    const double amp = std::sqrt(norm);
    init.psi0 = [center, var, amp, p0, hbar](double x) {
        const double d = x - center;
        const std::complex<double> phase(0.0, p0 * x / hbar);
        return amp * std::exp(-0.25 * d * d / var) * std::exp(phase);
    };
    return init;
}

double LabelGrid::quadrature(std::span<const double> f) const {
    double acc = 0.0;
    for (size_t i = 0; i < f.size(); ++i) acc += f[i] * weights[i];
    return acc;
}

FluidSystem init_scenario(const PhysicalParams& params, const GridSpec& spec,
                          const InitialState& init,
                          const std::function<double(double)>& Q0) {
    if (params.hbar <= 0.0 || params.mass <= 0.0 || params.dt <= 0.0)
        throw ConfigError("physical parameters must be positive");
    if (spec.n_labels < 16) throw ConfigError("n_labels too small (need >= 16)");

    double lo, hi;
    bool clipped = false;
    if (init.label_domain) {
        lo = init.label_domain->first;
        hi = init.label_domain->second;
    } else {
        // Natural domain: rho0 >= kDensityFloor * max for a Gaussian profile.
        const double r = init.sigma0 * std::sqrt(-2.0 * std::log(kDensityFloor));
        lo = init.center - r;
        hi = init.center + r;
    }
    if (spec.clip_half_width) {
        const double w = *spec.clip_half_width;
        if (lo < -w) { lo = -w; clipped = true; }
        if (hi > w) { hi = w; clipped = true; }
    }
    if (!(hi > lo)) throw ConfigError("label domain is empty");

    LabelGrid grid;
    const int n = spec.n_labels;
    grid.a.resize(n);
    grid.da = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) grid.a[i] = lo + i * grid.da;

    grid.rho0.resize(n);
    double rho_max = 0.0;
    for (int i = 0; i < n; ++i) {
        grid.rho0[i] = init.rho0(grid.a[i]);
        if (!(grid.rho0[i] > 0.0))
            throw ConfigError("rho0 must be positive on the retained domain");
        rho_max = std::max(rho_max, grid.rho0[i]);
    }
    if (clipped) {
        const double edge = std::max(grid.rho0.front(), grid.rho0.back());
        if (edge > 1e-3 * rho_max)
            throw ConfigError("domain too small: rho0 at the boundary exceeds 1e-3 of its peak");
    }

    grid.rho0_concealed = grid.rho0;
    grid.log_rho0.resize(n);
    for (int i = 0; i < n; ++i) grid.log_rho0[i] = std::log(grid.rho0[i]);

    grid.weights.assign(n, grid.da);
    grid.weights.front() *= 0.5;
    grid.weights.back() *= 0.5;

    const double total = grid.quadrature(grid.rho0);
    if (std::abs(total - 1.0) > 1e-6)
        throw ConfigError("rho0 is not normalized on the retained domain (integral = " +
                          std::to_string(total) + ")");

    // Extrapolated closure: the label-space derivative chain is composed
    // three deep through the evolving state, and the one-sided rows make
    // that feedback loop unstable regardless of the time step.
    grid.d_da = DiffOp(n, grid.da, 1, BoundaryClosure::Extrapolated);

    // Sponge ramp: 0 at rho0 = kSpongeFloor*max, 1 at the retention floor,
    // quadratic in log-density between.
    grid.sponge.assign(n, 0.0);
    const double log_top = std::log(kSpongeFloor * rho_max);
    const double log_bot = std::log(kDensityFloor * rho_max);
    for (int i = 0; i < n; ++i) {
        if (grid.log_rho0[i] < log_top) {
            const double s = (log_top - grid.log_rho0[i]) / (log_top - log_bot);
            grid.sponge[i] = std::min(1.0, s * s);
        }
    }

    FluidSystem sys;
    sys.grid = std::move(grid);

    TrajectoryField& traj = sys.traj;
    traj.q = sys.grid.a;
    traj.qdot.resize(n);
    for (int i = 0; i < n; ++i) traj.qdot[i] = init.v0(sys.grid.a[i]);
    traj.t = 0.0;
    jacobian_and_u(sys.grid, traj);
    traj.u0 = traj.u;

    sys.conc = make_concealed(params, sys.grid, traj, Q0);
    return sys;
}

void jacobian_and_u(const LabelGrid& grid, TrajectoryField& traj) {
    const int n = grid.size();
    traj.J.resize(n);
    traj.u.resize(n);
    grid.d_da.apply(traj.q, traj.J);
    for (int i = 0; i < n; ++i) {
        if (!(traj.J[i] > 0.0))
            throw NumericalError("trajectory crossing: J <= 0 at label " + std::to_string(i) +
                                 " (a = " + std::to_string(grid.a[i]) + ", t = " +
                                 std::to_string(traj.t) + ")");
    }
    // u = (1/J) d/da [log rho0 - log J]
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = grid.log_rho0[i] - std::log(traj.J[i]);
    grid.d_da.apply(g, traj.u);
    for (int i = 0; i < n; ++i) traj.u[i] /= traj.J[i];
}

std::vector<double> quantum_force(const PhysicalParams& params, const LabelGrid& grid,
                                  const TrajectoryField& traj) {
    const int n = grid.size();
    const double coeff = params.hbar * params.hbar / (4.0 * params.mass);

    // du/dq, then Q_B = -(hbar^2/4m)(du/dq + u^2/2), then -dQ_B/dq.
    std::vector<double> work(n), qb(n), force(n);
    grid.d_da.apply(traj.u, work);
    for (int i = 0; i < n; ++i) {
        const double du_dq = work[i] / traj.J[i];
        qb[i] = -coeff * (du_dq + 0.5 * traj.u[i] * traj.u[i]);
    }
    grid.d_da.apply(qb, work);
    for (int i = 0; i < n; ++i) force[i] = -work[i] / traj.J[i];

    if (params.external)
        for (int i = 0; i < n; ++i) force[i] -= params.external->grad(traj.q[i]);

    for (int i = 0; i < n; ++i)
        if (!std::isfinite(force[i]))
            throw NumericalError("non-finite force at label " + std::to_string(i) +
                                 " (a = " + std::to_string(grid.a[i]) + ")");
    return force;
}

double quantum_stable_dt(const PhysicalParams& params, const LabelGrid& grid) {
    // Linearizing the quantum force about a smooth background gives the free
    // dispersion omega = hbar k_eff^2 / 2m with k_eff = eta/h capped by the
    // stencil symbol; Verlet requires omega * dt <= 2.
    const double eta = grid.d_da.max_symbol();
    return 4.0 * params.mass * grid.da * grid.da / (params.hbar * eta * eta);
}

int visible_substeps(const PhysicalParams& params, const LabelGrid& grid) {
    const double dt_stable = kSubstepSafety * quantum_stable_dt(params, grid);
    return std::max(1, static_cast<int>(std::ceil(params.dt / dt_stable)));
}

namespace {

// High-pass biharmonic residual, damped inside the sponge only. Exact on
// cubic fields, so the smooth trajectory bundle passes through untouched.
void sponge_absorb(const LabelGrid& grid, std::vector<double>& field,
                   std::vector<double>& work) {
    const int n = grid.size();
    work.assign(n, 0.0);
    for (int i = 2; i < n - 2; ++i) {
        if (grid.sponge[i] == 0.0) continue;
        work[i] = grid.sponge[i] / 16.0 *
                  (field[i - 2] - 4.0 * field[i - 1] + 6.0 * field[i] -
                   4.0 * field[i + 1] + field[i + 2]);
    }
    for (int i = 2; i < n - 2; ++i) field[i] -= work[i];
}

// Global 16th-order low-pass: removes the sin^16(theta/2) component. The
// damping is O(theta^16) on resolved scales but order one near the grid
// scale, where the stencil group velocity vanishes and noise would grow in
// place instead of draining into the sponge.
void grid_scale_filter(std::vector<double>& field, std::vector<double>& r,
                       std::vector<double>& s) {
    const int n = static_cast<int>(field.size());
    r = field;
    for (int pass = 0; pass < 8; ++pass) {
        s.assign(n, 0.0);
        for (int i = 1; i < n - 1; ++i)
            s[i] = 0.25 * (2.0 * r[i] - r[i - 1] - r[i + 1]);
        std::swap(r, s);
    }
    for (int i = 0; i < n; ++i) field[i] -= r[i];
}

}  // namespace

void step_visible(const PhysicalParams& params, const LabelGrid& grid,
                  TrajectoryField& traj, int n_sub) {
    if (n_sub <= 0) n_sub = visible_substeps(params, grid);
    const double dt = params.dt / n_sub;
    const double t0 = traj.t;
    const int n = grid.size();

    std::vector<double> work, w2, w3;
    std::vector<double> f = quantum_force(params, grid, traj);
    for (int s = 0; s < n_sub; ++s) {
        for (int i = 0; i < n; ++i) {
            traj.qdot[i] += 0.5 * dt * f[i] / params.mass;
            traj.q[i] += dt * traj.qdot[i];
        }
        sponge_absorb(grid, traj.q, work);
        grid_scale_filter(traj.q, w2, w3);
        traj.t = t0 + (s + 1 < n_sub ? (s + 1) * dt : params.dt);
        jacobian_and_u(grid, traj);
        f = quantum_force(params, grid, traj);
        for (int i = 0; i < n; ++i) traj.qdot[i] += 0.5 * dt * f[i] / params.mass;
        sponge_absorb(grid, traj.qdot, work);
        grid_scale_filter(traj.qdot, w2, w3);
    }
}

std::vector<double> initial_concealed_velocity(const PhysicalParams& params,
                                               const TrajectoryField& traj) {
    const double c = 0.5 * params.hbar / params.mass;
    std::vector<double> out(traj.u0.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = c * traj.u0[i];
    return out;
}

std::vector<double> concealed_momenta(const PhysicalParams& params, const LabelGrid& grid,
                                      std::span<const double> Qdot0) {
    std::vector<double> P(Qdot0.size());
    for (size_t i = 0; i < P.size(); ++i)
        P[i] = params.mass * grid.rho0[i] * Qdot0[i];
    return P;
}

ConcealedField make_concealed(const PhysicalParams& params, const LabelGrid& grid,
                              const TrajectoryField& traj,
                              const std::function<double(double)>& Q0) {
    const int n = grid.size();
    ConcealedField conc;
    conc.Q0.resize(n);
    for (int i = 0; i < n; ++i) conc.Q0[i] = Q0 ? Q0(grid.a[i]) : grid.a[i];
    conc.Qdot0 = initial_concealed_velocity(params, traj);
    conc.P = concealed_momenta(params, grid, conc.Qdot0);

    // R = Qdot0 / (u0.u0) = (hbar/2m) / u0, interpolated across labels where
    // u0 is too small for the ratio to be meaningful. The product R*I stays
    // finite there because I ~ u0^2 near a density extremum.
    double u0_max = 0.0;
    for (int i = 0; i < n; ++i) u0_max = std::max(u0_max, std::abs(traj.u0[i]));
    const double floor = kRatioMaskFloor * u0_max;

    conc.R.assign(n, 0.0);
    conc.masked.assign(n, 0);
    const double c = 0.5 * params.hbar / params.mass;
    int n_masked = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(traj.u0[i]) > floor && u0_max > 0.0) {
            conc.R[i] = c / traj.u0[i];
        } else {
            conc.masked[i] = 1;
            ++n_masked;
        }
    }
    if (n_masked == n) {
        // Uniform density: concealed flow frozen.
        std::fill(conc.R.begin(), conc.R.end(), 0.0);
    } else if (n_masked > 0) {
        for (int i = 0; i < n; ++i) {
            if (!conc.masked[i]) continue;
            int l = i - 1, r = i + 1;
            while (l >= 0 && conc.masked[l]) --l;
            while (r < n && conc.masked[r]) ++r;
            if (l >= 0 && r < n) {
                const double w = (grid.a[i] - grid.a[l]) / (grid.a[r] - grid.a[l]);
                conc.R[i] = (1.0 - w) * conc.R[l] + w * conc.R[r];
            } else if (l >= 0) {
                conc.R[i] = conc.R[l];
            } else {
                conc.R[i] = conc.R[r];
            }
        }
    }

    conc.I.assign(n, 0.0);
    conc.Q = conc.Q0;
    conc.u2_prev.resize(n);
    for (int i = 0; i < n; ++i) conc.u2_prev[i] = traj.u0[i] * traj.u0[i];
    return conc;
}

void advance_concealed(ConcealedField& conc, const TrajectoryField& traj, double dt) {
    const size_t n = conc.I.size();
    for (size_t i = 0; i < n; ++i) {
        const double u2 = traj.u[i] * traj.u[i];
        conc.I[i] += 0.5 * dt * (conc.u2_prev[i] + u2);
        conc.u2_prev[i] = u2;
        conc.Q[i] = conc.Q0[i] + conc.R[i] * conc.I[i];
    }
}

std::vector<double> concealed_velocity(const ConcealedField& conc,
                                       const TrajectoryField& traj) {
    std::vector<double> out(conc.R.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = conc.R[i] * traj.u[i] * traj.u[i];
    return out;
}

LagrangianValue modified_lagrangian_value(const PhysicalParams& params,
                                          const LabelGrid& grid,
                                          const TrajectoryField& traj) {
    const int n = grid.size();
    std::vector<double> tker(n), uq(n);
    const double cu = params.hbar * params.hbar / (8.0 * params.mass);
    for (int i = 0; i < n; ++i) {
        tker[i] = 0.5 * params.mass * grid.rho0[i] * traj.qdot[i] * traj.qdot[i];
        uq[i] = cu * grid.rho0[i] * traj.u[i] * traj.u[i];
    }
    LagrangianValue val;
    val.T_visible = grid.quadrature(tker);
    val.U_quantum = grid.quadrature(uq);
    val.L_prime = val.T_visible - val.U_quantum;
    return val;
}

Classicality classicality(const PhysicalParams& params, const LabelGrid& grid,
                          const TrajectoryField& traj) {
    const int n = grid.size();
    Classicality out;
    out.ratio.resize(n);
    const double c = 0.5 * params.hbar / params.mass;
    for (int i = 0; i < n; ++i)
        out.ratio[i] = c * std::abs(traj.u[i]) / std::max(std::abs(traj.qdot[i]), kVelocityFloor);
    const LagrangianValue val = modified_lagrangian_value(params, grid, traj);
    out.energy_ratio = val.U_quantum / std::max(val.T_visible, 1e-30);
    return out;
}

}  // namespace qflow
