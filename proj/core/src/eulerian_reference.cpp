#include "qflow/eulerian_reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qflow/interp.hpp"

namespace qflow {

double EulerianFields::quadrature(std::span<const double> f) const {
    return trapezoid(f, dx);
}

EulerianFields make_eulerian_fields(const PhysicalParams& params, int m_grid,
                                    double half_width,
                                    const std::function<std::complex<double>(double)>& psi0) {
    if (m_grid < 16) throw ConfigError("m_grid too small (need >= 16)");
    if (half_width <= 0.0) throw ConfigError("half_width must be positive");

    EulerianFields f;
    f.hbar_over_mass = params.hbar / params.mass;
    const int m = m_grid;
    f.x.resize(m);
    f.dx = 2.0 * half_width / (m - 1);
    for (int i = 0; i < m; ++i) f.x[i] = -half_width + i * f.dx;

    f.psi.resize(m);
    for (int i = 0; i < m; ++i) f.psi[i] = psi0(f.x[i]);
    f.psi.front() = 0.0;  // Dirichlet walls
    f.psi.back() = 0.0;

    f.d_dx = DiffOp(m, f.dx, 1);
    f.t = 0.0;
    polar_fields(f);
    return f;
}

void cn_step(EulerianFields& f, const PhysicalParams& params) {
    using cd = std::complex<double>;
    const int m = f.size();
    const double dx2 = f.dx * f.dx;
    const double kin = params.hbar * params.hbar / (2.0 * params.mass);
    const cd lambda = cd(0.0, params.dt / (2.0 * params.hbar));

    // (1 + i dt H / 2hbar) psi^{n+1} = (1 - i dt H / 2hbar) psi^n with
    // H = -(hbar^2/2m) D2 + V on the interior; psi = 0 at the walls.
    const cd off = lambda * (-kin / dx2);
    std::vector<cd> diag(m), rhs(m);
    for (int i = 0; i < m; ++i) {
        const double V = params.external ? params.external->value(f.x[i]) : 0.0;
        const cd hdiag = 2.0 * kin / dx2 + V;
        diag[i] = 1.0 + lambda * hdiag;
        const cd left = (i > 0) ? f.psi[i - 1] : cd(0.0);
        const cd right = (i + 1 < m) ? f.psi[i + 1] : cd(0.0);
        rhs[i] = (1.0 - lambda * hdiag) * f.psi[i] - off * (left + right);
    }

    // Thomas algorithm over the interior points.
    std::vector<cd> cprime(m), dprime(m);
    const int lo = 1, hi = m - 2;
    cd beta = diag[lo];
    if (std::abs(beta) == 0.0) throw NumericalError("Crank-Nicolson tridiagonal breakdown");
    cprime[lo] = off / beta;
    dprime[lo] = rhs[lo] / beta;
    for (int i = lo + 1; i <= hi; ++i) {
        beta = diag[i] - off * cprime[i - 1];
        if (std::abs(beta) == 0.0) throw NumericalError("Crank-Nicolson tridiagonal breakdown");
        cprime[i] = off / beta;
        dprime[i] = (rhs[i] - off * dprime[i - 1]) / beta;
    }
    f.psi[hi] = dprime[hi];
    for (int i = hi - 1; i >= lo; --i) f.psi[i] = dprime[i] - cprime[i] * f.psi[i + 1];
    f.psi.front() = 0.0;
    f.psi.back() = 0.0;

    f.t += params.dt;
    polar_fields(f);
}

void polar_fields(EulerianFields& f) {
    const int m = f.size();
    f.rho.resize(m);
    double rho_max = 0.0;
    for (int i = 0; i < m; ++i) {
        f.rho[i] = std::norm(f.psi[i]);
        rho_max = std::max(rho_max, f.rho[i]);
    }
    const double floor = kEulerianRhoFloor * rho_max;

    std::vector<std::complex<double>> dpsi(m);
    f.d_dx.apply(f.psi, dpsi);
    std::vector<double> drho(m);
    f.d_dx.apply(f.rho, drho);

    f.v.assign(m, 0.0);
    f.u.assign(m, 0.0);
    f.valid.assign(m, 0);
    for (int i = 0; i < m; ++i) {
        if (f.rho[i] >= floor && f.rho[i] > 0.0) {
            f.valid[i] = 1;
            // j = (hbar/m) Im(psi* dpsi); v = j/rho avoids phase unwrapping.
            f.v[i] = f.hbar_over_mass * std::imag(std::conj(f.psi[i]) * dpsi[i]) / f.rho[i];
            f.u[i] = drho[i] / f.rho[i];
        }
    }
}

std::vector<double> reconstruct_phase(const EulerianFields& f, double mass) {
    std::vector<double> s(f.size(), 0.0);
    std::vector<double> mv(f.size(), 0.0);
    for (int i = 0; i < f.size(); ++i) mv[i] = mass * f.v[i];
    return cumulative_trapezoid(mv, f.dx);
}

TraceBundle advect_trace(const VelocityHistory& hist, std::span<const double> labels) {
    if (hist.times.size() != hist.v.size() || hist.times.size() < 2)
        throw ConfigError("advect_trace: velocity history must hold >= 2 snapshots");

    TraceBundle out;
    out.labels.assign(labels.begin(), labels.end());
    out.times = hist.times;
    out.escaped.assign(labels.size(), 0);
    out.q.resize(hist.times.size());
    out.q[0] = out.labels;

    const double x0 = hist.x.front();
    const double x1 = hist.x.back();

    auto sample = [&](const std::vector<double>& va, const std::vector<double>& vb,
                      double w, double xq) {
        const double fa = cubic_sample(va, x0, hist.dx, xq);
        const double fb = cubic_sample(vb, x0, hist.dx, xq);
        return (1.0 - w) * fa + w * fb;
    };

    std::vector<double> q = out.labels;
    for (size_t n = 0; n + 1 < hist.times.size(); ++n) {
        const double dt = hist.times[n + 1] - hist.times[n];
        const auto& va = hist.v[n];
        const auto& vb = hist.v[n + 1];
        for (size_t i = 0; i < q.size(); ++i) {
            if (out.escaped[i]) continue;
            const double k1 = sample(va, vb, 0.0, q[i]);
            const double k2 = sample(va, vb, 0.5, q[i] + 0.5 * dt * k1);
            const double k3 = sample(va, vb, 0.5, q[i] + 0.5 * dt * k2);
            const double k4 = sample(va, vb, 1.0, q[i] + dt * k3);
            q[i] += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (q[i] < x0 || q[i] > x1) out.escaped[i] = 1;
        }
        out.q[n + 1] = q;
    }
    return out;
}

ConcealedEulerian init_concealed_eulerian(const EulerianFields& f,
                                          const PhysicalParams& params) {
    const int m = f.size();
    ConcealedEulerian c;
    c.W.assign(m, 0.0);
    c.V.assign(m, 0.0);
    c.mask.assign(m, 1);

    double u_max = 0.0;
    for (int i = 0; i < m; ++i) u_max = std::max(u_max, std::abs(f.u[i]));
    const double floor = kEulerianUMask * u_max;
    const double ratio = 0.5 * params.hbar / params.mass;

    int n_open = 0;
    for (int i = 0; i < m; ++i) {
        if (f.valid[i] && std::abs(f.u[i]) > floor) {
            c.mask[i] = 0;
            c.W[i] = ratio / f.u[i];  // V0/u0^2 with V0 = (hbar/2m) u0
            c.V[i] = ratio * f.u[i];
            ++n_open;
        }
    }
    if (n_open == 0) return c;  // uniform density: W stays zero

    for (int i = 0; i < m; ++i) {
        if (!c.mask[i]) continue;
        int l = i - 1, r = i + 1;
        while (l >= 0 && c.mask[l]) --l;
        while (r < m && c.mask[r]) ++r;
        if (l >= 0 && r < m) {
            const double w = static_cast<double>(i - l) / (r - l);
            c.W[i] = (1.0 - w) * c.W[l] + w * c.W[r];
        } else if (l >= 0) {
            c.W[i] = c.W[l];
        } else if (r < m) {
            c.W[i] = c.W[r];
        }
    }
    return c;
}

std::vector<double> advection_velocity(const EulerianFields& f) {
    const int m = f.size();
    std::vector<double> v = f.v;
    double rho_max = 0.0;
    for (double r : f.rho) rho_max = std::max(rho_max, r);
    const double anchor = 1e-6 * rho_max;
    int l = 0, r = m - 1;
    while (l < m && f.rho[l] < anchor) ++l;
    while (r >= 0 && f.rho[r] < anchor) --r;
    if (l >= r) return v;  // nothing trustworthy; leave as is
    const int span = std::min(8, r - l);
    const double slope_l = (v[l + span] - v[l]) / (span * f.dx);
    const double slope_r = (v[r] - v[r - span]) / (span * f.dx);
    for (int i = 0; i < l; ++i) v[i] = v[l] + slope_l * (i - l) * f.dx;
    for (int i = r + 1; i < m; ++i) v[i] = v[r] + slope_r * (i - r) * f.dx;
    return v;
}

void concealed_continuity_step(ConcealedEulerian& c, const EulerianFields& f, double dt) {
    const int m = f.size();
    const std::vector<double> v = advection_velocity(f);
    double v_max = 0.0;
    for (int i = 0; i < m; ++i) v_max = std::max(v_max, std::abs(v[i]));
    const double cfl = dt * v_max / f.dx;
    if (cfl > 0.9)
        throw NumericalError("concealed continuity: CFL " + std::to_string(cfl) +
                             " exceeds 0.9; reduce dt or refine the grid");

    std::vector<double> flux(m + 1, 0.0);  // flux[i] at face between i-1 and i
    for (int i = 1; i < m; ++i) {
        const double vf = 0.5 * (v[i - 1] + v[i]);
        flux[i] = vf >= 0.0 ? vf * c.W[i - 1] : vf * c.W[i];
    }
    // Outer faces keep zero flux; scenarios are compact and v vanishes there.
    for (int i = 0; i < m; ++i) c.W[i] -= dt / f.dx * (flux[i + 1] - flux[i]);

    double u_max = 0.0;
    for (int i = 0; i < m; ++i) u_max = std::max(u_max, std::abs(f.u[i]));
    const double floor = kEulerianUMask * u_max;
    for (int i = 0; i < m; ++i) {
        const bool open = f.valid[i] && std::abs(f.u[i]) > floor;
        c.mask[i] = open ? 0 : 1;
        c.V[i] = open ? c.W[i] * f.u[i] * f.u[i] : 0.0;
    }
}

MappedFields lagrangian_to_eulerian(const LabelGrid& grid, const TrajectoryField& traj,
                                    const ConcealedField& conc,
                                    std::span<const double> x) {
    const int n = grid.size();
    for (int i = 1; i < n; ++i)
        if (!(traj.q[i] > traj.q[i - 1]))
            throw NumericalError("lagrangian_to_eulerian: q(a) is not strictly increasing");

    std::vector<double> rho_t(n), v_conc(n);
    for (int i = 0; i < n; ++i) {
        rho_t[i] = grid.rho0[i] / traj.J[i];
        v_conc[i] = conc.R[i] * traj.u[i] * traj.u[i] / traj.J[i];
    }
    const MonotoneCubic rho_of_q(traj.q, rho_t);
    const MonotoneCubic V_of_q(traj.q, v_conc);

    MappedFields out;
    out.rho.assign(x.size(), 0.0);
    out.V.assign(x.size(), 0.0);
    out.valid.assign(x.size(), 0);
    for (size_t k = 0; k < x.size(); ++k) {
        if (x[k] < traj.q.front() || x[k] > traj.q.back()) continue;
        out.valid[k] = 1;
        out.rho[k] = rho_of_q(x[k]);
        out.V[k] = V_of_q(x[k]);
    }
    return out;
}

}  // namespace qflow
