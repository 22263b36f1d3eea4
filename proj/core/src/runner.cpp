#include "qflow/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qflow/interp.hpp"

namespace qflow {

namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

class CsvFile {
public:
    void open(const fs::path& p, const std::string& header) {
        out_.open(p);
        if (!out_) throw ConfigError("cannot open output file " + p.string());
        out_ << header << '\n';
    }
    bool is_open() const { return out_.is_open(); }
    void row(std::initializer_list<double> vals) {
        if (!out_.is_open()) return;
        bool first = true;
        for (double v : vals) {
            if (!first) out_ << ',';
            out_ << fmt(v);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

int step_count(double t_final, double dt) {
    const long long n = std::llround(t_final / dt);
    if (n < 0) throw ConfigError("negative step count");
    if (n > 50'000'000) throw ConfigError("t_final/dt exceeds the step budget");
    return static_cast<int>(n);
}

/// One RK4 step of dq/dt = v(q,t) between snapshots va (at t) and vb
/// (at t+dt), cubic in x and linear in t.
void advect_between(std::span<const double> va, std::span<const double> vb,
                    double x0, double dx, double x1, double dt,
                    std::span<double> q, std::span<std::uint8_t> escaped) {
    auto sample = [&](double w, double xq) {
        const double fa = cubic_sample(va, x0, dx, xq);
        const double fb = cubic_sample(vb, x0, dx, xq);
        return (1.0 - w) * fa + w * fb;
    };
    for (size_t i = 0; i < q.size(); ++i) {
        if (escaped[i]) continue;
        const double k1 = sample(0.0, q[i]);
        const double k2 = sample(0.5, q[i] + 0.5 * dt * k1);
        const double k3 = sample(0.5, q[i] + 0.5 * dt * k2);
        const double k4 = sample(1.0, q[i] + dt * k3);
        q[i] += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (q[i] < x0 || q[i] > x1) escaped[i] = 1;
    }
}

double observed_order(double coarse, double fine, double factor_ratio) {
    if (!(coarse > 0.0) || !(fine > 0.0) || !(factor_ratio > 1.0)) return kNaN;
    return std::log(coarse / fine) / std::log(factor_ratio);
}

}  // namespace

double FluidRunResult::max_energy_drift() const {
    if (frames.empty()) return 0.0;
    const double h0 = frames.front().energy.H_lagrangian;
    double drift = 0.0;
    for (const auto& f : frames)
        drift = std::max(drift, std::abs(f.energy.H_lagrangian - h0));
    return drift / std::max(std::abs(h0), 1e-300);
}

double FluidRunResult::max_traj_err() const {
    double m = kNaN;
    for (const auto& f : frames)
        if (std::isfinite(f.traj_err)) m = std::isfinite(m) ? std::max(m, f.traj_err) : f.traj_err;
    return m;
}

double FluidRunResult::max_conc_err() const {
    double m = kNaN;
    for (const auto& f : frames)
        if (std::isfinite(f.conc_err)) m = std::isfinite(m) ? std::max(m, f.conc_err) : f.conc_err;
    return m;
}

double FluidRunResult::max_jw_err() const {
    double m = kNaN;
    for (const auto& f : frames)
        if (std::isfinite(f.jw_err)) m = std::isfinite(m) ? std::max(m, f.jw_err) : f.jw_err;
    return m;
}

double FluidRunResult::max_identity_rel() const {
    if (frames.empty()) return 0.0;
    const double t0 = std::max(frames.front().energy.T_concealed, 1e-300);
    double m = 0.0;
    for (const auto& f : frames) m = std::max(m, f.identity_resid / t0);
    return m;
}

FluidRunResult run_fluid(const ScenarioConfig& config, const RunOptions& options) {
    const ScenarioSetup setup = build_scenario(config);
    if (setup.widened && !options.quiet)
        std::fprintf(stderr,
                     "warning: half_width widened from %g to %g to keep the domain walls dark\n",
                     config.half_width, setup.half_width);

    const PhysicalParams& params = setup.params;
    GridSpec gspec;
    gspec.n_labels = config.n_labels;
    gspec.clip_half_width = setup.half_width;
    FluidSystem sys = init_scenario(params, gspec, setup.initial);
    LabelGrid& grid = sys.grid;
    TrajectoryField& traj = sys.traj;
    ConcealedField& conc = sys.conc;
    const int n = grid.size();

    FluidRunResult result;
    result.config = config;
    result.half_width = setup.half_width;
    result.widened = setup.widened;
    result.n_sub = visible_substeps(params, grid);
    result.trace_err = kNaN;
    result.V_l2_rel = kNaN;

    int n_masked = 0;
    for (auto m : conc.masked) n_masked += m;
    result.masked_fraction = static_cast<double>(n_masked) / n;

    // Labels entering the J*W invariance comparison: away from density
    // extrema, where W = V/u^2 is regular.
    std::vector<int> jw_idx;
    {
        double u0_max = 0.0;
        for (double u : traj.u0) u0_max = std::max(u0_max, std::abs(u));
        for (int i = 0; i < n; ++i)
            if (std::abs(traj.u0[i]) >= kJwComparisonFloor * u0_max) jw_idx.push_back(i);
    }
    result.jw_fraction = static_cast<double>(jw_idx.size()) / n;

    std::optional<EulerianFields> fields;
    std::optional<ConcealedEulerian> cont;
    if (config.run_reference) {
        fields = make_eulerian_fields(params, config.m_grid, setup.half_width,
                                      setup.initial.psi0);
        if (config.run_concealed) cont = init_concealed_eulerian(*fields, params);
    }

    // Trace bundle: a modest set of interior labels advected through the
    // Eulerian velocity history as an independent trajectory check.
    std::vector<int> trace_idx;
    std::vector<double> trace_q;
    std::vector<std::uint8_t> trace_escaped;
    std::vector<double> prev_v;
    if (fields) {
        double rho_max = 0.0;
        for (double r : grid.rho0) rho_max = std::max(rho_max, r);
        std::vector<int> candidates;
        for (int i = 0; i < n; ++i)
            if (grid.rho0[i] >= 1e-4 * rho_max) candidates.push_back(i);
        const int stride = std::max<size_t>(1, candidates.size() / 32);
        for (size_t k = 0; k < candidates.size(); k += stride)
            trace_idx.push_back(candidates[k]);
        for (int i : trace_idx) trace_q.push_back(grid.a[i]);
        trace_escaped.assign(trace_idx.size(), 0);
        prev_v = fields->v;
        result.trace_err = 0.0;
    }

    CsvFile traj_csv, energy_csv, euler_csv;
    if (!options.out_dir.empty()) {
        fs::create_directories(options.out_dir);
        const fs::path dir(options.out_dir);
        traj_csv.open(dir / "trajectories.csv", "t,a,q,qdot,J,u,Q,Qdot");
        energy_csv.open(dir / "energy.csv",
                        "t,T_visible,T_concealed,V_external,H_lagrangian,H_eulerian,"
                        "H_operator,H_metric");
        if (fields)
            euler_csv.open(dir / "eulerian.csv",
                           "t,x,rho_qlag,rho_psi,v,V_concealed_lagrangian,"
                           "V_concealed_continuity");
    }
    const int label_stride =
        config.label_output_stride > 0 ? config.label_output_stride : std::max(1, n / 256);
    const int x_stride = config.x_output_stride > 0
                             ? config.x_output_stride
                             : std::max(1, config.m_grid / 512);

    auto emit_frame = [&]() {
        FrameDiagnostics d;
        d.t = traj.t;
        d.energy = make_energy_report(params, grid, traj, conc, fields ? &*fields : nullptr);
        d.traj_err = kNaN;
        d.conc_err = kNaN;
        d.jw_err = kNaN;
        d.density_l2 = kNaN;

        if (setup.has_closed_forms) {
            double te = 0.0, ce = 0.0;
            for (int i = 0; i < n; ++i) {
                te = std::max(te, std::abs(traj.q[i] - setup.q_exact(grid.a[i], traj.t)));
                ce = std::max(ce, std::abs((conc.Q[i] - conc.Q0[i]) -
                                           setup.dQ_exact(grid.a[i], traj.t)));
            }
            d.traj_err = te;
            d.conc_err = config.run_concealed ? ce : kNaN;
        }

        const LagrangianValue lv = modified_lagrangian_value(params, grid, traj);
        d.identity_resid = std::abs(d.energy.T_concealed - lv.U_quantum);
        d.energy_ratio = lv.U_quantum / std::max(lv.T_visible, 1e-30);

        double mres = 0.0;
        for (int i = 0; i < n; ++i) {
            const double lhs = params.mass * grid.rho0[i] * traj.u0[i] * traj.u0[i] * conc.R[i];
            mres = std::max(mres, std::abs(lhs - conc.P[i]));
        }
        d.momentum_resid = mres;

        std::vector<double> Qdot = concealed_velocity(conc, traj);

        MappedFields mapped;
        if (fields) {
            mapped = lagrangian_to_eulerian(grid, traj, conc, fields->x);
            std::vector<double> diff2(fields->size(), 0.0);
            for (int k = 0; k < fields->size(); ++k)
                if (mapped.valid[k]) {
                    const double delta = mapped.rho[k] - fields->rho[k];
                    diff2[k] = delta * delta;
                }
            d.density_l2 = std::sqrt(fields->quadrature(diff2));

            if (cont) {
                double jw = 0.0;
                for (int i : jw_idx) {
                    const double xq = traj.q[i];
                    if (xq <= fields->x.front() || xq >= fields->x.back()) continue;
                    const double s = (xq - fields->x.front()) / fields->dx;
                    const int j = std::min(static_cast<int>(s), fields->size() - 2);
                    const double w = s - j;
                    const double W = (1.0 - w) * cont->W[j] + w * cont->W[j + 1];
                    jw = std::max(jw, std::abs(traj.J[i] * W / conc.R[i] - 1.0));
                }
                d.jw_err = jw;
            }

            if (!trace_idx.empty()) {
                double te = 0.0;
                for (size_t k = 0; k < trace_idx.size(); ++k)
                    if (!trace_escaped[k])
                        te = std::max(te, std::abs(trace_q[k] - traj.q[trace_idx[k]]));
                result.trace_err = std::max(result.trace_err, te);
            }
        }

        for (int i = 0; i < n; i += label_stride)
            traj_csv.row({traj.t, grid.a[i], traj.q[i], traj.qdot[i], traj.J[i], traj.u[i],
                          conc.Q[i], Qdot[i]});
        energy_csv.row({d.energy.t, d.energy.T_visible, d.energy.T_concealed,
                        d.energy.V_external, d.energy.H_lagrangian, d.energy.H_eulerian,
                        d.energy.H_operator, d.energy.H_metric});
        if (fields && euler_csv.is_open()) {
            for (int k = 0; k < fields->size(); k += x_stride) {
                const double rq = mapped.valid[k] ? mapped.rho[k] : kNaN;
                const double vm = mapped.valid[k] ? mapped.V[k] : kNaN;
                const double vv = fields->valid[k] ? fields->v[k] : kNaN;
                const double vc = (cont && !cont->mask[k]) ? cont->V[k] : kNaN;
                euler_csv.row({traj.t, fields->x[k], rq, fields->rho[k], vv, vm, vc});
            }
        }

        result.frames.push_back(std::move(d));
    };

    emit_frame();

    const int n_steps = step_count(config.t_final, config.dt);
    result.n_steps = n_steps;
    for (int step = 1; step <= n_steps; ++step) {
        step_visible(params, grid, traj, result.n_sub);
        if (config.run_concealed) advance_concealed(conc, traj, params.dt);
        if (fields) {
            cn_step(*fields, params);
            if (cont) {
                // The upwind solve is CFL-limited while the Schrodinger and
                // Verlet steps are not; split the outer step as needed.
                const std::vector<double> v_adv = advection_velocity(*fields);
                double v_max = 0.0;
                for (double v : v_adv) v_max = std::max(v_max, std::abs(v));
                const int k = std::max(
                    1, static_cast<int>(std::ceil(params.dt * v_max / (0.8 * fields->dx))));
                for (int j = 0; j < k; ++j)
                    concealed_continuity_step(*cont, *fields, params.dt / k);
            }
            if (!trace_idx.empty()) {
                advect_between(prev_v, fields->v, fields->x.front(), fields->dx,
                               fields->x.back(), params.dt, trace_q, trace_escaped);
                prev_v = fields->v;
            }
        }
        if (step % config.output_stride == 0 || step == n_steps) emit_frame();
    }

    if (fields && cont) {
        const MappedFields mapped = lagrangian_to_eulerian(grid, traj, conc, fields->x);
        double num = 0.0, den = 0.0;
        for (int k = 0; k < fields->size(); ++k) {
            if (!mapped.valid[k] || cont->mask[k]) continue;
            const double delta = mapped.V[k] - cont->V[k];
            num += delta * delta;
            den += mapped.V[k] * mapped.V[k];
        }
        result.V_l2_rel = den > 0.0 ? std::sqrt(num / den) : kNaN;
    }

    result.grid = std::move(sys.grid);
    result.traj = std::move(sys.traj);
    result.conc = std::move(sys.conc);
    if (fields) result.fields = std::move(*fields);
    if (cont) result.continuity = std::move(*cont);
    return result;
}

RouthDemoResult run_routh_demo(const ScenarioConfig& config, const RunOptions& options) {
    using namespace routh;

    // Free particle in polar form: B = 1, A = q^2; the concealed coordinate
    // is the angle, P its angular momentum.
    KineticSystem sys;
    sys.n_visible = 1;
    sys.n_concealed = 1;
    sys.B = [](const Vec&) { return Mat::Identity(1, 1); };
    sys.A = [](const Vec& q) {
        Mat a(1, 1);
        a(0, 0) = q[0] * q[0];
        return a;
    };
    sys.dB = [](const Vec&) { return std::vector<Mat>{Mat::Zero(1, 1)}; };
    sys.dA = [](const Vec& q) {
        Mat d(1, 1);
        d(0, 0) = 2.0 * q[0];
        return std::vector<Mat>{d};
    };

    DiscreteState s0;
    s0.q = Vec::Constant(1, 1.0);
    s0.qdot = Vec::Zero(1);
    s0.Q = Vec::Zero(1);
    s0.Qdot = Vec::Constant(1, 1.0);

    const int n_steps = step_count(config.t_final, config.dt);
    const auto full = integrate(make_full_accel(sys), stack(s0.q, s0.Q),
                                stack(s0.qdot, s0.Qdot), config.dt, n_steps, Scheme::RK4);
    const ReducedSystem red = reduce(sys, s0);
    const auto reduced = integrate(make_reduced_accel(red), s0.q, s0.qdot, config.dt,
                                   n_steps, Scheme::RK4);

    std::vector<Vec> q_red(reduced.pos.begin(), reduced.pos.end());
    const ConcealedPath path = reconstruct_concealed(red, reduced.t, q_red, s0.Q);

    RouthDemoResult r;
    r.t = full.t;
    const size_t m = full.t.size();
    r.q_full.resize(m);
    r.qdot_full.resize(m);
    r.q_reduced.resize(m);
    r.qdot_reduced.resize(m);
    r.Q.resize(m);
    r.Qdot.resize(m);
    r.momentum_drift.resize(m);

    double h0 = 0.0;
    for (size_t k = 0; k < m; ++k) {
        const double q = full.pos[k][0];
        const double qd = full.vel[k][0];
        const double Qd = full.vel[k][1];
        r.q_full[k] = q;
        r.qdot_full[k] = qd;
        r.q_reduced[k] = reduced.pos[k][0];
        r.qdot_reduced[k] = reduced.vel[k][0];
        r.Q[k] = path.Q[k][0];
        r.Qdot[k] = path.Qdot[k][0];
        r.momentum_drift[k] = std::abs(q * q * Qd - red.P[0]);

        const double t = full.t[k];
        const double T_Q = 0.5 * q * q * Qd * Qd;
        const double V_q = red.emergent_potential(full.pos[k].head(1));
        const double H = 0.5 * qd * qd + T_Q;
        if (k == 0) h0 = H;
        r.energy_drift = std::max(r.energy_drift, std::abs(H - h0) / std::abs(h0));
        r.partition_resid = std::max(r.partition_resid, std::abs(T_Q - V_q));
        r.equivalence_err = std::max(r.equivalence_err, std::abs(q - r.q_reduced[k]));
        r.traj_err = std::max(r.traj_err, std::abs(q - std::sqrt(1.0 + t * t)));
        r.conc_err = std::max(r.conc_err, std::abs(r.Q[k] - std::atan(t)));
        r.momentum_drift_max = std::max(r.momentum_drift_max, r.momentum_drift[k]);
    }

    if (!options.out_dir.empty()) {
        fs::create_directories(options.out_dir);
        CsvFile csv;
        csv.open(fs::path(options.out_dir) / "routh_trajectories.csv",
                 "t,q,qdot,q_reduced,qdot_reduced,Q,Qdot,momentum_drift");
        const size_t stride = std::max<size_t>(1, m / 2001);
        for (size_t k = 0; k < m; k += stride)
            csv.row({r.t[k], r.q_full[k], r.qdot_full[k], r.q_reduced[k], r.qdot_reduced[k],
                     r.Q[k], r.Qdot[k], r.momentum_drift[k]});
    }
    return r;
}

namespace {

std::string render_report(const ScenarioConfig& config, const std::string& resolution,
                          const std::vector<Metric>& metrics,
                          const std::vector<std::string>& notes) {
    std::ostringstream out;
    out << "qflow run report\n";
    out << "scenario: " << scenario_name(config.scenario) << "\n";
    out << "resolution: " << resolution << "\n";
    out << "metrics (all evaluated at the resolution above):\n";
    for (const auto& m : metrics) {
        out << "  " << m.name << " = " << fmt(m.value);
        if (m.tolerance)
            out << "  [tol " << fmt(*m.tolerance) << ": " << (m.pass ? "PASS" : "FAIL") << "]";
        out << "\n";
    }
    for (const auto& n : notes) out << n << "\n";
    return out.str();
}

Metric make_metric(std::string name, double value, std::optional<double> tol = {}) {
    Metric m;
    m.name = std::move(name);
    m.value = value;
    m.tolerance = tol;
    m.pass = !tol || (std::isfinite(value) && value <= *tol);
    return m;
}

void write_text(const RunOptions& options, const std::string& filename,
                const std::string& text) {
    if (options.out_dir.empty()) return;
    fs::create_directories(options.out_dir);
    std::ofstream out(fs::path(options.out_dir) / filename);
    out << text;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    RunReport report;
    report.scenario = config.scenario;

    try {
        if (config.scenario == ScenarioKind::RouthDemo) {
            const RouthDemoResult r = run_routh_demo(config, options);
            report.metrics = {
                make_metric("full vs reduced trajectory sup difference", r.equivalence_err, 1e-6),
                make_metric("trajectory sup error vs sqrt(1+t^2)", r.traj_err, 1e-6),
                make_metric("concealed sup error vs arctan(t)", r.conc_err, 1e-5),
                make_metric("concealed momentum drift", r.momentum_drift_max, 1e-8),
                make_metric("energy partition residual |T_Q - V_q|", r.partition_resid),
                make_metric("relative energy drift", r.energy_drift),
            };
            std::ostringstream res;
            res << "dt=" << fmt(config.dt) << " t_final=" << fmt(config.t_final)
                << " scheme=RK4";
            for (const auto& m : report.metrics) report.ok = report.ok && m.pass;
            report.text = render_report(config, res.str(), report.metrics, {});
            write_text(options, "report.txt", report.text);
            return report;
        }

        const FluidRunResult r = run_fluid(config, options);
        const bool free_gaussian = config.scenario == ScenarioKind::GaussianFree;
        const bool reference = r.fields.has_value();

        std::vector<Metric>& m = report.metrics;
        if (std::isfinite(r.max_traj_err()))
            m.push_back(make_metric("trajectory sup error vs closed form", r.max_traj_err(),
                                    config.traj_tol));
        if (std::isfinite(r.max_conc_err()))
            m.push_back(make_metric("concealed sup error vs closed form", r.max_conc_err(),
                                    config.conc_tol));
        m.push_back(make_metric("relative energy drift (H_lagrangian)",
                                r.max_energy_drift(), 1e-4));
        if (reference) {
            double d_le = 0.0, d_eo = 0.0;
            for (const auto& f : r.frames) {
                d_le = std::max(d_le, std::abs(f.energy.H_lagrangian - f.energy.H_eulerian));
                d_eo = std::max(d_eo, std::abs(f.energy.H_eulerian - f.energy.H_operator));
            }
            m.push_back(make_metric("max |H_lagrangian - H_eulerian|", d_le, 1e-3));
            m.push_back(make_metric("max |H_eulerian - H_operator|", d_eo, 1e-3));
            m.push_back(make_metric("density L2 distance (mapped rho vs |psi|^2) at t_final",
                                    r.frames.back().density_l2,
                                    free_gaussian ? std::optional<double>(1e-3)
                                                  : std::nullopt));
            m.push_back(make_metric("advected trace sup deviation", r.trace_err));
        }
        m.push_back(make_metric("concealed kinetic vs quantum potential, max rel residual",
                                r.max_identity_rel(), 1e-3));
        m.push_back(make_metric("momentum density sup residual",
                                [&] {
                                    double v = 0.0;
                                    for (const auto& f : r.frames)
                                        v = std::max(v, f.momentum_resid);
                                    return v;
                                }()));
        if (r.continuity) {
            m.push_back(make_metric("J*W along-trajectory invariance, sup relative",
                                    r.max_jw_err(),
                                    free_gaussian ? std::optional<double>(0.05)
                                                  : std::nullopt));
            m.push_back(make_metric("continuity V vs mapped V, L2 relative", r.V_l2_rel,
                                    free_gaussian ? std::optional<double>(0.05)
                                                  : std::nullopt));
        }
        m.push_back(make_metric("classicality energy ratio at t=0",
                                r.frames.front().energy_ratio));

        for (const auto& metric : m) report.ok = report.ok && metric.pass;

        std::ostringstream res;
        res << "n_labels=" << config.n_labels << " m_grid=" << config.m_grid
            << " dt=" << fmt(config.dt) << " t_final=" << fmt(config.t_final)
            << " n_sub=" << r.n_sub << " half_width=" << fmt(r.half_width);

        std::vector<std::string> notes;
        {
            std::ostringstream s;
            s << "masked labels (interpolated concealed ratio): "
              << fmt(r.masked_fraction * 100.0) << "% of " << config.n_labels;
            notes.push_back(s.str());
        }
        {
            std::ostringstream s;
            s << "J*W comparison set (|u0| >= " << fmt(kJwComparisonFloor * 100.0)
              << "% of max): " << fmt(r.jw_fraction * 100.0) << "% of labels";
            notes.push_back(s.str());
        }
        if (r.widened) notes.push_back("note: half_width was auto-widened");

        report.text = render_report(config, res.str(), report.metrics, notes);
        write_text(options, "report.txt", report.text);
        return report;
    } catch (const NumericalError& err) {
        report.ok = false;
        report.text = "qflow run report\nscenario: " + scenario_name(config.scenario) +
                      "\nRUN ABORTED: " + err.what() + "\n";
        write_text(options, "report.txt", report.text);
        throw;
    }
}

ConvergenceTable converge(const ScenarioConfig& config, const RunOptions& options) {
    if (config.convergence_levels.empty())
        throw ConfigError("converge requires non-empty convergence_levels");

    ConvergenceTable table;
    for (double f : config.convergence_levels) {
        ScenarioConfig level = config;
        level.dt = config.dt / f;
        ConvergenceRow row;
        row.factor = f;
        row.dt = level.dt;

        if (config.scenario == ScenarioKind::RouthDemo) {
            const RouthDemoResult r = run_routh_demo(level, RunOptions{"", true});
            row.traj_err = r.traj_err;
            row.conc_err = r.conc_err;
            row.density_l2 = kNaN;
            row.energy_drift = r.energy_drift;
            row.continuity_err = kNaN;
        } else {
            level.n_labels = static_cast<int>(std::lround(config.n_labels * f));
            level.m_grid = static_cast<int>(std::lround(config.m_grid * f));
            level.output_stride =
                std::max(1, static_cast<int>(std::lround(config.output_stride * f)));
            row.n_labels = level.n_labels;
            row.m_grid = level.m_grid;
            const FluidRunResult r = run_fluid(level, RunOptions{"", true});
            row.traj_err = r.max_traj_err();
            row.conc_err = r.max_conc_err();
            row.density_l2 = r.frames.back().density_l2;
            row.energy_drift = r.max_energy_drift();
            row.continuity_err = r.max_jw_err();
        }
        table.rows.push_back(row);
    }

    for (size_t k = 0; k + 1 < table.rows.size(); ++k) {
        const auto& c = table.rows[k];
        const auto& fy = table.rows[k + 1];
        const double ratio = fy.factor / c.factor;
        ConvergenceOrders o;
        o.traj = observed_order(c.traj_err, fy.traj_err, ratio);
        o.conc = observed_order(c.conc_err, fy.conc_err, ratio);
        o.density = observed_order(c.density_l2, fy.density_l2, ratio);
        o.energy = observed_order(c.energy_drift, fy.energy_drift, ratio);
        o.continuity = observed_order(c.continuity_err, fy.continuity_err, ratio);
        table.orders.push_back(o);
    }

    std::ostringstream out;
    out << "qflow convergence report\n";
    out << "scenario: " << scenario_name(config.scenario) << "\n";
    out << "factor,n_labels,m_grid,dt,traj_err,conc_err,density_l2,energy_drift,"
           "continuity_err\n";
    for (const auto& r : table.rows) {
        out << fmt(r.factor) << ',' << r.n_labels << ',' << r.m_grid << ',' << fmt(r.dt)
            << ',' << fmt(r.traj_err) << ',' << fmt(r.conc_err) << ',' << fmt(r.density_l2)
            << ',' << fmt(r.energy_drift) << ',' << fmt(r.continuity_err) << '\n';
    }
    out << "observed orders between consecutive levels "
           "(trajectory, concealed, density, energy, continuity):\n";
    for (const auto& o : table.orders)
        out << "  " << fmt(o.traj) << ", " << fmt(o.conc) << ", " << fmt(o.density) << ", "
            << fmt(o.energy) << ", " << fmt(o.continuity) << '\n';
    table.text = out.str();

    if (!options.out_dir.empty()) {
        fs::create_directories(options.out_dir);
        std::ofstream csv(fs::path(options.out_dir) / "convergence.csv");
        csv << "factor,n_labels,m_grid,dt,traj_err,conc_err,density_l2,energy_drift,"
               "continuity_err\n";
        for (const auto& r : table.rows)
            csv << fmt(r.factor) << ',' << r.n_labels << ',' << r.m_grid << ',' << fmt(r.dt)
                << ',' << fmt(r.traj_err) << ',' << fmt(r.conc_err) << ','
                << fmt(r.density_l2) << ',' << fmt(r.energy_drift) << ','
                << fmt(r.continuity_err) << '\n';
        write_text(options, "convergence_report.txt", table.text);
    }
    return table;
}

}  // namespace qflow
