#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qflow/routh.hpp"
#include "support/random_systems.hpp"

using namespace qflow;
using namespace qflow::routh;

namespace {

// Free particle in polar form: B = 1 (radial), A = q^2 (angular).
KineticSystem polar_system() {
    KineticSystem sys;
    sys.n_visible = 1;
    sys.n_concealed = 1;
    sys.B = [](const Vec&) { return Mat::Identity(1, 1); };
    sys.A = [](const Vec& q) {
        Mat a(1, 1);
        a(0, 0) = q[0] * q[0];
        return a;
    };
    return sys;  // derivatives via central differences
}

DiscreteState state1(double q, double qdot, double Q, double Qdot) {
    DiscreteState s;
    s.q = Vec::Constant(1, q);
    s.qdot = Vec::Constant(1, qdot);
    s.Q = Vec::Constant(1, Q);
    s.Qdot = Vec::Constant(1, Qdot);
    return s;
}

}  // namespace

TEST_CASE("constant matrices give zero accelerations") {
    KineticSystem sys;
    sys.n_visible = 2;
    sys.n_concealed = 2;
    sys.B = [](const Vec&) { return Mat::Identity(2, 2); };
    sys.A = [](const Vec&) { return Mat::Identity(2, 2); };
    DiscreteState s;
    s.q = Vec::Constant(2, 0.3);
    s.qdot = Vec::Constant(2, -1.1);
    s.Q = Vec::Constant(2, 0.0);
    s.Qdot = Vec::Constant(2, 2.5);
    const auto acc = full_accelerations(sys, s);
    CHECK(acc.qddot.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(acc.Qddot.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("polar system accelerations match the hand derivation") {
    const auto sys = polar_system();
    // L = q_dot^2/2 + q^2 Q_dot^2/2: qddot = q Qdot^2, Qddot = -2 qdot Qdot / q
    {
        const auto acc = full_accelerations(sys, state1(1.0, 0.0, 0.0, 1.0));
        CHECK(acc.qddot[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(acc.Qddot[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
    {
        const auto acc = full_accelerations(sys, state1(2.0, 1.0, 0.0, 0.5));
        CHECK(acc.qddot[0] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(acc.Qddot[0] == doctest::Approx(-0.5).epsilon(1e-9));
    }
}

TEST_CASE("reduce stores the invariant concealed momentum") {
    {
        KineticSystem sys;
        sys.n_visible = 1;
        sys.n_concealed = 1;
        sys.B = [](const Vec&) { return Mat::Identity(1, 1); };
        sys.A = [](const Vec&) { return Mat::Identity(1, 1); };
        const auto red = reduce(sys, state1(0.7, 0.0, 0.0, 3.0));
        CHECK(red.P[0] == doctest::Approx(3.0));
    }
    const auto sys = polar_system();
    CHECK(reduce(sys, state1(1.0, 0.0, 0.0, 1.0)).P[0] == doctest::Approx(1.0));
    // distinct initial data, same momentum
    CHECK(reduce(sys, state1(2.0, 0.0, 0.0, 0.25)).P[0] == doctest::Approx(1.0));
}

TEST_CASE("reduce rejects degenerate A(q0)") {
    KineticSystem sys;
    sys.n_visible = 1;
    sys.n_concealed = 1;
    sys.B = [](const Vec&) { return Mat::Identity(1, 1); };
    sys.A = [](const Vec& q) {
        Mat a(1, 1);
        a(0, 0) = q[0] * q[0];
        return a;
    };
    CHECK_THROWS_AS(reduce(sys, state1(0.0, 0.0, 0.0, 1.0)), NumericalError);
}

TEST_CASE("reduced accelerations feel the emergent potential") {
    const auto sys = polar_system();
    const auto red = reduce(sys, state1(1.0, 0.0, 0.0, 1.0));  // P = 1
    // qddot = P^2/q^3
    CHECK(reduced_accelerations(red, Vec::Constant(1, 1.0), Vec::Zero(1))[0] ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(reduced_accelerations(red, Vec::Constant(1, 2.0), Vec::Constant(1, 0.4))[0] ==
          doctest::Approx(0.125).epsilon(1e-9));
    // P = 0: pure geodesic motion, here free
    auto red0 = red;
    red0.P = Vec::Zero(1);
    CHECK(reduced_accelerations(red0, Vec::Constant(1, 1.3), Vec::Constant(1, 0.7))[0] ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("energy partition T_Q = V_q is an algebraic identity") {
    const auto sys = polar_system();
    const auto red = reduce(sys, state1(1.0, 0.0, 0.0, 1.0));
    for (double q = 0.5; q < 3.0; q += 0.25) {
        const Vec qv = Vec::Constant(1, q);
        const Vec Qdot = red.concealed_velocity(qv);
        const double T_Q = 0.5 * Qdot.dot(sys.A(qv) * Qdot);
        CHECK(T_Q == doctest::Approx(red.emergent_potential(qv)).epsilon(1e-14));
    }
}

TEST_CASE("concealed reconstruction: polar closed form arctan(t)") {
    const auto sys = polar_system();
    const auto red = reduce(sys, state1(1.0, 0.0, 0.0, 1.0));
    const int n = 2000;
    const double dt = 5e-4;
    std::vector<double> t(n + 1);
    std::vector<Vec> q(n + 1);
    for (int k = 0; k <= n; ++k) {
        t[k] = k * dt;
        q[k] = Vec::Constant(1, std::sqrt(1.0 + t[k] * t[k]));
    }
    const auto path = reconstruct_concealed(red, t, q, Vec::Zero(1));
    CHECK(path.Q.back()[0] == doctest::Approx(std::numbers::pi / 4).epsilon(1e-7));
    CHECK(path.Q.back()[0] == doctest::Approx(0.7853982).epsilon(1e-6));
    // constant-A case: Q = P t
    {
        KineticSystem csys;
        csys.n_visible = 1;
        csys.n_concealed = 1;
        csys.B = [](const Vec&) { return Mat::Identity(1, 1); };
        csys.A = [](const Vec&) { return Mat::Identity(1, 1); };
        const auto cred = reduce(csys, state1(0.0, 1.0, 0.0, 2.0));
        const auto cpath = reconstruct_concealed(cred, t, q, Vec::Zero(1));
        CHECK(cpath.Q.back()[0] == doctest::Approx(2.0 * t.back()).epsilon(1e-12));
    }
}

TEST_CASE("integrator: exact linear motion and the polar closed form") {
    const AccelFn zero = [](double, const Vec& x, const Vec&) {
        return Vec::Zero(x.size());
    };
    for (const auto scheme : {Scheme::VelocityVerlet, Scheme::RK4}) {
        const auto traj =
            integrate(zero, Vec::Zero(1), Vec::Constant(1, 1.0), 0.1, 10, scheme);
        CHECK(traj.pos.back()[0] == doctest::Approx(1.0).epsilon(1e-14));
    }

    const auto sys = polar_system();
    const auto red = reduce(sys, state1(1.0, 0.0, 0.0, 1.0));
    const auto traj = integrate(make_reduced_accel(red), Vec::Constant(1, 1.0),
                                Vec::Zero(1), 1e-3, 1000, Scheme::RK4);
    CHECK(traj.pos.back()[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(traj.pos.back()[0] == doctest::Approx(1.4142136).epsilon(1e-6));
}

TEST_CASE("integrator convergence orders via Richardson halving") {
    const auto sys = polar_system();
    const auto red = reduce(sys, state1(1.0, 0.0, 0.0, 1.0));
    auto endpoint_err = [&](double dt, Scheme scheme) {
        const int n = static_cast<int>(std::lround(1.0 / dt));
        const auto traj = integrate(make_reduced_accel(red), Vec::Constant(1, 1.0),
                                    Vec::Zero(1), dt, n, scheme);
        return std::abs(traj.pos.back()[0] - std::sqrt(2.0));
    };
    const double ev1 = endpoint_err(0.02, Scheme::VelocityVerlet);
    const double ev2 = endpoint_err(0.01, Scheme::VelocityVerlet);
    CHECK(ev1 / ev2 == doctest::Approx(4.0).epsilon(0.25));
    const double er1 = endpoint_err(0.04, Scheme::RK4);
    const double er2 = endpoint_err(0.02, Scheme::RK4);
    CHECK(er1 / er2 == doctest::Approx(16.0).epsilon(0.3));
}

TEST_CASE("integrator aborts on non-finite states with the step index") {
    const AccelFn blowup = [](double, const Vec& x, const Vec&) {
        return Vec::Constant(x.size(), std::numeric_limits<double>::infinity());
    };
    CHECK_THROWS_AS(
        integrate(blowup, Vec::Zero(1), Vec::Zero(1), 0.1, 5, Scheme::RK4),
        NumericalError);
}

TEST_CASE("property: full and reduced dynamics coincide on random systems") {
    // Routh's claim, exercised over randomized SPD kinetic systems.
    for (unsigned seed : {11u, 22u, 33u, 44u, 55u, 66u}) {
        const int nv = 1 + seed % 3, nc = 1 + (seed / 7) % 3;
        const auto rnd = test::make_random_system(seed, nv, nc);
        const double dt = 1e-3;
        const int steps = 500;

        const auto full = integrate(make_full_accel(rnd.sys),
                                    stack(rnd.s0.q, rnd.s0.Q),
                                    stack(rnd.s0.qdot, rnd.s0.Qdot), dt, steps,
                                    Scheme::RK4);
        const auto red = reduce(rnd.sys, rnd.s0);
        const auto redu = integrate(make_reduced_accel(red), rnd.s0.q, rnd.s0.qdot,
                                    dt, steps, Scheme::RK4);

        double sup = 0.0, pdrift = 0.0;
        for (size_t k = 0; k < full.t.size(); ++k) {
            sup = std::max(sup, (full.pos[k].head(nv) - redu.pos[k]).cwiseAbs().maxCoeff());
            const Vec q = full.pos[k].head(nv);
            const Vec Qd = full.vel[k].tail(nc);
            pdrift = std::max(pdrift, (rnd.sys.A(q) * Qd - red.P).cwiseAbs().maxCoeff());
        }
        CHECK(sup < 1e-8);
        CHECK(pdrift < 1e-9);

        // reconstruction reproduces the full run's concealed path
        std::vector<Vec> qs(redu.pos.begin(), redu.pos.end());
        const auto path = reconstruct_concealed(red, redu.t, qs, rnd.s0.Q);
        double qerr = 0.0;
        for (size_t k = 0; k < full.t.size(); ++k)
            qerr = std::max(qerr, (path.Q[k] - full.pos[k].tail(nc)).cwiseAbs().maxCoeff());
        CHECK(qerr < 1e-5);
    }
}

TEST_CASE("analytic and finite-difference matrix derivatives agree") {
    const auto rnd = test::make_random_system(123, 2, 3);
    const Vec q = rnd.s0.q;
    const auto analytic = rnd.sys.dA(q);
    const auto fd = fd_matrix_derivatives(rnd.sys.A, q);
    for (size_t k = 0; k < analytic.size(); ++k)
        CHECK((analytic[k] - fd[k]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("validate_system flags asymmetric or indefinite matrices") {
    KineticSystem sys;
    sys.n_visible = 1;
    sys.n_concealed = 1;
    sys.B = [](const Vec&) { return Mat::Identity(1, 1); };
    sys.A = [](const Vec&) { return -Mat::Identity(1, 1); };
    const std::vector<Vec> samples{Vec::Zero(1)};
    CHECK_THROWS_AS(validate_system(sys, samples), NumericalError);
}
