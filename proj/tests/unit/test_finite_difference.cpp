#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qflow/finite_difference.hpp"

using namespace qflow;

TEST_CASE("fornberg weights reproduce the classic centered stencils") {
    std::vector<double> nodes{0, 1, 2, 3, 4, 5, 6, 7, 8};
    const auto w = fornberg_weights(4.0, nodes, 1);
    // 8th-order centered first derivative: [1/280 -4/105 1/5 -4/5 0 ...]
    CHECK(w[0] == doctest::Approx(1.0 / 280).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(-4.0 / 105).epsilon(1e-12));
    CHECK(w[2] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(w[3] == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(w[4] == doctest::Approx(0.0));
    CHECK(w[8] == doctest::Approx(-1.0 / 280).epsilon(1e-12));
}

TEST_CASE("DiffOp differentiates polynomials of degree 8 exactly") {
    const int n = 64;
    const double h = 0.1;
    for (const auto closure : {BoundaryClosure::OneSided, BoundaryClosure::Extrapolated}) {
        const DiffOp d(n, h, 1, closure);
        std::vector<double> f(n), exact(n);
        // Extrapolated closure rows are linear in the row index, so they are
        // exact only up to cubic derivative profiles; use degree 4 there.
        const int deg = closure == BoundaryClosure::OneSided ? 8 : 4;
        for (int i = 0; i < n; ++i) {
            const double x = i * h - 3.0;
            f[i] = std::pow(x, deg);
            exact[i] = deg * std::pow(x, deg - 1);
        }
        const auto df = d(f);
        for (int i = 0; i < n; ++i)
            CHECK(df[i] == doctest::Approx(exact[i]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("DiffOp converges at 8th order on smooth data") {
    auto err_at = [](int n) {
        const double h = 2.0 / (n - 1);
        const DiffOp d(n, h, 1);
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) f[i] = std::sin(3.0 * (i * h - 1.0));
        const auto df = d(f);
        double e = 0.0;
        // interior only; the one-sided rows carry a larger constant
        for (int i = 8; i < n - 8; ++i)
            e = std::max(e, std::abs(df[i] - 3.0 * std::cos(3.0 * (i * h - 1.0))));
        return e;
    };
    const double e1 = err_at(101), e2 = err_at(201);
    const double order = std::log2(e1 / e2);
    CHECK(order > 7.0);
}

TEST_CASE("second-derivative operator") {
    const int n = 80;
    const double h = 0.05;
    const DiffOp d2(n, h, 2);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = std::exp(-0.5 * (i * h - 2.0) * (i * h - 2.0));
    const auto ddf = d2(f);
    for (int i = 0; i < n; ++i) {
        const double x = i * h - 2.0;
        const double exact = (x * x - 1.0) * f[i];
        CHECK(ddf[i] == doctest::Approx(exact).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("interior symbol peaks near 1.73 for the 8th-order stencil") {
    const DiffOp d(64, 0.5, 1);
    CHECK(d.max_symbol() == doctest::Approx(1.7288).epsilon(1e-3));
}

TEST_CASE("trapezoid helpers") {
    std::vector<double> f{0.0, 1.0, 2.0, 3.0};
    CHECK(trapezoid(f, 0.5) == doctest::Approx(2.25));
    const auto c = cumulative_trapezoid(f, 0.5);
    CHECK(c[0] == 0.0);
    CHECK(c[3] == doctest::Approx(2.25));

    // spectral accuracy on a decayed Gaussian
    const int n = 201;
    const double h = 16.0 / (n - 1);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        const double x = -8.0 + i * h;
        g[i] = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    }
    CHECK(trapezoid(g, h) == doctest::Approx(1.0).epsilon(1e-10));
}
