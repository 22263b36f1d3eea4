#include <doctest.h>

#include <cmath>
#include <vector>

#include "qflow/interp.hpp"

using namespace qflow;

TEST_CASE("monotone cubic reproduces smooth monotone data") {
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        const double t = i * 0.1;
        x.push_back(t);
        y.push_back(t + std::sin(0.5 * t));  // strictly increasing
    }
    const MonotoneCubic f(x, y);
    for (double t = 0.05; t < 4.0; t += 0.173) {
        CHECK(f(t) == doctest::Approx(t + std::sin(0.5 * t)).epsilon(1e-4));
    }
}

TEST_CASE("monotone cubic never overshoots between nodes") {
    // Step-like data; a plain cubic spline would ring.
    std::vector<double> x{0, 1, 2, 3, 4, 5};
    std::vector<double> y{0, 0, 0, 1, 1, 1};
    const MonotoneCubic f(x, y);
    for (double t = 0.0; t <= 5.0; t += 0.01) {
        CHECK(f(t) >= -1e-12);
        CHECK(f(t) <= 1.0 + 1e-12);
    }
}

TEST_CASE("monotone cubic inverts a monotone map") {
    std::vector<double> a, q;
    for (int i = 0; i <= 100; ++i) {
        const double t = -2.0 + 0.04 * i;
        a.push_back(t);
        q.push_back(2.0 * t + 0.1 * t * t * t);
    }
    const MonotoneCubic a_of_q(q, a);
    for (double t = -1.9; t < 1.9; t += 0.37) {
        const double x = 2.0 * t + 0.1 * t * t * t;
        CHECK(a_of_q(x) == doctest::Approx(t).epsilon(1e-6));
    }
}

TEST_CASE("uniform cubic sampling") {
    std::vector<double> f(50);
    const double h = 0.2, x0 = -3.0;
    for (int i = 0; i < 50; ++i) {
        const double x = x0 + i * h;
        f[i] = x * x * x - x;
    }
    // cubic interpolation is exact on cubics
    for (double x = -2.9; x < 6.5; x += 0.317)
        CHECK(cubic_sample(f, x0, h, x) == doctest::Approx(x * x * x - x).epsilon(1e-12));
    // clamps outside
    CHECK(cubic_sample(f, x0, h, -100.0) == doctest::Approx(f.front()));
}
