#pragma once

// Randomized pure-kinetic systems for the equivalence property suites:
// A, B diagonally dominant trigonometric matrix fields with analytic
// derivatives, positive-definite by a Gershgorin margin.

#include <random>
#include <vector>

#include "qflow/routh.hpp"

namespace qflow::test {

struct RandomKineticSystem {
    routh::KineticSystem sys;
    routh::DiscreteState s0;
};

namespace detail {

struct TrigMatrixField {
    int dim = 1;
    int n_q = 1;
    double base = 2.0;
    std::vector<routh::Mat> coeff;   // symmetric amplitude matrices
    std::vector<routh::Vec> wavevec; // per term, in q-space
    std::vector<double> phase;

    routh::Mat value(const routh::Vec& q) const {
        routh::Mat m = base * routh::Mat::Identity(dim, dim);
        for (size_t k = 0; k < coeff.size(); ++k)
            m += std::sin(wavevec[k].dot(q) + phase[k]) * coeff[k];
        return m;
    }
    std::vector<routh::Mat> derivative(const routh::Vec& q) const {
        std::vector<routh::Mat> out(n_q, routh::Mat::Zero(dim, dim));
        for (size_t k = 0; k < coeff.size(); ++k) {
            const double c = std::cos(wavevec[k].dot(q) + phase[k]);
            for (int i = 0; i < n_q; ++i) out[i] += c * wavevec[k][i] * coeff[k];
        }
        return out;
    }
};

inline TrigMatrixField make_field(std::mt19937& rng, int dim, int n_q) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    TrigMatrixField f;
    f.dim = dim;
    f.n_q = n_q;
    const int terms = 2;
    // Keep sum of row magnitudes below base so every value stays SPD.
    const double scale = 0.25 / (terms * dim);
    for (int k = 0; k < terms; ++k) {
        routh::Mat c(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) c(i, j) = c(j, i) = scale * amp(rng);
        routh::Vec w(n_q);
        for (int i = 0; i < n_q; ++i) w[i] = amp(rng);
        f.coeff.push_back(c);
        f.wavevec.push_back(w);
        f.phase.push_back(3.0 * amp(rng));
    }
    return f;
}

}  // namespace detail

inline RandomKineticSystem make_random_system(unsigned seed, int n_visible,
                                              int n_concealed) {
    std::mt19937 rng(seed);
    const auto bf = detail::make_field(rng, n_visible, n_visible);
    const auto af = detail::make_field(rng, n_concealed, n_visible);

    RandomKineticSystem out;
    out.sys.n_visible = n_visible;
    out.sys.n_concealed = n_concealed;
    out.sys.B = [bf](const routh::Vec& q) { return bf.value(q); };
    out.sys.A = [af](const routh::Vec& q) { return af.value(q); };
    out.sys.dB = [bf](const routh::Vec& q) { return bf.derivative(q); };
    out.sys.dA = [af](const routh::Vec& q) { return af.derivative(q); };

    std::uniform_real_distribution<double> ic(-0.5, 0.5);
    out.s0.q = routh::Vec(n_visible);
    out.s0.qdot = routh::Vec(n_visible);
    out.s0.Q = routh::Vec(n_concealed);
    out.s0.Qdot = routh::Vec(n_concealed);
    for (int i = 0; i < n_visible; ++i) {
        out.s0.q[i] = ic(rng);
        out.s0.qdot[i] = ic(rng);
    }
    for (int i = 0; i < n_concealed; ++i) {
        out.s0.Q[i] = ic(rng);
        out.s0.Qdot[i] = ic(rng);
    }
    return out;
}

}  // namespace qflow::test
