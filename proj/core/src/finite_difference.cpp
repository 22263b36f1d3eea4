#include "qflow/finite_difference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qflow {

std::vector<double> fornberg_weights(double z, std::span<const double> x, int m) {
    const int n = static_cast<int>(x.size());
    if (n < m + 1) throw std::invalid_argument("fornberg_weights: too few nodes");
    // c[j][k]: weight of node j in the k-th derivative approximation.
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = c[j][m];
    return w;
}

DiffOp::DiffOp(int n, double h, int deriv, BoundaryClosure closure, int p)
    : n_(n), m_(deriv), p_(p), w_(2 * p + 1), h_(h), closure_(closure) {
    if (n < w_) throw std::invalid_argument("DiffOp: grid too small for stencil width");
    if (h <= 0.0) throw std::invalid_argument("DiffOp: non-positive spacing");

    std::vector<double> nodes(w_);
    for (int j = 0; j < w_; ++j) nodes[j] = static_cast<double>(j);
    const double scale = std::pow(h_, -m_);

    auto row = [&](double z) {
        auto w = fornberg_weights(z, nodes, m_);
        for (double& v : w) v *= scale;
        return w;
    };

    centered_ = row(static_cast<double>(p_));
    if (closure_ == BoundaryClosure::OneSided) {
        left_.resize(p_);
        right_.resize(p_);
        for (int i = 0; i < p_; ++i) {
            left_[i] = row(static_cast<double>(i));
            // Right rows mirror the left windows: evaluation point sits i
            // nodes from the right end of the window.
            right_[i] = row(static_cast<double>(w_ - p_ + i));
        }
    }
}

template <class T>
void DiffOp::apply_impl(std::span<const T> f, std::span<T> out) const {
    for (int i = p_; i < n_ - p_; ++i) {
        T acc{};
        const int base = i - p_;
        for (int j = 0; j < w_; ++j) acc += centered_[j] * f[base + j];
        out[i] = acc;
    }
    if (closure_ == BoundaryClosure::OneSided) {
        for (int i = 0; i < p_; ++i) {
            T acc{};
            for (int j = 0; j < w_; ++j) acc += left_[i][j] * f[j];
            out[i] = acc;
        }
        const int base = n_ - w_;
        for (int i = 0; i < p_; ++i) {
            T acc{};
            for (int j = 0; j < w_; ++j) acc += right_[i][j] * f[base + j];
            out[n_ - p_ + i] = acc;
        }
    } else {
        for (int i = p_ - 1; i >= 0; --i)
            out[i] = 2.0 * out[i + 1] - out[i + 2];
        for (int i = n_ - p_; i < n_; ++i)
            out[i] = 2.0 * out[i - 1] - out[i - 2];
    }
}

void DiffOp::apply(std::span<const double> f, std::span<double> out) const {
    apply_impl(f, out);
}

void DiffOp::apply(std::span<const std::complex<double>> f,
                   std::span<std::complex<double>> out) const {
    apply_impl(f, out);
}

std::vector<double> DiffOp::operator()(std::span<const double> f) const {
    std::vector<double> out(f.size());
    apply(f, out);
    return out;
}

double DiffOp::max_symbol() const {
    // |sum_j w_j e^{i j theta}| * h^m over theta in (0, pi], interior row.
    const double scale = std::pow(h_, m_);
    double best = 0.0;
    const int samples = 4096;
    for (int s = 1; s <= samples; ++s) {
        const double theta = std::numbers::pi * s / samples;
        double re = 0.0, im = 0.0;
        for (int j = 0; j < w_; ++j) {
            const double phase = (j - p_) * theta;
            re += centered_[j] * std::cos(phase);
            im += centered_[j] * std::sin(phase);
        }
        best = std::max(best, std::hypot(re, im) * scale);
    }
    return best;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
    std::vector<double> out(f.size(), 0.0);
    for (size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
}

double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double acc = 0.5 * (f.front() + f.back());
    for (size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * h;
}

}  // namespace qflow
