#include "qflow/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qflow {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("MonotoneCubic: need >= 2 matching nodes");
    for (size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("MonotoneCubic: nodes must increase strictly");

    std::vector<double> hseg(n - 1), delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        hseg[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / hseg[i];
    }

    d_.assign(n, 0.0);
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
        return;
    }
    // Interior: weighted harmonic mean where secants agree in sign.
    for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] > 0.0) {
            const double w1 = 2.0 * hseg[i] + hseg[i - 1];
            const double w2 = hseg[i] + 2.0 * hseg[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Ends: shape-preserving three-point formula with clamping.
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) d = 0.0;
        else if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0)) d = 3.0 * d0;
        return d;
    };
    d_[0] = end_slope(hseg[0], hseg[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(hseg[n - 2], hseg[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double xq) const {
    if (xq <= x_.front()) return y_.front();
    if (xq >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (xq - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double cubic_sample(std::span<const double> f, double x0, double h, double xq) {
    const int n = static_cast<int>(f.size());
    if (n == 0) return 0.0;
    if (n < 4) {  // too few points for a cubic; fall back to nearest
        const int i = std::clamp(static_cast<int>(std::lround((xq - x0) / h)), 0, n - 1);
        return f[i];
    }
    const double s = std::clamp((xq - x0) / h, 0.0, static_cast<double>(n - 1));
    int i1 = static_cast<int>(std::floor(s));  // interval [i1, i1+1]
    i1 = std::clamp(i1, 1, n - 3);
    const double t = s - i1;
    const double fm1 = f[i1 - 1], f0 = f[i1], f1 = f[i1 + 1], f2 = f[i1 + 2];
    // Lagrange cubic through the four surrounding nodes.
    const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return c0 * fm1 + c1 * f0 + c2 * f1 + c3 * f2;
}

}  // namespace qflow
