#pragma once

#include <span>
#include <vector>

namespace qflow {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Preserves monotonicity of the data, so inverting a monotone map through
/// it cannot produce spurious oscillations.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    /// x strictly increasing; x and y the same length (>= 2).
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double xq) const;
    bool in_range(double xq) const { return xq >= x_.front() && xq <= x_.back(); }
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, y_, d_;  // nodes, values, node slopes
};

/// Cubic (4-point Lagrange) sample of f tabulated on the uniform grid
/// x0 + i*h. The window clamps at the ends; xq outside the grid clamps to
/// the boundary value.
double cubic_sample(std::span<const double> f, double x0, double h, double xq);

}  // namespace qflow
