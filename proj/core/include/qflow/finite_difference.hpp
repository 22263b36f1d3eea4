#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qflow {

/// Fornberg's recurrence: weights for the m-th derivative at point z from
/// samples at arbitrary nodes x. Exact for polynomials of degree x.size()-1.
std::vector<double> fornberg_weights(double z, std::span<const double> x, int m);

/// Boundary treatment for DiffOp.
///
/// OneSided shifts the full-width window into the domain, keeping the formal
/// order. Extrapolated fills the edge rows by linear extrapolation of the
/// interior derivative values instead; the one-sided rows have O(1/h)
/// amplification factors that destabilize feedback chains (derivative of a
/// derivative of a derivative of the evolving state), which the O(1)
/// extrapolation weights avoid.
enum class BoundaryClosure { OneSided, Extrapolated };

/// d^m/da^m on a uniform grid. Interior rows use the centred (2p+1)-point
/// stencil of order 2p; the first/last p rows follow the closure policy.
class DiffOp {
public:
    DiffOp() = default;

    /// n grid points, spacing h, derivative order `deriv`, half-width p
    /// (default 4: 9-point stencils, 8th order for deriv=1).
    DiffOp(int n, double h, int deriv = 1,
           BoundaryClosure closure = BoundaryClosure::OneSided, int p = 4);

    int size() const { return n_; }
    double spacing() const { return h_; }
    int derivative_order() const { return m_; }

    void apply(std::span<const double> f, std::span<double> out) const;
    void apply(std::span<const std::complex<double>> f,
               std::span<std::complex<double>> out) const;

    std::vector<double> operator()(std::span<const double> f) const;

    /// Max over wavenumbers of |symbol(theta)| * h^m for the interior
    /// stencil. For deriv=1 this bounds the effective wavenumber k_eff*h the
    /// operator can produce; explicit time-step limits derive from it.
    double max_symbol() const;

private:
    template <class T>
    void apply_impl(std::span<const T> f, std::span<T> out) const;

    int n_ = 0;
    int m_ = 1;
    int p_ = 4;
    int w_ = 9;  // stencil width, 2p+1
    double h_ = 1.0;
    BoundaryClosure closure_ = BoundaryClosure::OneSided;
    std::vector<double> centered_;             // w_ scaled weights
    std::vector<std::vector<double>> left_;    // rows 0..p-1
    std::vector<std::vector<double>> right_;   // rows n-p..n-1
};

/// Trapezoidal cumulative integral of samples f on a uniform grid: out[0]=0,
/// out[i] = integral up to node i.
std::vector<double> cumulative_trapezoid(std::span<const double> f, double h);

/// Trapezoidal quadrature with half-weight endpoints.
double trapezoid(std::span<const double> f, double h);

}  // namespace qflow
