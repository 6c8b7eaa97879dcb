#pragma once

// Exact eigen-decompositions of the discrete operators.
//
// The ghost-reflection Neumann Laplacian on the node grid is diagonalized by the
// products cos(k pi i / nx) cos(l pi j / ny), and the Dirichlet beam operator by
// sin(k pi j h0). Both families are orthogonal in the trapezoidal inner products,
// so fractional powers and mode projections are available in closed form.

#include "acoustoplate/discrete_operators.hpp"

#include <cmath>
#include <numbers>

namespace acoustoplate {

class WaveSpectrum {
public:
    explicit WaveSpectrum(const DiscreteOperators& ops) : nx_(ops.grid.nx), ny_(ops.grid.ny), mu_(ops.mu) {
        build_1d(nx_, ops.grid.hx, fx_, lx_, nrmx_);
        build_1d(ny_, ops.grid.hy, fy_, ly_, nrmy_);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }

    /// Eigenvalue of A_wave (including mu) for mode (k, l).
    double eigenvalue(int k, int l) const { return lx_[k] + ly_[l] + mu_; }
    /// Eigenvalue of the Neumann Laplacian alone.
    double laplacian_eigenvalue(int k, int l) const { return lx_[k] + ly_[l]; }
    /// Weighted squared norm of mode (k, l).
    double mode_norm_sq(int k, int l) const { return nrmx_[k] * nrmy_[l]; }

    /// Coefficients c_kl with z = sum c_kl cos_k(x) cos_l(y); returned as (nx+1) x (ny+1).
    Matrix coefficients(const Vector& z) const {
        Eigen::Map<const Matrix> zz(z.data(), nx_ + 1, ny_ + 1);
        return fx_ * zz * fy_.transpose();
    }

    /// (A^s z, z) in the weighted inner product.
    double fractional_norm_sq(const Vector& z, double s) const {
        const Matrix c = coefficients(z);
        double acc = 0.0;
        for (int l = 0; l <= ny_; ++l)
            for (int k = 0; k <= nx_; ++k) acc += std::pow(eigenvalue(k, l), s) * c(k, l) * c(k, l) * mode_norm_sq(k, l);
        return acc;
    }

    /// Nodal values of mode (k, l).
    Vector mode(int k, int l) const {
        Vector out((nx_ + 1) * (ny_ + 1));
        for (int j = 0; j <= ny_; ++j)
            for (int i = 0; i <= nx_; ++i)
                out[i + (nx_ + 1) * j] = std::cos(k * std::numbers::pi * i / nx_) * std::cos(l * std::numbers::pi * j / ny_);
        return out;
    }

private:
    static void build_1d(int n, double h, Matrix& forward, Vector& lambda, Vector& nrm) {
        forward.resize(n + 1, n + 1);
        lambda.resize(n + 1);
        nrm.resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            lambda[k] = neumann_eigenvalue(n, k);
            nrm[k] = (k == 0 || k == n) ? 1.0 : 0.5;  // times total length 1
            for (int i = 0; i <= n; ++i) {
                const double w = h * ((i == 0 || i == n) ? 0.5 : 1.0);
                forward(k, i) = std::cos(k * std::numbers::pi * i / n) * w / nrm[k];
            }
        }
    }

    int nx_, ny_;
    double mu_;
    Matrix fx_, fy_;
    Vector lx_, ly_, nrmx_, nrmy_;
};

class BeamSpectrum {
public:
    explicit BeamSpectrum(const DiscreteOperators& ops) : n0_(ops.grid.n0) {
        const int m = n0_ - 1;
        forward_.resize(m, m);
        lambda_.resize(m);
        for (int k = 1; k <= m; ++k) {
            lambda_[k - 1] = dirichlet_eigenvalue(n0_, k);
            for (int j = 1; j <= m; ++j)
                forward_(k - 1, j - 1) = 2.0 * ops.grid.h0 * std::sin(k * std::numbers::pi * j / n0_);
        }
    }

    int size() const { return n0_ - 1; }
    /// Eigenvalue of A_beam for mode k = 1..n0-1.
    double eigenvalue(int k) const { return lambda_[k - 1]; }
    /// Every sine mode has weighted squared norm 1/2.
    static constexpr double mode_norm_sq() { return 0.5; }

    /// c_k with v = sum c_k sin(k pi x); entry k-1 holds mode k.
    Vector coefficients(const Vector& v) const { return forward_ * v; }

    /// (A_beam^s v, v).
    double fractional_norm_sq(const Vector& v, double s) const {
        const Vector c = coefficients(v);
        double acc = 0.0;
        for (int k = 1; k <= size(); ++k) acc += std::pow(eigenvalue(k), s) * c[k - 1] * c[k - 1] * mode_norm_sq();
        return acc;
    }

    Vector mode(int k) const {
        Vector out(size());
        for (int j = 1; j <= size(); ++j) out[j - 1] = std::sin(k * std::numbers::pi * j / n0_);
        return out;
    }

private:
    int n0_;
    Matrix forward_;
    Vector lambda_;
};

} // namespace acoustoplate
