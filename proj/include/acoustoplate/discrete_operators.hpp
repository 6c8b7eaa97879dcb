#pragma once

// Finite-difference realization of the chamber/wall operators.
//
// Chamber: Omega = [0,1]^2 sampled at nodes (i*hx, j*hy), i = 0..nx, j = 0..ny.
// The elastic wall Gamma0 is the bottom edge y = 0; the beam lives on the same
// x-nodes (n0 == nx). Beam unknowns are stored on the interior nodes 1..n0-1 only,
// since v, Delta v and theta vanish at the hinged ends.
//
// Quadrature is tensor trapezoidal on Omega and trapezoidal on Gamma0. With that
// choice the ghost-node Neumann Laplacian is self-adjoint in the weighted inner
// product and trace/flux_inject are exact adjoints.

#include "acoustoplate/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace acoustoplate {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct GridSpec {
    int nx = 16;
    int ny = 16;
    int n0 = 16;
    double hx = 1.0 / 16;
    double hy = 1.0 / 16;
    double h0 = 1.0 / 16;

    /// Square-cell grid with the beam sharing the chamber's bottom-row nodes.
    static GridSpec make(int nx, int ny) {
        GridSpec g;
        g.nx = nx;
        g.ny = ny;
        g.n0 = nx;
        g.hx = 1.0 / nx;
        g.hy = 1.0 / ny;
        g.h0 = 1.0 / nx;
        return g;
    }

    void validate() const {
        if (nx < 8 || ny < 8 || n0 < 8)
            throw ConfigError("grid: all cell counts must be >= 8 (got nx=" + std::to_string(nx) +
                              ", ny=" + std::to_string(ny) + ", n0=" + std::to_string(n0) + ")");
        if (n0 != nx)
            throw ConfigError("grid: n0 must equal nx so the beam shares the chamber's bottom nodes");
        auto close = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b)); };
        if (!close(hx, 1.0 / nx) || !close(hy, 1.0 / ny) || !close(h0, 1.0 / n0))
            throw ConfigError("grid: mesh widths must be 1/nx, 1/ny, 1/n0");
    }

    int wave_size() const { return (nx + 1) * (ny + 1); }
    int boundary_size() const { return n0 + 1; }
    int beam_size() const { return n0 - 1; }
    int wave_index(int i, int j) const { return i + (nx + 1) * j; }

    bool operator==(const GridSpec& o) const { return nx == o.nx && ny == o.ny && n0 == o.n0; }
};

/// Closed-form eigenvalue of the three-point Dirichlet Laplacian on n cells:
/// (2/h^2)(1 - cos(k pi h)).
inline double dirichlet_eigenvalue(int n, int k) {
    const double h = 1.0 / n;
    return 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi * h));
}

/// Closed-form eigenvalue of the node-based ghost-reflection Neumann Laplacian
/// on n cells, k = 0..n.
inline double neumann_eigenvalue(int n, int k) {
    const double h = 1.0 / n;
    return 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi / n));
}

struct DiscreteOperators {
    GridSpec grid;
    double mu = 1.0;
    double gamma = 0.0;

    Vector wave_weights;      // trapezoidal node weights on Omega (sum = 1)
    Vector boundary_weights;  // trapezoidal node weights on Gamma0 (sum = 1)

    SparseMatrix stiffness;   // symmetric Neumann stiffness K, (K z, z) = |grad z|^2
    SparseMatrix A_wave;      // W^{-1} K + mu I
    SparseMatrix A_beam;      // Dirichlet -d^2/dx^2 on interior beam nodes
    SparseMatrix M_gamma;     // I + gamma A_beam
    SparseMatrix trace_B;     // wave -> Gamma0 nodes (restriction to bottom row)
    SparseMatrix flux_BT;     // Gamma0 density -> wave load
    SparseMatrix beam_trace;  // wave -> interior beam nodes
    SparseMatrix beam_flux;   // interior beam field (zero ends) -> wave load

    int wave_size() const { return grid.wave_size(); }
    int beam_size() const { return grid.beam_size(); }

    double wave_inner(const Vector& a, const Vector& b) const {
        return (a.array() * b.array() * wave_weights.array()).sum();
    }
    double boundary_inner(const Vector& a, const Vector& b) const {
        return (a.array() * b.array() * boundary_weights.array()).sum();
    }
    /// Beam fields vanish at the ends, so the trapezoidal rule reduces to h0 * dot.
    double beam_inner(const Vector& a, const Vector& b) const { return grid.h0 * a.dot(b); }

    double wave_norm_sq(const Vector& a) const { return wave_inner(a, a); }
    double beam_norm_sq(const Vector& a) const { return beam_inner(a, a); }

    /// Interior beam field -> Gamma0 nodal field with zero ends.
    Vector embed_beam(const Vector& v) const {
        Vector out = Vector::Zero(grid.boundary_size());
        out.segment(1, grid.beam_size()) = v;
        return out;
    }
    Vector restrict_to_beam(const Vector& phi) const { return phi.segment(1, grid.beam_size()); }

    /// Largest eigenvalue of A_beam (used for the stiffness warning).
    double beam_max_eigenvalue() const { return dirichlet_eigenvalue(grid.n0, grid.n0 - 1); }
    double beam_min_eigenvalue() const { return dirichlet_eigenvalue(grid.n0, 1); }
};

namespace detail {

inline double trapezoid_factor(int i, int n) { return (i == 0 || i == n) ? 0.5 : 1.0; }

inline SparseMatrix dirichlet_laplacian(int n) {
    const int m = n - 1;
    const double h = 1.0 / n;
    const double s = 1.0 / (h * h);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(3 * m);
    for (int j = 0; j < m; ++j) {
        t.emplace_back(j, j, 2.0 * s);
        if (j > 0) t.emplace_back(j, j - 1, -s);
        if (j + 1 < m) t.emplace_back(j, j + 1, -s);
    }
    SparseMatrix a(m, m);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

} // namespace detail

inline DiscreteOperators build_operators(const GridSpec& grid, double mu, double gamma) {
    grid.validate();
    if (!(mu > 0.0)) throw ConfigError("operators: mu must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("operators: gamma must lie in [0,1]");

    DiscreteOperators ops;
    ops.grid = grid;
    ops.mu = mu;
    ops.gamma = gamma;

    const int nx = grid.nx, ny = grid.ny;
    const int nw = grid.wave_size();

    ops.wave_weights.resize(nw);
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            ops.wave_weights[grid.wave_index(i, j)] =
                grid.hx * grid.hy * detail::trapezoid_factor(i, nx) * detail::trapezoid_factor(j, ny);

    ops.boundary_weights.resize(grid.boundary_size());
    for (int i = 0; i <= grid.n0; ++i) ops.boundary_weights[i] = grid.h0 * detail::trapezoid_factor(i, grid.n0);

    // Edge-based stiffness: each x-edge carries the trapezoidal y-weight of its row,
    // each y-edge the x-weight of its column. Dividing by W reproduces the
    // ghost-reflection stencil at boundary nodes.
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(4 * 2 * nw);
    auto add_edge = [&](int a, int b, double c) {
        t.emplace_back(a, a, c);
        t.emplace_back(b, b, c);
        t.emplace_back(a, b, -c);
        t.emplace_back(b, a, -c);
    };
    for (int j = 0; j <= ny; ++j) {
        const double wy = grid.hy * detail::trapezoid_factor(j, ny);
        for (int i = 0; i < nx; ++i) add_edge(grid.wave_index(i, j), grid.wave_index(i + 1, j), wy / grid.hx);
    }
    for (int i = 0; i <= nx; ++i) {
        const double wx = grid.hx * detail::trapezoid_factor(i, nx);
        for (int j = 0; j < ny; ++j) add_edge(grid.wave_index(i, j), grid.wave_index(i, j + 1), wx / grid.hy);
    }
    ops.stiffness.resize(nw, nw);
    ops.stiffness.setFromTriplets(t.begin(), t.end());
    ops.stiffness.makeCompressed();

    SparseMatrix identity(nw, nw);
    identity.setIdentity();
    ops.A_wave = ops.wave_weights.cwiseInverse().asDiagonal() * ops.stiffness + mu * identity;
    ops.A_wave.makeCompressed();

    ops.A_beam = detail::dirichlet_laplacian(grid.n0);
    SparseMatrix ib(grid.beam_size(), grid.beam_size());
    ib.setIdentity();
    ops.M_gamma = ib + gamma * ops.A_beam;
    ops.M_gamma.makeCompressed();

    std::vector<Eigen::Triplet<double>> tr, fl;
    for (int i = 0; i <= grid.n0; ++i) {
        const int node = grid.wave_index(i, 0);
        tr.emplace_back(i, node, 1.0);
        fl.emplace_back(node, i, ops.boundary_weights[i] / ops.wave_weights[node]);
    }
    ops.trace_B.resize(grid.boundary_size(), nw);
    ops.trace_B.setFromTriplets(tr.begin(), tr.end());
    ops.flux_BT.resize(nw, grid.boundary_size());
    ops.flux_BT.setFromTriplets(fl.begin(), fl.end());

    // Beam-interior versions used by the coupled dynamics.
    ops.beam_trace = ops.trace_B.middleRows(1, grid.beam_size());
    ops.beam_flux = ops.flux_BT.middleCols(1, grid.beam_size());
    ops.beam_trace.makeCompressed();
    ops.beam_flux.makeCompressed();
    return ops;
}

/// Restriction of a wave field to the Gamma0 nodes (the discrete N0* A).
inline Vector trace(const Vector& z, const DiscreteOperators& ops) { return ops.trace_B * z; }

/// Load vector imposing Neumann flux phi on Gamma0; adjoint of trace.
inline Vector flux_inject(const Vector& phi, const DiscreteOperators& ops) { return ops.flux_BT * phi; }

/// Discrete Neumann map: solves A_wave psi = flux_inject(phi). Test utility only.
inline Vector neumann_map_solve(const Vector& phi, const DiscreteOperators& ops) {
    // W A_wave = K + mu W is symmetric positive definite.
    SparseMatrix weighted = ops.stiffness;
    for (int k = 0; k < ops.wave_size(); ++k) weighted.coeffRef(k, k) += ops.mu * ops.wave_weights[k];
    Eigen::SimplicialLDLT<SparseMatrix> solver(weighted);
    if (solver.info() != Eigen::Success) throw SolverError("neumann map: factorization failed", NAN);
    const Vector rhs = ops.wave_weights.asDiagonal() * flux_inject(phi, ops);
    Vector psi = solver.solve(rhs);
    const double res = (ops.A_wave * psi - flux_inject(phi, ops)).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + flux_inject(phi, ops).lpNorm<Eigen::Infinity>();
    if (solver.info() != Eigen::Success || !(res <= 1e-8 * scale))
        throw SolverError("neumann map: linear solve did not converge", res);
    return psi;
}

} // namespace acoustoplate
