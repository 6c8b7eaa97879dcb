#pragma once

// Stationary set of the coupled system. Stationary points are (z*, 0, v*, 0, 0)
// where z* solves A z + F1(z) = 0 and v* solves A_beam^2 v + F2(v) = 0. Neither
// problem involves gamma or kappa, so the set is the same for all of them.

#include "acoustoplate/discrete_operators.hpp"
#include "acoustoplate/errors.hpp"
#include "acoustoplate/model.hpp"
#include "acoustoplate/norms.hpp"
#include "acoustoplate/parallel.hpp"
#include "acoustoplate/spectral.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace acoustoplate {

struct StationaryResult {
    Vector field;
    double residual = 0.0;  // normwise backward error, see below
    int iterations = 0;
};

struct Equilibrium {
    Vector z_star;
    Vector v_star;
    double residual_wave = 0.0;
    double residual_plate = 0.0;
    std::string label;
    double min_hessian_eigenvalue = std::numeric_limits<double>::quiet_NaN();

    SimState as_state(const DiscreteOperators& ops) const {
        SimState s = SimState::zero(ops);
        s.z = z_star;
        s.v = v_star;
        return s;
    }
};

namespace detail {

inline double sparse_inf_norm(const SparseMatrix& a) {
    Vector rows = Vector::Zero(a.rows());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.maxCoeff();
}

inline Vector wave_residual(const Vector& z, const ModelParams& p, const DiscreteOperators& ops) {
    return ops.A_wave * z + eval_F1(z, p);
}

inline Vector plate_residual(const Vector& v, const ModelParams& p, const DiscreteOperators& ops) {
    const Vector av = ops.A_beam * v;
    return ops.A_beam * av + eval_F2(v, p, ops);
}

} // namespace detail

/// Backward error |G(z)|_inf / (1 + |A|_inf |z|_inf) of the wave stationary problem.
inline double wave_stationary_residual(const Vector& z, const ModelParams& p, const DiscreteOperators& ops) {
    const double scale = 1.0 + detail::sparse_inf_norm(ops.A_wave) * z.lpNorm<Eigen::Infinity>();
    return detail::wave_residual(z, p, ops).lpNorm<Eigen::Infinity>() / scale;
}

/// Backward error of the plate problem, scaled by the size of its three terms.
inline double plate_stationary_residual(const Vector& v, const ModelParams& p, const DiscreteOperators& ops) {
    const double a = detail::sparse_inf_norm(ops.A_beam);
    const double vi = v.lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + a * a * vi + std::abs(berger_coefficient(v, p, ops)) * a * vi +
                         p.load(ops).lpNorm<Eigen::Infinity>();
    return detail::plate_residual(v, p, ops).lpNorm<Eigen::Infinity>() / scale;
}

/// Newton with backtracking for A z + f(z) - mu z = 0 (homogeneous Neumann data).
inline StationaryResult solve_wave_stationary(const Vector& guess, const ModelParams& p, const DiscreteOperators& ops,
                                              double tol, int max_iter = 60) {
    if (!p.f.is_polynomial()) throw ConfigError("wave stationary problem: f must be an odd polynomial");
    if (guess.size() != ops.wave_size()) throw ConfigError("wave stationary problem: guess has the wrong size");
    const int n = ops.wave_size();
    StationaryResult r;
    r.field = guess;
    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    Vector G = detail::wave_residual(r.field, p, ops);
    r.residual = wave_stationary_residual(r.field, p, ops);
    for (int it = 0; it < max_iter && r.residual > tol; ++it) {
        SparseMatrix J = ops.A_wave;
        for (int k = 0; k < n; ++k) J.coeffRef(k, k) += p.f.derivative(r.field[k]) - p.mu;
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) throw SolverError("wave stationary problem: singular Jacobian", r.residual);
        const Vector delta = lu.solve(G);
        double lam = 1.0;
        const double g0 = G.lpNorm<Eigen::Infinity>();
        Vector trial;
        Vector Gt;
        for (int bt = 0; bt < 30; ++bt, lam *= 0.5) {
            trial = r.field - lam * delta;
            Gt = detail::wave_residual(trial, p, ops);
            if (Gt.lpNorm<Eigen::Infinity>() < g0 || bt == 29) break;
        }
        r.field = trial;
        G = Gt;
        r.residual = wave_stationary_residual(r.field, p, ops);
        r.iterations = it + 1;
        if (!r.field.allFinite()) break;
    }
    if (!(r.residual <= tol))
        throw SolverError("wave stationary problem: Newton did not converge (residual " + std::to_string(r.residual) + ")",
                          r.residual);
    return r;
}

/// Newton with backtracking for A_beam^2 v - (Q - |A^{1/2} v|^2) A_beam v = p0 (hinged ends).
inline StationaryResult solve_plate_stationary(const Vector& guess, const ModelParams& p, const DiscreteOperators& ops,
                                               double tol, int max_iter = 100) {
    if (guess.size() != ops.beam_size()) throw ConfigError("plate stationary problem: guess has the wrong size");
    const Matrix A = Matrix(ops.A_beam);
    const Matrix A2 = A * A;
    const double h0 = ops.grid.h0;
    StationaryResult r;
    r.field = guess;
    Vector G = detail::plate_residual(r.field, p, ops);
    r.residual = plate_stationary_residual(r.field, p, ops);
    // Once the backward error is below tol, up to three more steps polish the forward
    // error, which the stiff A_beam^2 term can leave well above tol.
    double step = std::numeric_limits<double>::infinity();
    int polish = 0;
    for (int it = 0; it < max_iter; ++it) {
        if (r.residual <= tol) {
            if (step <= 1e-15 * (1.0 + r.field.lpNorm<Eigen::Infinity>()) || polish == 3) break;
            ++polish;
        }
        const Vector av = A * r.field;
        const double coef = berger_coefficient(r.field, p, ops);
        const Matrix J = A2 - coef * A + 2.0 * h0 * av * av.transpose();
        Eigen::PartialPivLU<Matrix> lu(J);
        const Vector delta = lu.solve(G);
        if (!delta.allFinite()) throw SolverError("plate stationary problem: singular Jacobian", r.residual);
        double lam = 1.0;
        const double g0 = G.lpNorm<Eigen::Infinity>();
        Vector trial, Gt;
        for (int bt = 0; bt < 30; ++bt, lam *= 0.5) {
            trial = r.field - lam * delta;
            Gt = detail::plate_residual(trial, p, ops);
            if (Gt.lpNorm<Eigen::Infinity>() < g0 || bt == 29) break;
        }
        if (r.residual <= tol && !(Gt.lpNorm<Eigen::Infinity>() <= g0)) break;
        step = (trial - r.field).lpNorm<Eigen::Infinity>();
        r.field = trial;
        G = Gt;
        r.residual = plate_stationary_residual(r.field, p, ops);
        r.iterations = it + 1;
    }
    if (!(r.residual <= tol))
        throw SolverError("plate stationary problem: Newton did not converge (residual " + std::to_string(r.residual) + ")",
                          r.residual);
    return r;
}

/// Discrete amplitude of the one-mode buckled state: a_h^2 = 2 (Q - lambda_k) / lambda_k.
inline double buckled_amplitude(const ModelParams& p, const DiscreteOperators& ops, int k = 1) {
    const double lam = dirichlet_eigenvalue(ops.grid.n0, k);
    if (p.Q <= lam) return 0.0;
    return std::sqrt(2.0 * (p.Q - lam) / lam);
}

/// Coefficient of sin(pi x) in v.
inline double first_mode_amplitude(const Vector& v, const DiscreteOperators& ops) {
    return BeamSpectrum(ops).coefficients(v)[0];
}

struct EquilibriumOptions {
    int n_starts = 8;            // random seeds per subproblem, on top of the structured seeds
    double tol = 1e-10;
    double dedupe = 1e-6;        // Y-norm distance below which two solutions are merged
    std::uint64_t seed = 0;
    int threads = 1;
    bool hessian = true;         // report the smallest eigenvalue of the linearization
};

struct EquilibriumSet {
    std::vector<Equilibrium> items;
    std::vector<StationaryResult> wave_parts;
    std::vector<StationaryResult> plate_parts;
    std::vector<std::string> wave_labels, plate_labels;
    double R_star_star = 0.0;    // max |V|_Y over the set
    int failed_starts = 0;
};

namespace detail {

inline std::string fmt_g(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

inline std::string wave_label(const Vector& z, int index) {
    if (z.maxCoeff() - z.minCoeff() <= 1e-8) {
        double c = z.mean();
        if (std::abs(c) < 1e-12) c = 0.0;
        return "z=const(" + fmt_g(c) + ")";
    }
    return "z=nonconstant#" + std::to_string(index);
}

inline std::string plate_label(const Vector& v, const DiscreteOperators& ops, int index) {
    const Vector c = BeamSpectrum(ops).coefficients(v);
    const double total = c.norm();
    if (total <= 1e-10) return "v=0";
    Eigen::Index k = 0;
    c.cwiseAbs().maxCoeff(&k);
    if (std::abs(c[k]) >= (1.0 - 1e-6) * total)
        return std::string("v=") + (c[k] > 0 ? "+" : "-") + "mode" + std::to_string(k + 1);
    return "v=mixed#" + std::to_string(index);
}

/// Smallest eigenvalue of the symmetrized wave Hessian W^{1/2}(A + diag F1')W^{-1/2}.
inline double wave_hessian_min(const Vector& z, const ModelParams& p, const DiscreteOperators& ops) {
    if (ops.wave_size() > 1500) return std::numeric_limits<double>::quiet_NaN();
    const Vector s = ops.wave_weights.cwiseSqrt();
    Matrix H = s.asDiagonal() * Matrix(ops.A_wave) * s.cwiseInverse().asDiagonal();
    for (int k = 0; k < ops.wave_size(); ++k) H(k, k) += p.f.derivative(z[k]) - p.mu;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

inline double plate_hessian_min(const Vector& v, const ModelParams& p, const DiscreteOperators& ops) {
    const Matrix A = Matrix(ops.A_beam);
    const Vector av = A * v;
    const Matrix J = A * A - berger_coefficient(v, p, ops) * A + 2.0 * ops.grid.h0 * av * av.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (J + J.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

} // namespace detail

/// Multi-start Newton over both stationary problems; the result is the product set.
inline EquilibriumSet enumerate_equilibria(const ModelParams& params, const DiscreteOperators& ops,
                                           const EquilibriumOptions& opt) {
    params.validate();
    if (opt.n_starts < 1) throw ConfigError("equilibria: n_starts must be >= 1");
    if (!(opt.tol > 0.0)) throw ConfigError("equilibria: tol must be positive");

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const WaveSpectrum ws(ops);
    const BeamSpectrum bs(ops);

    // Wave seeds: constants at the real roots of f, then random smooth fields.
    std::vector<Vector> wave_seeds;
    const auto roots = params.f.polynomial().real_roots();
    double spread = 1.0;
    for (double r : roots) {
        wave_seeds.push_back(Vector::Constant(ops.wave_size(), r));
        spread = std::max(spread, std::abs(r));
    }
    for (int s = 0; s < opt.n_starts; ++s) {
        Vector z = Vector::Constant(ops.wave_size(), 1.5 * spread * unif(rng));
        for (int k = 0; k <= 2; ++k)
            for (int l = 0; l <= 2; ++l)
                if (k + l > 0) z += 0.2 * spread * normal(rng) * ws.mode(k, l);
        wave_seeds.push_back(z);
    }

    // Plate seeds: zero, the one-mode buckled states below Q, then random low-mode fields.
    std::vector<Vector> plate_seeds;
    plate_seeds.push_back(Vector::Zero(ops.beam_size()));
    double amp = 1.0;
    for (int k = 1; k <= bs.size(); ++k) {
        const double a = buckled_amplitude(params, ops, k);
        if (a <= 0.0) break;
        plate_seeds.push_back(a * bs.mode(k));
        plate_seeds.push_back(-a * bs.mode(k));
        amp = std::max(amp, a);
    }
    for (int s = 0; s < opt.n_starts; ++s) {
        Vector v = Vector::Zero(ops.beam_size());
        for (int k = 1; k <= std::min(3, bs.size()); ++k) v += amp * normal(rng) / k * bs.mode(k);
        plate_seeds.push_back(v);
    }

    std::vector<std::optional<StationaryResult>> wave_out(wave_seeds.size()), plate_out(plate_seeds.size());
    const int nw = static_cast<int>(wave_seeds.size());
    const int total = nw + static_cast<int>(plate_seeds.size());
    parallel_for(total, opt.threads, [&](int i) {
        try {
            if (i < nw)
                wave_out[i] = solve_wave_stationary(wave_seeds[i], params, ops, opt.tol);
            else
                plate_out[i - nw] = solve_plate_stationary(plate_seeds[i - nw], params, ops, opt.tol);
        } catch (const SolverError&) {
        }
    });

    EquilibriumSet set;
    for (const auto& w : wave_out) {
        if (!w) {
            ++set.failed_starts;
            continue;
        }
        bool dup = false;
        for (const auto& kept : set.wave_parts) {
            const Vector d = w->field - kept.field;
            if (std::sqrt(std::max(0.0, params.beta * ops.wave_inner(ops.A_wave * d, d))) <= opt.dedupe) dup = true;
        }
        if (!dup) set.wave_parts.push_back(*w);
    }
    for (const auto& v : plate_out) {
        if (!v) {
            ++set.failed_starts;
            continue;
        }
        bool dup = false;
        for (const auto& kept : set.plate_parts) {
            const Vector d = v->field - kept.field;
            if (std::sqrt(params.alpha * ops.beam_norm_sq(ops.A_beam * d)) <= opt.dedupe) dup = true;
        }
        if (!dup) set.plate_parts.push_back(*v);
    }
    std::stable_sort(set.wave_parts.begin(), set.wave_parts.end(),
                     [](const StationaryResult& a, const StationaryResult& b) { return a.field.mean() < b.field.mean(); });
    std::stable_sort(set.plate_parts.begin(), set.plate_parts.end(), [&](const StationaryResult& a, const StationaryResult& b) {
        return first_mode_amplitude(a.field, ops) < first_mode_amplitude(b.field, ops);
    });

    for (std::size_t i = 0; i < set.wave_parts.size(); ++i)
        set.wave_labels.push_back(detail::wave_label(set.wave_parts[i].field, static_cast<int>(i)));
    for (std::size_t i = 0; i < set.plate_parts.size(); ++i)
        set.plate_labels.push_back(detail::plate_label(set.plate_parts[i].field, ops, static_cast<int>(i)));

    std::vector<double> wave_min(set.wave_parts.size()), plate_min(set.plate_parts.size());
    for (std::size_t i = 0; i < set.wave_parts.size(); ++i)
        wave_min[i] = opt.hessian ? detail::wave_hessian_min(set.wave_parts[i].field, params, ops)
                                  : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < set.plate_parts.size(); ++j)
        plate_min[j] = opt.hessian ? detail::plate_hessian_min(set.plate_parts[j].field, params, ops)
                                   : std::numeric_limits<double>::quiet_NaN();

    const SimState zero = SimState::zero(ops);
    for (std::size_t i = 0; i < set.wave_parts.size(); ++i)
        for (std::size_t j = 0; j < set.plate_parts.size(); ++j) {
            Equilibrium e;
            e.z_star = set.wave_parts[i].field;
            e.v_star = set.plate_parts[j].field;
            e.residual_wave = set.wave_parts[i].residual;
            e.residual_plate = set.plate_parts[j].residual;
            e.label = set.wave_labels[i] + "|" + set.plate_labels[j];
            e.min_hessian_eigenvalue = std::fmin(wave_min[i], plate_min[j]);
            set.R_star_star = std::max(set.R_star_star, y_norm(e.as_state(ops), zero, params, ops));
            set.items.push_back(std::move(e));
        }
    return set;
}

inline EquilibriumSet enumerate_equilibria(const ModelParams& params, const DiscreteOperators& ops, int n_starts,
                                           double tol) {
    EquilibriumOptions opt;
    opt.n_starts = n_starts;
    opt.tol = tol;
    return enumerate_equilibria(params, ops, opt);
}

} // namespace acoustoplate
