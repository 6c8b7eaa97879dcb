#pragma once

// Attractor diagnostics: distance to the stationary set, empirical attractor
// samples, difference-trajectory functionals, the stabilizability fit, box
// counting and upper semi-continuity in (gamma, kappa).

#include "acoustoplate/discrete_operators.hpp"
#include "acoustoplate/equilibria.hpp"
#include "acoustoplate/errors.hpp"
#include "acoustoplate/integrator.hpp"
#include "acoustoplate/model.hpp"
#include "acoustoplate/norms.hpp"
#include "acoustoplate/parallel.hpp"
#include "acoustoplate/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace acoustoplate {

// --- distances ---------------------------------------------------------------

inline double dist_to_equilibria(const SimState& s, const std::vector<Equilibrium>& eq, const ModelParams& p,
                                 const DiscreteOperators& ops) {
    if (eq.empty()) throw DiagnosticError("dist_to_equilibria: empty equilibrium list");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : eq) best = std::min(best, y_norm(s, e.as_state(ops), p, ops));
    return best;
}

/// |z|_1^2 + |z_t|^2 + |Delta v|^2 + |v_t|^2 + gamma |grad v_t|^2 + |theta|^2.
inline double uniform_bound_functional(const SimState& s, const DiscreteOperators& ops) {
    return s.z.dot(ops.stiffness * s.z) + ops.wave_norm_sq(s.z) + ops.wave_norm_sq(s.zt) +
           ops.beam_norm_sq(ops.A_beam * s.v) + ops.beam_inner(ops.M_gamma * s.vt, s.vt) + ops.beam_norm_sq(s.theta);
}

/// Maxima of `series` over consecutive windows of `window` entries.
inline std::vector<double> windowed_maxima(const std::vector<double>& series, std::size_t window) {
    std::vector<double> out;
    if (window == 0) window = 1;
    for (std::size_t i = 0; i < series.size(); i += window) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = i; j < std::min(series.size(), i + window); ++j) m = std::max(m, series[j]);
        out.push_back(m);
    }
    return out;
}

// --- orthonormal coordinates -------------------------------------------------

/// Coordinates of a state in the eigenbasis of the discrete operators, scaled so
/// that the Euclidean norm of the coordinate vector equals the Y-norm (or, with
/// `plate_h`, the plate-only norm |A_beam v|^2 + |v_t|^2 + |theta|^2). Coordinates
/// are ordered from low to high frequency.
class YEmbedding {
public:
    enum class Field { Z = 0, Zt = 1, V = 2, Vt = 3, Theta = 4 };
    struct Coord {
        Field field;
        int k, l;
        double weight;
        double key;
    };

    YEmbedding(const ModelParams& p, const DiscreteOperators& ops, bool plate_h = false)
        : ws_(ops), bs_(ops), nx_(ops.grid.nx), ny_(ops.grid.ny) {
        const double gamma = ops.gamma;
        if (!plate_h) {
            for (int l = 0; l <= ny_; ++l)
                for (int k = 0; k <= nx_; ++k) {
                    const double n = ws_.mode_norm_sq(k, l), key = ws_.laplacian_eigenvalue(k, l);
                    coords_.push_back({Field::Z, k, l, std::sqrt(p.beta * ws_.eigenvalue(k, l) * n), key});
                    coords_.push_back({Field::Zt, k, l, std::sqrt(p.beta * n), key});
                }
        }
        const double a = plate_h ? 1.0 : p.alpha;
        for (int k = 1; k <= bs_.size(); ++k) {
            const double lam = bs_.eigenvalue(k), n = BeamSpectrum::mode_norm_sq();
            coords_.push_back({Field::V, k, 0, std::sqrt(a * lam * lam * n), lam});
            coords_.push_back({Field::Vt, k, 0, std::sqrt(a * (plate_h ? 1.0 : 1.0 + gamma * lam) * n), lam});
            coords_.push_back({Field::Theta, k, 0, std::sqrt(a * n), lam});
        }
        std::stable_sort(coords_.begin(), coords_.end(), [](const Coord& x, const Coord& y) {
            const double tol = 1e-9 * std::max(1.0, std::max(x.key, y.key));
            if (std::abs(x.key - y.key) > tol) return x.key < y.key;
            if (x.field != y.field) return static_cast<int>(x.field) < static_cast<int>(y.field);
            if (x.k != y.k) return x.k < y.k;
            return x.l < y.l;
        });
    }

    int size() const { return static_cast<int>(coords_.size()); }
    const std::vector<Coord>& coords() const { return coords_; }

    /// First `n` coordinates (all when n <= 0).
    Vector operator()(const SimState& s, int n = 0) const {
        if (n <= 0 || n > size()) n = size();
        Matrix cz, czt;
        Vector cv, cvt, cth;
        bool wave = false;
        for (int i = 0; i < n; ++i) wave = wave || coords_[i].field == Field::Z || coords_[i].field == Field::Zt;
        if (wave) {
            cz = ws_.coefficients(s.z);
            czt = ws_.coefficients(s.zt);
        }
        cv = bs_.coefficients(s.v);
        cvt = bs_.coefficients(s.vt);
        cth = bs_.coefficients(s.theta);
        Vector out(n);
        for (int i = 0; i < n; ++i) {
            const Coord& c = coords_[i];
            double x = 0.0;
            switch (c.field) {
            case Field::Z: x = cz(c.k, c.l); break;
            case Field::Zt: x = czt(c.k, c.l); break;
            case Field::V: x = cv[c.k - 1]; break;
            case Field::Vt: x = cvt[c.k - 1]; break;
            case Field::Theta: x = cth[c.k - 1]; break;
            }
            out[i] = c.weight * x;
        }
        return out;
    }

    /// Indices of wave and plate coordinates among the first n.
    std::pair<std::vector<int>, std::vector<int>> split(int n = 0) const {
        if (n <= 0 || n > size()) n = size();
        std::vector<int> w, p;
        for (int i = 0; i < n; ++i)
            (coords_[i].field == Field::Z || coords_[i].field == Field::Zt ? w : p).push_back(i);
        return {w, p};
    }

private:
    WaveSpectrum ws_;
    BeamSpectrum bs_;
    int nx_, ny_;
    std::vector<Coord> coords_;
};

// --- energy ball and attractor samples -----------------------------------------

/// Total energy with the rotational term taken at gamma = 1; an upper bound of the
/// energy for every gamma in [0,1], so states below R lie in W_R for all gamma.
inline double energy_uniform_in_gamma(const SimState& s, const ModelParams& p, const DiscreteOperators& ops) {
    const double e = total_energy(s, p, ops).E_total;
    return e + 0.5 * p.alpha * (1.0 - ops.gamma) * ops.beam_inner(ops.A_beam * s.vt, s.vt);
}

/// Random smooth state with total energy <= R for every gamma in [0,1].
inline SimState random_state_in_energy_ball(const ModelParams& p, const DiscreteOperators& ops, double R,
                                            std::mt19937_64& rng) {
    if (!std::isfinite(R)) throw ConfigError("energy ball: R must be finite");
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const WaveSpectrum ws(ops);
    const BeamSpectrum bs(ops);
    SimState s = SimState::zero(ops);
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; l + k <= 3; ++l) {
            const Vector m = ws.mode(k, l);
            s.z += 1.5 * normal(rng) / (1 + k + l) * m;
            s.zt += normal(rng) / (1 + k + l) * m;
        }
    const double a = std::max(1.0, buckled_amplitude(p, ops, 1));
    for (int k = 1; k <= std::min(4, bs.size()); ++k) {
        const Vector m = bs.mode(k);
        s.v += a * normal(rng) / (k * k) * m;
        s.vt += 3.0 * normal(rng) / (k * k) * m;
        s.theta += normal(rng) / k * m;
    }
    double scale = 0.3 + 0.7 * unif(rng);
    SimState out = s;
    for (int it = 0; it < 400; ++it) {
        out.z = scale * s.z;
        out.zt = scale * s.zt;
        out.v = scale * s.v;
        out.vt = scale * s.vt;
        out.theta = scale * s.theta;
        if (energy_uniform_in_gamma(out, p, ops) <= R) return out;
        scale *= 0.9;
    }
    throw DiagnosticError("energy ball: could not place a random state below R = " + std::to_string(R));
}

struct AttractorSampleOptions {
    int n_trajectories = 8;
    double T_burn = 20.0;
    double T_sample = 10.0;
    double sample_every = 0.1;
    double R = 50.0;        // energy level of the starting set W_R
    std::uint64_t seed = 1;
    double dt = 1e-2;
    double tol = 1e-10;
    int threads = 1;
};

struct AttractorSample {
    std::vector<SimState> states;
    std::vector<int> trajectory;   // trajectory index of each sampled state
    std::vector<SimState> initial_states;
    std::vector<std::string> errors;  // one entry per failed trajectory
};

inline std::vector<SimState> initial_states_in_ball(const ModelParams& p, const DiscreteOperators& ops, int n, double R,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SimState> out;
    for (int i = 0; i < n; ++i) out.push_back(random_state_in_energy_ball(p, ops, R, rng));
    return out;
}

/// Post-burn-in states of trajectories started from the given initial data.
inline AttractorSample attractor_sample_from(const std::vector<SimState>& inits, const ModelParams& p,
                                             const DiscreteOperators& ops, const AttractorSampleOptions& o) {
    if (!(o.T_burn > 0.0)) throw ConfigError("attractor sample: T_burn must be positive");
    if (!(o.T_sample >= 0.0) || !(o.sample_every > 0.0)) throw ConfigError("attractor sample: bad sampling window");
    const int n = static_cast<int>(inits.size());
    std::vector<Trajectory> runs(static_cast<std::size_t>(n));
    parallel_for(n, o.threads, [&](int i) {
        SimulationOptions so;
        so.dt = o.dt;
        so.T = o.T_burn + o.T_sample;
        so.save_every = o.sample_every;
        so.tol = o.tol;
        runs[static_cast<std::size_t>(i)] = simulate(inits[static_cast<std::size_t>(i)], p, ops, so);
    });
    AttractorSample out;
    out.initial_states = inits;
    for (int i = 0; i < n; ++i) {
        const auto& tr = runs[static_cast<std::size_t>(i)];
        if (!tr.ok()) out.errors.push_back("trajectory " + std::to_string(i) + ": " + tr.error);
        for (const auto& s : tr.states)
            if (s.t >= o.T_burn - 0.5 * o.dt) {
                out.states.push_back(s);
                out.trajectory.push_back(i);
            }
    }
    return out;
}

inline AttractorSample attractor_sample(const ModelParams& p, const DiscreteOperators& ops,
                                        const AttractorSampleOptions& o) {
    if (o.n_trajectories < 1) throw ConfigError("attractor sample: need at least one trajectory");
    return attractor_sample_from(initial_states_in_ball(p, ops, o.n_trajectories, o.R, o.seed), p, ops, o);
}

// --- difference functionals ------------------------------------------------------

struct DiffOptions {
    double delta = 0.25;       // order reduction of the lower-order norms in lot_t
    double fit_from = 0.1;     // inequality fitted for T >= fit_from * horizon
    int max_constraints = 40;  // time points used by the vertex-enumeration LP
};

struct InequalityFit {
    bool feasible = false;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double min_ratio = std::numeric_limits<double>::quiet_NaN();  // min over T of RHS/LHS
    int points = 0;
};

struct DiffDiagnostics {
    std::vector<double> times;
    std::vector<double> E0_series;
    std::vector<double> G_series, H_series;
    std::vector<double> Psi_series;  // Psi_T for T = each time
    std::vector<double> lot_series;
    std::vector<double> dissipation_series;  // int |z_t|^2 + alpha |A^{1/2} theta|^2
    std::vector<double> lower_series;        // int |z|^2 + |v|^2
    std::vector<double> lhs_series;          // T E0(T) + int_0^T E0
    double Psi_T = 0.0;
    InequalityFit fit;
};

namespace detail {

inline void check_aligned(const Trajectory& a, const Trajectory& b) {
    if (a.states.size() != b.states.size() || a.states.empty())
        throw DiagnosticError("difference functionals: trajectories have different numbers of saved states");
    for (std::size_t i = 0; i < a.states.size(); ++i)
        if (std::abs(a.states[i].t - b.states[i].t) > 1e-9 * (1.0 + std::abs(a.states[i].t)))
            throw DiagnosticError("difference functionals: misaligned time grids");
}

/// min w.c subject to X c >= b, c >= 0 (three unknowns) by vertex enumeration.
inline bool lp3(const std::vector<std::array<double, 3>>& X, const std::vector<double>& b,
                const std::array<double, 3>& w, std::array<double, 3>& best) {
    const int m = static_cast<int>(X.size());
    std::vector<std::array<double, 3>> rows = X;
    std::vector<double> rhs = b;
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> e{0.0, 0.0, 0.0};
        e[j] = 1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    const int n = static_cast<int>(rows.size());
    double best_val = std::numeric_limits<double>::infinity();
    auto feasible = [&](const Eigen::Vector3d& c) {
        for (int j = 0; j < 3; ++j)
            if (c[j] < -1e-14 * (1.0 + c.cwiseAbs().maxCoeff())) return false;
        for (int i = 0; i < m; ++i) {
            const double lhs = X[i][0] * c[0] + X[i][1] * c[1] + X[i][2] * c[2];
            if (lhs < b[i] * (1.0 - 1e-10)) return false;
        }
        return true;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                Eigen::Matrix3d M;
                Eigen::Vector3d r;
                for (int c = 0; c < 3; ++c) {
                    M(0, c) = rows[i][c];
                    M(1, c) = rows[j][c];
                    M(2, c) = rows[k][c];
                }
                r << rhs[i], rhs[j], rhs[k];
                Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
                if (!lu.isInvertible()) continue;
                Eigen::Vector3d c = lu.solve(r);
                if (!c.allFinite() || !feasible(c)) continue;
                c = c.cwiseMax(0.0);
                const double val = w[0] * c[0] + w[1] * c[1] + w[2] * c[2];
                if (val < best_val) {
                    best_val = val;
                    best = {c[0], c[1], c[2]};
                }
            }
    return std::isfinite(best_val);
}

inline double lower_order_norm_sq(const Vector& dz, const Vector& dv, const WaveSpectrum& ws, const BeamSpectrum& bs,
                                  double delta) {
    return ws.fractional_norm_sq(dz, 1.0 - delta) + bs.fractional_norm_sq(dv, 2.0 - delta);
}

} // namespace detail

/// Functionals of the difference of two trajectories h - zeta, u - w, psi - xi.
inline DiffDiagnostics difference_functionals(const Trajectory& t1, const Trajectory& t2, const ModelParams& p,
                                              const DiscreteOperators& ops, const DiffOptions& opt = {}) {
    detail::check_aligned(t1, t2);
    const WaveSpectrum ws(ops);
    const BeamSpectrum bs(ops);
    const std::size_t n = t1.states.size();
    DiffDiagnostics d;
    std::vector<double> g_int(n), h_int(n), wave_power(n), plate_power(n), diss(n), low(n);
    double lot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SimState& a = t1.states[i];
        const SimState& b = t2.states[i];
        const Vector z = a.z - b.z, zt = a.zt - b.zt, v = a.v - b.v, vt = a.vt - b.vt, th = a.theta - b.theta;
        d.times.push_back(a.t);
        d.E0_series.push_back(0.5 * wave_y_sq(z, zt, p, ops) + 0.5 * plate_y_sq(v, vt, th, p, ops));
        Vector dg(z.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) dg[k] = p.g.value(a.zt[k]) - p.g.value(b.zt[k]);
        g_int[i] = ops.wave_inner(dg, zt);
        h_int[i] = std::abs(ops.wave_inner(dg, z));
        wave_power[i] = ops.wave_inner(eval_F1(a.z, p) - eval_F1(b.z, p), zt);
        plate_power[i] = ops.beam_inner(eval_F2(a.v, p, ops) - eval_F2(b.v, p, ops), vt);
        diss[i] = ops.wave_norm_sq(zt) + p.alpha * ops.beam_inner(ops.A_beam * th, th);
        low[i] = ops.wave_norm_sq(z) + ops.beam_norm_sq(v);
        lot = std::max(lot, detail::lower_order_norm_sq(z, v, ws, bs, opt.delta));
        d.lot_series.push_back(lot);
    }

    // Running trapezoidal integrals; the double integral int_0^T int_t^T phi equals int_0^T tau phi(tau).
    double G = 0.0, H = 0.0, D = 0.0, L = 0.0, E = 0.0;
    double I1 = 0.0, J1 = 0.0, I2 = 0.0, J2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double h = d.times[i] - d.times[i - 1];
            const double ta = d.times[i - 1] - d.times[0], tb = d.times[i] - d.times[0];
            G += 0.5 * h * (g_int[i - 1] + g_int[i]);
            H += 0.5 * h * (h_int[i - 1] + h_int[i]);
            D += 0.5 * h * (diss[i - 1] + diss[i]);
            L += 0.5 * h * (low[i - 1] + low[i]);
            E += 0.5 * h * (d.E0_series[i - 1] + d.E0_series[i]);
            I1 += 0.5 * h * (wave_power[i - 1] + wave_power[i]);
            J1 += 0.5 * h * (ta * wave_power[i - 1] + tb * wave_power[i]);
            I2 += 0.5 * h * (plate_power[i - 1] + plate_power[i]);
            J2 += 0.5 * h * (ta * plate_power[i - 1] + tb * plate_power[i]);
        }
        d.G_series.push_back(G);
        d.H_series.push_back(H);
        d.dissipation_series.push_back(D);
        d.lower_series.push_back(L);
        d.Psi_series.push_back(p.beta * (std::abs(I1) + std::abs(J1)) + p.alpha * (std::abs(I2) + std::abs(J2)));
        d.lhs_series.push_back((d.times[i] - d.times[0]) * d.E0_series[i] + E);
    }
    d.Psi_T = d.Psi_series.back();

    // Fit LHS(T) <= c0 [D + beta G] + c1 [H + Psi] + c2 L over T >= T0.
    const double horizon = d.times.back() - d.times.front();
    const double T0 = d.times.front() + opt.fit_from * horizon;
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i < n; ++i)
        if (d.times[i] >= T0 && d.lhs_series[i] > 0.0) idx.push_back(i);
    auto column = [&](std::size_t i) {
        return std::array<double, 3>{d.dissipation_series[i] + p.beta * d.G_series[i], d.H_series[i] + d.Psi_series[i],
                                     d.lower_series[i]};
    };
    if (idx.empty()) {
        d.fit.feasible = true;  // nothing to bound
        return d;
    }
    std::vector<std::size_t> sub;
    const int mc = std::max(3, opt.max_constraints);
    for (int k = 0; k < mc; ++k) {
        const std::size_t j = idx[static_cast<std::size_t>(std::llround(static_cast<double>(k) * (idx.size() - 1) / (mc - 1)))];
        if (sub.empty() || sub.back() != j) sub.push_back(j);
    }
    std::array<double, 3> scale{0.0, 0.0, 0.0};
    for (std::size_t i : idx)
        for (int j = 0; j < 3; ++j) scale[j] = std::max(scale[j], column(i)[j]);
    for (double& s : scale)
        if (!(s > 0.0)) s = 1.0;
    std::vector<std::array<double, 3>> X;
    std::vector<double> b;
    for (std::size_t i : sub) {
        X.push_back(column(i));
        b.push_back(d.lhs_series[i]);
    }
    std::array<double, 3> c{0.0, 0.0, 0.0};
    if (!detail::lp3(X, b, scale, c)) {
        d.fit.feasible = false;
        d.fit.points = static_cast<int>(idx.size());
        return d;
    }
    // Scale up uniformly so every time point (not just the LP subsample) is covered.
    double worst = 1.0;
    for (std::size_t i : idx) {
        const auto x = column(i);
        const double rhs = c[0] * x[0] + c[1] * x[1] + c[2] * x[2];
        if (rhs <= 0.0) {
            worst = std::numeric_limits<double>::infinity();
            break;
        }
        worst = std::max(worst, d.lhs_series[i] / rhs);
    }
    d.fit.feasible = std::isfinite(worst);
    d.fit.c0 = c[0] * worst;
    d.fit.c1 = c[1] * worst;
    d.fit.c2 = c[2] * worst;
    d.fit.points = static_cast<int>(idx.size());
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i : idx) {
        const auto x = column(i);
        ratio = std::min(ratio, (d.fit.c0 * x[0] + d.fit.c1 * x[1] + d.fit.c2 * x[2]) / d.lhs_series[i]);
    }
    d.fit.min_ratio = ratio;
    return d;
}

// --- stabilizability fit ------------------------------------------------------------

struct StabilizabilityFit {
    double C1 = 0.0, omega = 0.0, C2 = 0.0;
    bool omega_positive = false;
    int violations = 0;
    int window_points = 0;
    std::vector<double> times, distance_sq, lot;
    std::string note;
};

/// Fits |S_t y1 - S_t y2|_Y^2 <= C1 exp(-omega t) |y1 - y2|_Y^2 + C2 lot_t.
///
/// omega is the least-squares decay rate of the excess of the right-running maximum
/// of the distance over its final value; (C1, C2) then minimize C1 + C2 max(lot)/d0
/// subject to the inequality at every stored time.
inline StabilizabilityFit stabilizability_fit(const Trajectory& t1, const Trajectory& t2, const ModelParams& p,
                                              const DiscreteOperators& ops, double delta = 0.25) {
    detail::check_aligned(t1, t2);
    const std::size_t n = t1.states.size();
    StabilizabilityFit f;
    const WaveSpectrum ws(ops);
    const BeamSpectrum bs(ops);
    double lot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SimState& a = t1.states[i];
        const SimState& b = t2.states[i];
        f.times.push_back(a.t - t1.states.front().t);
        f.distance_sq.push_back(y_norm_sq(a, b, p, ops));
        lot = std::max(lot, detail::lower_order_norm_sq(a.z - b.z, a.v - b.v, ws, bs, delta));
        f.lot.push_back(lot);
    }
    const double d0 = f.distance_sq.front();
    if (!(d0 > 0.0)) throw DiagnosticError("stabilizability fit: identical initial states give a degenerate fit");
    if (n < 4) throw DiagnosticError("stabilizability fit: need at least 4 stored times");

    std::vector<double> env(n);
    env[n - 1] = f.distance_sq[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) env[i] = std::max(env[i + 1], f.distance_sq[i]);
    const double floor_v = env[n - 1];
    const double e0 = env[0] - floor_v;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    if (e0 > 0.0)
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double e = env[i] - floor_v;
            if (e > 1e-6 * e0) {
                const double y = std::log(e);
                sx += f.times[i];
                sy += y;
                sxx += f.times[i] * f.times[i];
                sxy += f.times[i] * y;
                ++m;
            }
        }
    f.window_points = m;
    if (m >= 3) {
        const double den = m * sxx - sx * sx;
        if (den > 0.0) f.omega = -(m * sxy - sx * sy) / den;
    }
    f.omega_positive = std::isfinite(f.omega) && f.omega > 0.0;
    if (!f.omega_positive) {
        f.note = "no exponential decay of the distance envelope over the horizon";
        f.omega = 0.0;
    }

    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::exp(-f.omega * f.times[i]) * d0;
    const double lot_max = *std::max_element(f.lot.begin(), f.lot.end());
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(a[i] > 0.0)) continue;
        hi = std::max(hi, f.distance_sq[i] / a[i]);
        if (!(f.lot[i] > 0.0)) lo = std::max(lo, f.distance_sq[i] / a[i]);
    }
    auto c2_of = [&](double c1) {
        double c2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (f.lot[i] > 0.0) c2 = std::max(c2, (f.distance_sq[i] - c1 * a[i]) / f.lot[i]);
        return c2;
    };
    const double w = lot_max > 0.0 ? lot_max / d0 : 0.0;
    auto objective = [&](double c1) { return c1 + w * c2_of(c1); };
    double x0 = lo, x1 = std::max(lo, hi);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double xa = x1 - gr * (x1 - x0), xb = x0 + gr * (x1 - x0);
    double fa = objective(xa), fb = objective(xb);
    for (int it = 0; it < 200 && x1 - x0 > 1e-14 * (1.0 + x1); ++it) {
        if (fa <= fb) {
            x1 = xb;
            xb = xa;
            fb = fa;
            xa = x1 - gr * (x1 - x0);
            fa = objective(xa);
        } else {
            x0 = xa;
            xa = xb;
            fa = fb;
            xb = x0 + gr * (x1 - x0);
            fb = objective(xb);
        }
    }
    double c1 = 0.5 * (x0 + x1);
    for (double cand : {lo, std::max(lo, hi)})
        if (objective(cand) < objective(c1)) c1 = cand;
    f.C1 = c1;
    f.C2 = c2_of(c1) * (1.0 + 1e-12);
    for (std::size_t i = 0; i < n; ++i)
        if (f.distance_sq[i] > (f.C1 * a[i] + f.C2 * f.lot[i]) * (1.0 + 1e-10) + 1e-300) ++f.violations;
    return f;
}

// --- box counting ----------------------------------------------------------------------

struct DimensionEstimate {
    std::vector<double> epsilons;
    std::vector<long> counts;
    double slope = 0.0;
    double stderr_fit = 0.0;     // least-squares standard error of the slope
    double uncertainty = 0.0;    // combined with the spread under dropping an end level
    int window_begin = 0, window_end = 0;  // fitted levels [begin, end)
    std::string projection;
};

namespace detail {

inline void fit_line(const std::vector<double>& x, const std::vector<double>& y, int b, int e, double& slope, double& se) {
    const int m = e - b;
    double mx = 0, my = 0;
    for (int i = b; i < e; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (int i = b; i < e; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    slope = sxx > 0 ? sxy / sxx : 0.0;
    double ssr = 0;
    for (int i = b; i < e; ++i) {
        const double r = y[i] - (my + slope * (x[i] - mx));
        ssr += r * r;
    }
    se = (m > 2 && sxx > 0) ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
}

} // namespace detail

/// Box-counting dimension of a point cloud (rows are points).
inline DimensionEstimate box_count_dimension(const Matrix& pts, int min_points = 100) {
    const long n = pts.rows();
    if (n < min_points) throw DiagnosticError("fractal dimension: sample too small (" + std::to_string(n) + " < " +
                                              std::to_string(min_points) + ")");
    DimensionEstimate est;
    const Eigen::RowVectorXd lo = pts.colwise().minCoeff();
    const double extent = (pts.colwise().maxCoeff() - lo).maxCoeff();
    if (!(extent > 1e-12 * (1.0 + pts.cwiseAbs().maxCoeff()))) {
        est.epsilons.push_back(0.0);
        est.counts.push_back(1);
        return est;
    }
    const double base = extent * (1.0 + 1e-9);
    std::vector<std::vector<long long>> keys(static_cast<std::size_t>(n));
    for (int j = 0; j <= 40; ++j) {
        const double eps = base / std::ldexp(1.0, j);
        for (long i = 0; i < n; ++i) {
            auto& k = keys[static_cast<std::size_t>(i)];
            k.resize(static_cast<std::size_t>(pts.cols()));
            for (Eigen::Index c = 0; c < pts.cols(); ++c)
                k[static_cast<std::size_t>(c)] = static_cast<long long>(std::floor((pts(i, c) - lo[c]) / eps));
        }
        std::vector<std::vector<long long>> sorted = keys;
        std::sort(sorted.begin(), sorted.end());
        const long count = static_cast<long>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
        est.epsilons.push_back(eps);
        est.counts.push_back(count);
        if (count >= n / 2) break;
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < est.counts.size(); ++i) {
        x.push_back(std::log(1.0 / est.epsilons[i]));
        y.push_back(std::log(static_cast<double>(est.counts[i])));
    }
    // Scaling window: counts between 2 and n/4.
    int b = -1, e = -1;
    for (int i = 0; i < static_cast<int>(est.counts.size()); ++i)
        if (est.counts[i] >= 2 && est.counts[i] <= n / 4) {
            if (b < 0) b = i;
            e = i + 1;
        }
    if (b < 0 || e - b < 3) {
        b = 0;
        e = static_cast<int>(est.counts.size());
    }
    est.window_begin = b;
    est.window_end = e;
    detail::fit_line(x, y, b, e, est.slope, est.stderr_fit);
    est.slope = std::max(0.0, est.slope);
    double spread = 0.0;
    if (e - b >= 4) {
        double s1, s2, tmp;
        detail::fit_line(x, y, b + 1, e, s1, tmp);
        detail::fit_line(x, y, b, e - 1, s2, tmp);
        spread = 0.5 * (std::abs(s1 - est.slope) + std::abs(s2 - est.slope));
    }
    est.uncertainty = std::sqrt(est.stderr_fit * est.stderr_fit + spread * spread);
    return est;
}

/// Box counting on the leading `projection_dim` orthonormal Y-coordinates.
inline DimensionEstimate fractal_dimension(const std::vector<SimState>& sample, int projection_dim, const ModelParams& p,
                                           const DiscreteOperators& ops) {
    if (sample.size() < 100)
        throw DiagnosticError("fractal dimension: sample too small (" + std::to_string(sample.size()) + " < 100)");
    if (projection_dim < 1) throw ConfigError("fractal dimension: projection_dim must be >= 1");
    const YEmbedding emb(p, ops);
    const int d = std::min(projection_dim, emb.size());
    Matrix pts(static_cast<Eigen::Index>(sample.size()), d);
    for (std::size_t i = 0; i < sample.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = emb(sample[i], d).transpose();
    DimensionEstimate est = box_count_dimension(pts);
    est.projection = "leading " + std::to_string(d) + " Y-orthonormal eigen-coordinates (low frequency first)";
    return est;
}

// --- semi-continuity ---------------------------------------------------------------------

struct SemicontinuityRow {
    double gamma = 0.0, kappa = 0.0;
    double semidistance = 0.0;          // sup_U min_V |U - V| in Y with the reference gamma
    double product_semidistance = std::numeric_limits<double>::quiet_NaN();  // to the product sample (kappa0 = 0)
    double h_semidistance = 0.0;        // plate components, |A v|^2 + |v_t|^2 + |theta|^2
    int sample_size = 0;
    int failed_trajectories = 0;
};

struct SemicontinuityOptions {
    AttractorSampleOptions sample;
};

namespace detail {

inline double sup_min(const std::vector<Vector>& U, const std::vector<Vector>& V, const std::vector<int>& idx) {
    double sup = 0.0;
    for (const auto& u : U) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& v : V) {
            double s = 0.0;
            for (int i : idx) {
                const double t = u[i] - v[i];
                s += t * t;
                if (s >= best) break;
            }
            best = std::min(best, s);
        }
        sup = std::max(sup, best);
    }
    return std::sqrt(sup);
}

inline double sup_min_product(const std::vector<Vector>& U, const std::vector<Vector>& V, const std::vector<int>& wave,
                              const std::vector<int>& plate) {
    double sup = 0.0;
    for (const auto& u : U) {
        double bw = std::numeric_limits<double>::infinity(), bp = bw;
        for (const auto& v : V) {
            double sw = 0.0, sp = 0.0;
            for (int i : wave) sw += (u[i] - v[i]) * (u[i] - v[i]);
            for (int i : plate) sp += (u[i] - v[i]) * (u[i] - v[i]);
            bw = std::min(bw, sw);
            bp = std::min(bp, sp);
        }
        sup = std::max(sup, bw + bp);
    }
    return std::sqrt(sup);
}

} // namespace detail

/// One-sided Hausdorff semidistances of attractor samples at each (gamma, kappa)
/// to the sample at lambda0. All samples start from the same initial data.
inline std::vector<SemicontinuityRow> semicontinuity_experiment(const std::vector<std::pair<double, double>>& lambdas,
                                                                std::pair<double, double> lambda0,
                                                                const ModelParams& base, const GridSpec& grid,
                                                                const SemicontinuityOptions& opt) {
    if (lambdas.empty()) throw ConfigError("semicontinuity: empty parameter list");
    auto make = [&](double gamma, double kappa) {
        ModelParams p = base;
        p.gamma = gamma;
        p.kappa = kappa;
        p.validate();
        return std::make_pair(p, build_operators(grid, p.mu, gamma));
    };
    const auto [p0, ops0] = make(lambda0.first, lambda0.second);
    const auto inits = initial_states_in_ball(p0, ops0, opt.sample.n_trajectories, opt.sample.R, opt.sample.seed);
    const YEmbedding emb(p0, ops0);
    const YEmbedding plate_emb(p0, ops0, true);
    const auto [wave_idx, plate_idx] = emb.split();
    std::vector<int> all(static_cast<std::size_t>(emb.size()));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> hall(static_cast<std::size_t>(plate_emb.size()));
    std::iota(hall.begin(), hall.end(), 0);

    auto embed = [&](const AttractorSample& s, std::vector<Vector>& y, std::vector<Vector>& h) {
        for (const auto& st : s.states) {
            y.push_back(emb(st));
            h.push_back(plate_emb(st));
        }
    };
    const AttractorSample ref = attractor_sample_from(inits, p0, ops0, opt.sample);
    std::vector<Vector> ref_y, ref_h;
    embed(ref, ref_y, ref_h);

    std::vector<SemicontinuityRow> rows;
    for (const auto& [gamma, kappa] : lambdas) {
        SemicontinuityRow row;
        row.gamma = gamma;
        row.kappa = kappa;
        const auto [p, ops] = make(gamma, kappa);
        const AttractorSample s = attractor_sample_from(inits, p, ops, opt.sample);
        std::vector<Vector> y, h;
        embed(s, y, h);
        row.sample_size = static_cast<int>(y.size());
        row.failed_trajectories = static_cast<int>(s.errors.size());
        row.semidistance = detail::sup_min(y, ref_y, all);
        row.h_semidistance = detail::sup_min(h, ref_h, hall);
        if (lambda0.second == 0.0) row.product_semidistance = detail::sup_min_product(y, ref_y, wave_idx, plate_idx);
        rows.push_back(row);
    }
    return rows;
}

} // namespace acoustoplate
