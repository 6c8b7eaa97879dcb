#pragma once

// Energy-consistent time stepping.
//
// One step is the implicit midpoint rule with the potentials replaced by their
// discrete (mean-value) gradients:
//
//   (z1 - z0)/dt   = u                         u = (zt0 + zt1)/2
//   (zt1 - zt0)/dt = -A zh + ak B^T w - g(u) - dPi(z0, z1)
//   (v1 - v0)/dt   = w                         w = (vt0 + vt1)/2
//   M (vt1-vt0)/dt = -Ab^2 vh - bk B u + Ab th - dPhi(v0, v1)
//   (th1 - th0)/dt = -Ab th - Ab w             th = (th0 + th1)/2
//
// with zh, vh midpoint displacements. dPi is the pointwise divided difference of
// the antiderivative of f(s) - mu s and dPhi the Gonzalez form
// -(Q - (S0 + S1)/2) Ab vh - p0, S = |Ab^{1/2} v|^2. Both reproduce the potential
// differences exactly, so the discrete energy balance holds up to the Newton
// residual. The temperature is eliminated linearly and Newton runs on (u, w).

#include "acoustoplate/discrete_operators.hpp"
#include "acoustoplate/errors.hpp"
#include "acoustoplate/model.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace acoustoplate {

struct StepReport {
    int newton_iters = 0;
    double newton_residual = 0.0;
    double energy_residual = 0.0;
    double dissipation_wave = 0.0;  // dt (g(u), u)
    double dissipation_heat = 0.0;  // dt |Ab^{1/2} th|^2
};

struct Derivatives {
    Vector z_t, z_tt, v_t, v_tt, theta_t;
};

/// Time derivatives of the semi-discrete system at `s`.
inline Derivatives rhs(const SimState& s, const ModelParams& params, const DiscreteOperators& ops) {
    Derivatives d;
    d.z_t = s.zt;
    Vector gz(s.zt.size());
    for (Eigen::Index i = 0; i < s.zt.size(); ++i) gz[i] = params.g.value(s.zt[i]);
    d.z_tt = -(ops.A_wave * s.z) + params.alpha * params.kappa * (ops.beam_flux * s.vt) - gz - eval_F1(s.z, params);

    d.v_t = s.vt;
    const Vector Av = ops.A_beam * s.v;
    const Vector force = -(ops.A_beam * Av) - params.beta * params.kappa * (ops.beam_trace * s.zt) +
                         ops.A_beam * s.theta - eval_F2(s.v, params, ops);
    Eigen::SimplicialLDLT<SparseMatrix> mass(ops.M_gamma);
    if (mass.info() != Eigen::Success) throw SolverError("rhs: M_gamma factorization failed", NAN);
    d.v_tt = mass.solve(force);
    d.theta_t = -(ops.A_beam * s.theta) - ops.A_beam * s.vt;
    return d;
}

struct StepperOptions {
    double dt = 1e-3;
    double tol = 1e-12;
    int max_newton = 30;
    /// Keep the factorized Jacobian while Newton contracts fast (modified Newton).
    bool reuse_jacobian = true;
};

class MidpointStepper {
public:
    MidpointStepper(ModelParams params, DiscreteOperators ops, StepperOptions opts)
        : params_(std::move(params)), ops_(std::move(ops)), opts_(opts) {
        params_.validate();
        check_consistent(params_, ops_);
        if (!(opts_.dt > 0.0)) throw ConfigError("step: dt must be positive");
        if (!(opts_.tol > 0.0)) throw ConfigError("step: tol must be positive");
        try {
            bounds_ = compute_energy_bound_constants(params_, ops_);
        } catch (const AssumptionError&) {
            bounds_ = EnergyBoundConstants{};  // only E_plus uses these; f = 0 is allowed for conservative checks
        }
        p0_ = params_.load(ops_);
        setup();
    }

    const ModelParams& params() const { return params_; }
    const DiscreteOperators& ops() const { return ops_; }
    const StepperOptions& options() const { return opts_; }
    const EnergyBoundConstants& bounds() const { return bounds_; }

    /// dt * lambda_max(Ab)^2 above 1e4: the scheme stays stable but Newton conditioning degrades.
    bool stiff() const {
        const double lmax = ops_.beam_max_eigenvalue();
        return opts_.dt * lmax * lmax > 1e4;
    }

    EnergyLedger energy(const SimState& s) const { return total_energy(s, params_, ops_, &bounds_); }

    std::pair<SimState, StepReport> step(const SimState& s) { return step(s, energy(s)); }

    /// Advances one step; `e0` must be the ledger of `s`.
    std::pair<SimState, StepReport> step(const SimState& s, const EnergyLedger& e0) {
        const int nw = ops_.wave_size(), nb = ops_.beam_size();
        const double dt = opts_.dt;

        Vector x(nw + nb);
        x.head(nw) = s.zt;
        x.tail(nb) = s.vt;

        StepReport rep;
        Eval ev;
        double prev = std::numeric_limits<double>::infinity();
        bool factored = false, converged = false;
        for (int it = 0; it < opts_.max_newton; ++it) {
            evaluate(s, x, ev);
            const double rn = ev.residual.lpNorm<Eigen::Infinity>();
            rep.newton_iters = it;
            rep.newton_residual = rn;
            if (!std::isfinite(rn)) throw SolverError("step: non-finite Newton residual at t=" + std::to_string(s.t), rn);
            if (rn <= opts_.tol) {
                converged = true;
                break;
            }
            if (!factored || !opts_.reuse_jacobian || rn > 0.1 * prev) {
                factorize(s, x, ev);
                factored = true;
            }
            prev = rn;
            const Vector delta = lu_.solve(ev.residual);
            x -= delta;
            if (delta.lpNorm<Eigen::Infinity>() <= opts_.tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
                evaluate(s, x, ev);
                rep.newton_iters = it + 1;
                rep.newton_residual = ev.residual.lpNorm<Eigen::Infinity>();
                converged = true;
                break;
            }
        }
        if (!converged)
            throw SolverError("step: Newton did not converge in " + std::to_string(opts_.max_newton) +
                                  " iterations at t=" + std::to_string(s.t) + " (dt=" + std::to_string(dt) + ")",
                              rep.newton_residual);

        const auto u = x.head(nw);
        const auto w = x.tail(nb);
        SimState n;
        n.t = s.t + dt;
        n.z = s.z + dt * u;
        n.zt = 2.0 * u - s.zt;
        n.v = s.v + dt * w;
        n.vt = 2.0 * w - s.vt;
        n.theta = 2.0 * ev.theta_mid - s.theta;

        double gu = 0.0;
        for (int i = 0; i < nw; ++i) gu += ops_.wave_weights[i] * params_.g.value(u[i]) * u[i];
        rep.dissipation_wave = dt * gu;
        rep.dissipation_heat = dt * ops_.beam_inner(ops_.A_beam * ev.theta_mid, ev.theta_mid);
        const EnergyLedger e1 = energy(n);
        rep.energy_residual = e1.E_total - e0.E_total + params_.beta * rep.dissipation_wave +
                              params_.alpha * rep.dissipation_heat;
        return {std::move(n), rep};
    }

private:
    struct Eval {
        Vector residual;
        Vector theta_mid;
        Vector Av_mid;   // Ab vh
        Vector Av_new;   // Ab v1
        Vector dpi_db;   // d dPi / d z1, pointwise
        Vector gprime;   // g'(u)
        double berger = 0.0;  // Q - (S0 + S1)/2
    };

    void setup() {
        const int nw = ops_.wave_size(), nb = ops_.beam_size();
        const double dt = opts_.dt;
        const double ak = params_.alpha * params_.kappa, bk = params_.beta * params_.kappa;

        force_poly_ = params_.f.polynomial().coeffs();
        if (force_poly_.size() < 2) force_poly_.resize(2, 0.0);
        force_poly_[1] -= params_.mu;

        const Matrix Ab = Matrix(ops_.A_beam);
        Matrix heat = Matrix::Identity(nb, nb) + 0.5 * dt * Ab;
        heat_inv_ = heat.ldlt().solve(Matrix::Identity(nb, nb));
        beam_const_ = Matrix(ops_.M_gamma) + 0.25 * dt * dt * (Ab * Ab + Ab * heat_inv_ * Ab);
        Ab_dense_ = Ab;

        std::vector<Eigen::Triplet<double>> t;
        t.reserve(ops_.A_wave.nonZeros() + nw + 2 * nb + nb * nb);
        for (int k = 0; k < ops_.A_wave.outerSize(); ++k)
            for (SparseMatrix::InnerIterator itr(ops_.A_wave, k); itr; ++itr)
                t.emplace_back(itr.row(), itr.col(), 0.25 * dt * dt * itr.value());
        for (int i = 0; i < nw; ++i) t.emplace_back(i, i, 1.0);
        for (int k = 0; k < ops_.beam_flux.outerSize(); ++k)
            for (SparseMatrix::InnerIterator itr(ops_.beam_flux, k); itr; ++itr)
                t.emplace_back(itr.row(), nw + itr.col(), -0.5 * dt * ak * itr.value());
        for (int k = 0; k < ops_.beam_trace.outerSize(); ++k)
            for (SparseMatrix::InnerIterator itr(ops_.beam_trace, k); itr; ++itr)
                t.emplace_back(nw + itr.row(), itr.col(), 0.5 * dt * bk * itr.value());
        for (int c = 0; c < nb; ++c)
            for (int r = 0; r < nb; ++r) t.emplace_back(nw + r, nw + c, beam_const_(r, c));
        jac_const_.resize(nw + nb, nw + nb);
        jac_const_.setFromTriplets(t.begin(), t.end());
        jac_const_.makeCompressed();
        jac_ = jac_const_;

        auto position = [&](int r, int c) {
            const int* inner = jac_.innerIndexPtr();
            const int begin = jac_.outerIndexPtr()[c], end = jac_.outerIndexPtr()[c + 1];
            const int* p = std::lower_bound(inner + begin, inner + end, r);
            return static_cast<int>(p - inner);
        };
        wave_diag_pos_.resize(nw);
        for (int i = 0; i < nw; ++i) wave_diag_pos_[i] = position(i, i);
        beam_pos_.resize(static_cast<std::size_t>(nb) * nb);
        for (int c = 0; c < nb; ++c)
            for (int r = 0; r < nb; ++r) beam_pos_[static_cast<std::size_t>(c) * nb + r] = position(nw + r, nw + c);
        lu_.analyzePattern(jac_);
    }

    void evaluate(const SimState& s, const Vector& x, Eval& ev) const {
        const int nw = ops_.wave_size(), nb = ops_.beam_size();
        const double dt = opts_.dt, h = 0.5 * dt;
        const double ak = params_.alpha * params_.kappa, bk = params_.beta * params_.kappa;
        const auto u = x.head(nw);
        const auto w = x.tail(nb);

        const Vector z_mid = s.z + h * u;
        Vector wave = ops_.A_wave * z_mid - ak * (ops_.beam_flux * w);
        ev.dpi_db.resize(nw);
        ev.gprime.resize(nw);
        const std::size_t nq = force_poly_.size();
        for (int i = 0; i < nw; ++i) {
            const double a = s.z[i], b = s.z[i] + dt * u[i];
            // Divided difference of the antiderivative: sum q_k/(k+1) * sum_{j} a^j b^{k-j}.
            double hk = 1.0, dhk = 0.0, bp = 1.0, dp = 0.0, ddp = 0.0;
            for (std::size_t k = 0; k < nq; ++k) {
                if (k > 0) {
                    dhk = a * dhk + static_cast<double>(k) * bp;  // bp = b^{k-1}
                    bp *= b;
                    hk = a * hk + bp;
                }
                const double c = force_poly_[k] / static_cast<double>(k + 1);
                dp += c * hk;
                ddp += c * dhk;
            }
            ev.dpi_db[i] = ddp;
            ev.gprime[i] = params_.g.derivative(u[i]);
            wave[i] += params_.g.value(u[i]) + dp;
        }

        const Vector v_mid = s.v + h * w;
        const Vector v_new = s.v + dt * w;
        ev.Av_mid = ops_.A_beam * v_mid;
        ev.Av_new = ops_.A_beam * v_new;
        const Vector Av_old = ops_.A_beam * s.v;
        const double S0 = ops_.beam_inner(Av_old, s.v), S1 = ops_.beam_inner(ev.Av_new, v_new);
        ev.berger = params_.Q - 0.5 * (S0 + S1);
        ev.theta_mid = heat_inv_ * (s.theta - h * (ops_.A_beam * w));
        const Vector beam = ops_.A_beam * ev.Av_mid + bk * (ops_.beam_trace * u) - ops_.A_beam * ev.theta_mid -
                            ev.berger * ev.Av_mid - p0_;

        ev.residual.resize(nw + nb);
        ev.residual.head(nw) = u - s.zt + h * wave;
        ev.residual.tail(nb) = ops_.M_gamma * (w - s.vt) + h * beam;
    }

    void factorize(const SimState&, const Vector&, const Eval& ev) {
        const int nw = ops_.wave_size(), nb = ops_.beam_size();
        const double dt = opts_.dt, h = 0.5 * dt;
        std::copy(jac_const_.valuePtr(), jac_const_.valuePtr() + jac_const_.nonZeros(), jac_.valuePtr());
        double* val = jac_.valuePtr();
        for (int i = 0; i < nw; ++i) val[wave_diag_pos_[i]] += h * ev.gprime[i] + h * dt * ev.dpi_db[i];
        const double lin = -0.25 * dt * dt * ev.berger;
        const double rank1 = 0.5 * dt * dt * ops_.grid.h0;
        for (int c = 0; c < nb; ++c)
            for (int r = 0; r < nb; ++r)
                val[beam_pos_[static_cast<std::size_t>(c) * nb + r]] +=
                    lin * Ab_dense_(r, c) + rank1 * ev.Av_mid[r] * ev.Av_new[c];
        lu_.factorize(jac_);
        if (lu_.info() != Eigen::Success) throw SolverError("step: Jacobian factorization failed: " + lu_.lastErrorMessage(), NAN);
    }

    ModelParams params_;
    DiscreteOperators ops_;
    StepperOptions opts_;
    EnergyBoundConstants bounds_;
    Vector p0_;
    std::vector<double> force_poly_;  // power-basis coefficients of f(s) - mu s
    Matrix heat_inv_, beam_const_, Ab_dense_;
    SparseMatrix jac_const_, jac_;
    std::vector<int> wave_diag_pos_, beam_pos_;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

/// Single step with a freshly assembled stepper.
inline std::pair<SimState, StepReport> step(const SimState& s, double dt, const ModelParams& params,
                                            const DiscreteOperators& ops, double tol) {
    MidpointStepper stepper(params, ops, StepperOptions{dt, tol});
    return stepper.step(s);
}

struct SimulationOptions {
    double dt = 1e-3;
    double T = 1.0;
    double save_every = 0.0;  // <= 0 saves every step
    double tol = 1e-12;
    int max_newton = 30;
};

struct Trajectory {
    std::vector<SimState> states;       // saved states, first is the initial state
    std::vector<EnergyLedger> ledgers;  // ledger of each saved state
    std::vector<StepReport> reports;    // one per step
    double max_abs_energy_residual = 0.0;
    double max_energy_rise = 0.0;       // max over s <= t of E(t) - E(s), all steps
    bool stiff_warning = false;
    bool completed = true;
    std::string error;

    bool ok() const { return completed; }
    const SimState& final_state() const { return states.back(); }
};

/// Integrates from `init` to T. A step failure stops the run; everything computed
/// so far is kept and the message is stored in `error`.
inline Trajectory simulate(const SimState& init, const ModelParams& params, const DiscreteOperators& ops,
                           const SimulationOptions& opt) {
    if (!(opt.T > 0.0)) throw ConfigError("simulate: T must be positive");
    if (!init.finite()) throw ConfigError("simulate: initial state has non-finite entries");
    MidpointStepper stepper(params, ops, StepperOptions{opt.dt, opt.tol, opt.max_newton});
    const long n_steps = std::lround(opt.T / opt.dt);
    const long stride = opt.save_every > 0.0 ? std::max(1L, std::lround(opt.save_every / opt.dt)) : 1L;

    Trajectory tr;
    tr.stiff_warning = stepper.stiff();
    SimState s = init;
    EnergyLedger e = stepper.energy(s);
    tr.states.push_back(s);
    tr.ledgers.push_back(e);
    tr.reports.reserve(static_cast<std::size_t>(n_steps));
    double running_min = e.E_total;
    for (long k = 1; k <= n_steps; ++k) {
        try {
            auto [next, rep] = stepper.step(s, e);
            EnergyLedger en = stepper.energy(next);
            en.D_wave_accum = e.D_wave_accum + rep.dissipation_wave;
            en.D_heat_accum = e.D_heat_accum + rep.dissipation_heat;
            tr.max_abs_energy_residual = std::max(tr.max_abs_energy_residual, std::abs(rep.energy_residual));
            tr.max_energy_rise = std::max(tr.max_energy_rise, en.E_total - running_min);
            running_min = std::min(running_min, en.E_total);
            tr.reports.push_back(rep);
            s = std::move(next);
            e = en;
        } catch (const std::exception& ex) {
            tr.completed = false;
            tr.error = ex.what();
            if (tr.states.back().t != s.t) {
                tr.states.push_back(s);
                tr.ledgers.push_back(e);
            }
            return tr;
        }
        if (k % stride == 0 || k == n_steps) {
            tr.states.push_back(s);
            tr.ledgers.push_back(e);
        }
    }
    return tr;
}

} // namespace acoustoplate
