#pragma once

// Parameters, force operators, potentials and energy functionals of the
// coupled wave / thermoelastic Berger beam system.

#include "acoustoplate/discrete_operators.hpp"
#include "acoustoplate/errors.hpp"
#include "acoustoplate/nonlinearity.hpp"

#include <cmath>
#include <numbers>

namespace acoustoplate {

struct ModelParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.5;
    double kappa = 1.0;
    double Q = 2.0 * std::numbers::pi * std::numbers::pi;
    double mu = 1.0;
    Vector p0;  // transversal load on interior beam nodes; empty means zero
    NonlinearitySpec f = NonlinearitySpec::odd_polynomial({-1.0, 1.0});
    NonlinearitySpec g = NonlinearitySpec::odd_polynomial({1.0, 1.0});

    void validate() const {
        if (!(alpha > 0.0)) throw ConfigError("params: alpha must be positive");
        if (!(beta > 0.0)) throw ConfigError("params: beta must be positive");
        if (!(mu > 0.0)) throw ConfigError("params: mu must be positive");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("params: gamma must lie in [0,1]");
        if (!(kappa >= 0.0 && kappa <= 1.0)) throw ConfigError("params: kappa must lie in [0,1]");
        if (!std::isfinite(Q)) throw ConfigError("params: Q must be finite");
        if (!f.is_polynomial()) throw ConfigError("params: f must be an odd polynomial");
    }

    /// Load resized to the beam grid (zero when unset).
    Vector load(const DiscreteOperators& ops) const {
        if (p0.size() == 0) return Vector::Zero(ops.beam_size());
        if (p0.size() != ops.beam_size()) throw ConfigError("params: p0 has the wrong number of beam nodes");
        return p0;
    }
};

/// Checks that operators were assembled for these parameters.
inline void check_consistent(const ModelParams& params, const DiscreteOperators& ops) {
    if (std::abs(params.mu - ops.mu) > 0.0 || std::abs(params.gamma - ops.gamma) > 0.0)
        throw ConfigError("operators were assembled with a different mu or gamma than the model parameters");
}

/// Five-field state on the discrete grids. Beam fields hold interior nodes only.
struct SimState {
    double t = 0.0;
    Vector z, zt;          // wave displacement and velocity
    Vector v, vt, theta;   // beam displacement, velocity, temperature

    static SimState zero(const DiscreteOperators& ops) {
        SimState s;
        s.z = Vector::Zero(ops.wave_size());
        s.zt = Vector::Zero(ops.wave_size());
        s.v = Vector::Zero(ops.beam_size());
        s.vt = Vector::Zero(ops.beam_size());
        s.theta = Vector::Zero(ops.beam_size());
        return s;
    }

    bool finite() const {
        return z.allFinite() && zt.allFinite() && v.allFinite() && vt.allFinite() && theta.allFinite();
    }
};

struct EnergyLedger {
    double Ez0 = 0.0;      // (1/2)[(A z, z) + |z_t|^2]
    double Ev0 = 0.0;      // (1/2)[|A_beam v|^2 + (M_gamma v_t, v_t)]
    double Etheta = 0.0;   // (1/2)|theta|^2
    double Pi = 0.0;
    double Phi = 0.0;
    double E_total = 0.0;  // beta (Ez0 + Pi) + alpha (Ev0 + Phi + Etheta)
    double E_plus = 0.0;   // nonnegative counterpart
    double D_wave_accum = 0.0;
    double D_heat_accum = 0.0;
};

// --- wave forces -----------------------------------------------------------

/// Pointwise f(z) - mu z.
inline Vector eval_F1(const Vector& z, const ModelParams& params) {
    Vector out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = params.f.value(z[i]) - params.mu * z[i];
    return out;
}

/// Antiderivative of f(xi) - mu xi vanishing at 0.
inline Polynomial wave_potential_density(const ModelParams& params) {
    Polynomial f = params.f.polynomial();
    std::vector<double> c = f.coeffs();
    if (c.size() < 2) c.resize(2, 0.0);
    c[1] -= params.mu;
    return Polynomial(c).antiderivative();
}

inline double potential_Pi(const Vector& z, const ModelParams& params, const DiscreteOperators& ops) {
    const Polynomial P = wave_potential_density(params);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) acc += ops.wave_weights[i] * P(z[i]);
    return acc;
}

// --- beam forces -----------------------------------------------------------

/// |A_beam^{1/2} v|^2 = (A_beam v, v).
inline double beam_stretch(const Vector& v, const DiscreteOperators& ops) {
    return ops.beam_inner(ops.A_beam * v, v);
}

/// Q - |A_beam^{1/2} v|^2.
inline double berger_coefficient(const Vector& v, const ModelParams& params, const DiscreteOperators& ops) {
    return params.Q - beam_stretch(v, ops);
}

/// F2(v) = -(Q - |A^{1/2} v|^2) A v - p0.
inline Vector eval_F2(const Vector& v, const ModelParams& params, const DiscreteOperators& ops) {
    return -berger_coefficient(v, params, ops) * (ops.A_beam * v) - params.load(ops);
}

inline double potential_Phi(const Vector& v, const ModelParams& params, const DiscreteOperators& ops) {
    const double s = beam_stretch(v, ops);
    return 0.25 * s * s - 0.5 * params.Q * s - ops.beam_inner(params.load(ops), v);
}

// --- energies --------------------------------------------------------------

struct EnergyBoundConstants {
    double delta_f = 0.0;
    double M_f = 0.0;
    double c = 0.5;
    double C = 1.5;
    double M0 = 0.0;
};

/// Constants of Pi(z) >= delta_f |z|^2 - M_f and of the sandwich
/// c E - M0 <= total energy <= C E + M0.
///
/// delta_f is mu/2 for superlinear f and (c1 - mu)/2 for linear f; M_f is the exact
/// maximum of delta_f s^2 - P(s) over the real line (critical points of a polynomial).
/// The sandwich uses Q s/2 <= s^2/8 + Q^2/2 and |(p0, v)| <= |p0|^2/lambda1^2 + |A v|^2/4,
/// which give c = 1/2, C = 3/2, M0 = beta M_f + alpha (Q^2/2 + |p0|^2/lambda1^2).
inline EnergyBoundConstants compute_energy_bound_constants(const ModelParams& params, const DiscreteOperators& ops) {
    const Polynomial f = params.f.polynomial();
    const int d = f.degree();
    EnergyBoundConstants k;
    if (d >= 3 && f.leading() > 0.0) {
        k.delta_f = 0.5 * params.mu;
    } else if (d == 1 && f.leading() > params.mu) {
        k.delta_f = 0.5 * (f.leading() - params.mu);
    } else {
        throw AssumptionError("energy bounds: f(s) - mu s must be eventually coercive (superlinear f, or linear f with slope > mu)");
    }
    const Polynomial P = wave_potential_density(params);
    std::vector<double> c = P.coeffs();
    for (double& x : c) x = -x;
    if (c.size() < 3) c.resize(3, 0.0);
    c[2] += k.delta_f;
    // max of delta s^2 - P(s) = -min of (P(s) - delta s^2)
    std::vector<double> neg(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) neg[i] = -c[i];
    const auto [minval, where] = Polynomial(neg).global_min();
    (void)where;
    k.M_f = std::max(0.0, -minval);

    const double lambda1 = ops.beam_min_eigenvalue();
    const Vector p0 = params.load(ops);
    k.M0 = params.beta * k.M_f + params.alpha * (0.5 * params.Q * params.Q + ops.beam_norm_sq(p0) / (lambda1 * lambda1));
    return k;
}

inline EnergyLedger total_energy(const SimState& s, const ModelParams& params, const DiscreteOperators& ops,
                                 const EnergyBoundConstants* bounds = nullptr) {
    EnergyLedger e;
    e.Ez0 = 0.5 * (ops.wave_inner(ops.A_wave * s.z, s.z) + ops.wave_norm_sq(s.zt));
    const Vector Av = ops.A_beam * s.v;
    e.Ev0 = 0.5 * (ops.beam_norm_sq(Av) + ops.beam_inner(ops.M_gamma * s.vt, s.vt));
    e.Etheta = 0.5 * ops.beam_norm_sq(s.theta);
    e.Pi = potential_Pi(s.z, params, ops);
    const double stretch = ops.beam_inner(Av, s.v);
    e.Phi = 0.25 * stretch * stretch - 0.5 * params.Q * stretch - ops.beam_inner(params.load(ops), s.v);
    e.E_total = params.beta * (e.Ez0 + e.Pi) + params.alpha * (e.Ev0 + e.Phi + e.Etheta);

    double M_f = 0.0;
    if (bounds) {
        M_f = bounds->M_f;
    } else {
        try {
            M_f = compute_energy_bound_constants(params, ops).M_f;
        } catch (const AssumptionError&) {
            M_f = 0.0;
        }
    }
    e.E_plus = params.beta * (e.Ez0 + e.Pi + M_f) + params.alpha * (e.Ev0 + 0.25 * stretch * stretch + e.Etheta);
    return e;
}

} // namespace acoustoplate
