#pragma once

// Phase-space norms of the coupled system.

#include "acoustoplate/discrete_operators.hpp"
#include "acoustoplate/errors.hpp"
#include "acoustoplate/model.hpp"

#include <cmath>

namespace acoustoplate {

inline void check_same_shape(const SimState& a, const SimState& b, const DiscreteOperators& ops) {
    auto bad = [&](const SimState& s) {
        return s.z.size() != ops.wave_size() || s.zt.size() != ops.wave_size() || s.v.size() != ops.beam_size() ||
               s.vt.size() != ops.beam_size() || s.theta.size() != ops.beam_size();
    };
    if (bad(a) || bad(b)) throw DiagnosticError("state does not match the operator grid");
}

/// beta [(A dz, dz) + |dzt|^2]
inline double wave_y_sq(const Vector& dz, const Vector& dzt, const ModelParams& p, const DiscreteOperators& ops) {
    return p.beta * (ops.wave_inner(ops.A_wave * dz, dz) + ops.wave_norm_sq(dzt));
}

/// alpha [|A_beam dv|^2 + (M_gamma dvt, dvt) + |dtheta|^2]
inline double plate_y_sq(const Vector& dv, const Vector& dvt, const Vector& dth, const ModelParams& p,
                         const DiscreteOperators& ops) {
    return p.alpha * (ops.beam_norm_sq(ops.A_beam * dv) + ops.beam_inner(ops.M_gamma * dvt, dvt) + ops.beam_norm_sq(dth));
}

inline double y_norm_sq(const SimState& a, const SimState& b, const ModelParams& p, const DiscreteOperators& ops) {
    check_same_shape(a, b, ops);
    return wave_y_sq(a.z - b.z, a.zt - b.zt, p, ops) + plate_y_sq(a.v - b.v, a.vt - b.vt, a.theta - b.theta, p, ops);
}

/// Weighted Y-distance between two states (the gamma of `ops` enters through M_gamma).
inline double y_norm(const SimState& a, const SimState& b, const ModelParams& p, const DiscreteOperators& ops) {
    return std::sqrt(std::max(0.0, y_norm_sq(a, b, p, ops)));
}

/// Plate distance without rotational inertia: |A_beam dv|^2 + |dvt|^2 + |dtheta|^2.
inline double h_norm(const SimState& a, const SimState& b, const DiscreteOperators& ops) {
    check_same_shape(a, b, ops);
    const Vector dv = a.v - b.v, dvt = a.vt - b.vt, dth = a.theta - b.theta;
    return std::sqrt(ops.beam_norm_sq(ops.A_beam * dv) + ops.beam_norm_sq(dvt) + ops.beam_norm_sq(dth));
}

} // namespace acoustoplate
