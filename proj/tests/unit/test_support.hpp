#pragma once

// Hand-rolled random generators shared by the unit suites.

#include "acoustoplate/discrete_operators.hpp"
#include "acoustoplate/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testsupport {

using acoustoplate::DiscreteOperators;
using acoustoplate::SimState;
using acoustoplate::Vector;

inline Vector gaussian(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

/// Smooth random wave field: a few low cosine modes.
inline Vector smooth_wave(const DiscreteOperators& ops, std::mt19937_64& rng, double amp) {
    std::normal_distribution<double> d(0.0, amp);
    Vector z = Vector::Zero(ops.wave_size());
    const auto& g = ops.grid;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
            const double c = d(rng) / (1 + k + l);
            for (int j = 0; j <= g.ny; ++j)
                for (int i = 0; i <= g.nx; ++i)
                    z[g.wave_index(i, j)] += c * std::cos(k * std::numbers::pi * i * g.hx) * std::cos(l * std::numbers::pi * j * g.hy);
        }
    return z;
}

/// Smooth random beam field: a few low sine modes.
inline Vector smooth_beam(const DiscreteOperators& ops, std::mt19937_64& rng, double amp) {
    std::normal_distribution<double> d(0.0, amp);
    Vector v = Vector::Zero(ops.beam_size());
    for (int k = 1; k <= 3; ++k) {
        const double c = d(rng) / (k * k);
        for (int j = 1; j <= ops.beam_size(); ++j) v[j - 1] += c * std::sin(k * std::numbers::pi * j * ops.grid.h0);
    }
    return v;
}

inline SimState smooth_state(const DiscreteOperators& ops, std::mt19937_64& rng, double amp) {
    SimState s;
    s.z = smooth_wave(ops, rng, amp);
    s.zt = smooth_wave(ops, rng, amp);
    s.v = smooth_beam(ops, rng, amp);
    s.vt = smooth_beam(ops, rng, amp);
    s.theta = smooth_beam(ops, rng, amp);
    return s;
}

inline SimState rough_state(const DiscreteOperators& ops, std::mt19937_64& rng, double amp) {
    SimState s;
    s.z = gaussian(ops.wave_size(), rng, amp);
    s.zt = gaussian(ops.wave_size(), rng, amp);
    s.v = gaussian(ops.beam_size(), rng, amp);
    s.vt = gaussian(ops.beam_size(), rng, amp);
    s.theta = gaussian(ops.beam_size(), rng, amp);
    return s;
}

} // namespace testsupport
