#include "acoustoplate/model.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace acoustoplate;

namespace {

constexpr double pi = std::numbers::pi;

DiscreteOperators grid16(double mu = 1.0, double gamma = 0.5) {
    return build_operators(GridSpec::make(16, 16), mu, gamma);
}

ModelParams params_for(const DiscreteOperators& ops) {
    ModelParams p;
    p.mu = ops.mu;
    p.gamma = ops.gamma;
    return p;
}

} // namespace

TEST(Params, ValidationRejectsOutOfRange) {
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.alpha = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ModelParams{};
    p.kappa = 1.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ModelParams{};
    p.gamma = -0.1;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(F1, Examples) {
    const auto ops = grid16();
    ModelParams p = params_for(ops);
    EXPECT_NEAR(eval_F1(Vector::Ones(ops.wave_size()), p).maxCoeff(), -1.0, 1e-15);
    EXPECT_EQ(eval_F1(Vector::Zero(ops.wave_size()), p).lpNorm<Eigen::Infinity>(), 0.0);
    p.mu = 0.5;
    const Vector f = eval_F1(Vector::Constant(ops.wave_size(), 2.0), p);
    EXPECT_NEAR(f.minCoeff(), 5.0, 1e-14);
    EXPECT_NEAR(f.maxCoeff(), 5.0, 1e-14);
}

TEST(Berger, CoefficientExamples) {
    const auto ops = grid16();
    const ModelParams p = params_for(ops);
    EXPECT_DOUBLE_EQ(berger_coefficient(Vector::Zero(ops.beam_size()), p, ops), p.Q);
    const double a = 0.7;
    Vector v(ops.beam_size());
    for (int j = 1; j <= ops.beam_size(); ++j) v[j - 1] = a * std::sin(pi * j / 16.0);
    const double lh = dirichlet_eigenvalue(16, 1);
    EXPECT_NEAR(berger_coefficient(v, p, ops), p.Q - a * a * lh / 2.0, 1e-12);
    const double S = beam_stretch(v, ops);
    EXPECT_NEAR(berger_coefficient(2.0 * v, p, ops), p.Q - 4.0 * S, 1e-12);
}

TEST(F2, Examples) {
    const auto ops = grid16();
    ModelParams p = params_for(ops);
    p.p0 = Vector::LinSpaced(ops.beam_size(), -1.0, 2.0);
    EXPECT_LT((eval_F2(Vector::Zero(ops.beam_size()), p, ops) + p.p0).lpNorm<Eigen::Infinity>(), 1e-15);
    p.p0.resize(0);
    Vector v(ops.beam_size());
    for (int j = 1; j <= ops.beam_size(); ++j) v[j - 1] = 0.3 * std::sin(2 * pi * j / 16.0);
    const double lh = dirichlet_eigenvalue(16, 2);
    const double S = beam_stretch(v, ops);
    EXPECT_LT((eval_F2(v, p, ops) + (p.Q - S) * lh * v).lpNorm<Eigen::Infinity>(), 1e-10);
    // Q = 0: cubic leading order.
    p.Q = 0.0;
    const Vector small = 1e-3 * v / 0.3;
    const Vector big = 2e-3 * v / 0.3;
    EXPECT_NEAR(eval_F2(big, p, ops).norm() / eval_F2(small, p, ops).norm(), 8.0, 1e-10);
}

TEST(Potentials, Examples) {
    const auto ops = grid16();
    const ModelParams p = params_for(ops);
    EXPECT_EQ(potential_Pi(Vector::Zero(ops.wave_size()), p, ops), 0.0);
    EXPECT_NEAR(potential_Pi(Vector::Ones(ops.wave_size()), p, ops), -0.75, 1e-14);
    EXPECT_EQ(potential_Phi(Vector::Zero(ops.beam_size()), p, ops), 0.0);
    std::mt19937_64 rng(4);
    const Vector v = testsupport::smooth_beam(ops, rng, 0.5);
    const double S = beam_stretch(v, ops);
    EXPECT_NEAR(potential_Phi(v, p, ops), S * S / 4 - p.Q * S / 2, 1e-12);
}

TEST(Potentials, GradientsMatchForces) {
    const auto ops = grid16();
    ModelParams p = params_for(ops);
    p.p0 = Vector::Constant(ops.beam_size(), 0.3);
    std::mt19937_64 rng(8);
    const Vector z = testsupport::smooth_wave(ops, rng, 1.0);
    const Vector F1 = eval_F1(z, p);
    const double h = 1e-5;
    for (int k : {0, 7, 100, ops.wave_size() - 1}) {
        Vector zp = z, zm = z;
        zp[k] += h;
        zm[k] -= h;
        const double fd = (potential_Pi(zp, p, ops) - potential_Pi(zm, p, ops)) / (2 * h) / ops.wave_weights[k];
        EXPECT_NEAR(fd, F1[k], 1e-6 * (1.0 + std::abs(F1[k])));
    }
    const Vector v = testsupport::smooth_beam(ops, rng, 1.0);
    const Vector F2 = eval_F2(v, p, ops);
    for (int k = 0; k < ops.beam_size(); ++k) {
        Vector vp = v, vm = v;
        vp[k] += h;
        vm[k] -= h;
        const double fd = (potential_Phi(vp, p, ops) - potential_Phi(vm, p, ops)) / (2 * h) / ops.grid.h0;
        EXPECT_NEAR(fd, F2[k], 1e-6 * (1.0 + F2.lpNorm<Eigen::Infinity>()));
    }
}

TEST(Energy, ZeroAndKineticStates) {
    const auto ops = grid16();
    const ModelParams p = params_for(ops);
    SimState s = SimState::zero(ops);
    EXPECT_EQ(total_energy(s, p, ops).E_total, 0.0);
    std::mt19937_64 rng(3);
    s.zt = testsupport::smooth_wave(ops, rng, 1.0);
    EXPECT_NEAR(total_energy(s, p, ops).E_total, 0.5 * p.beta * ops.wave_norm_sq(s.zt), 1e-14);
}

TEST(Energy, GammaChangesOnlyRotationalTerm) {
    std::mt19937_64 rng(12);
    const auto ops0 = grid16(1.0, 0.0), ops1 = grid16(1.0, 1.0);
    const SimState s = testsupport::smooth_state(ops0, rng, 0.5);
    const double e0 = total_energy(s, params_for(ops0), ops0).E_total;
    const double e1 = total_energy(s, params_for(ops1), ops1).E_total;
    EXPECT_NEAR(e1 - e0, 0.5 * ops0.beam_inner(ops0.A_beam * s.vt, s.vt), 1e-12 * (1.0 + std::abs(e0)));
}

TEST(Energy, MuCancellation) {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const auto base = grid16(1.0);
        const Vector z = testsupport::smooth_wave(base, rng, 1.5);
        double ref = 0.0;
        bool first = true;
        for (double mu : {0.5, 1.0, 2.0}) {
            const auto ops = grid16(mu);
            ModelParams p = params_for(ops);
            const double val = 0.5 * p.beta * ops.wave_inner(ops.A_wave * z, z) + p.beta * potential_Pi(z, p, ops);
            if (first) ref = val;
            first = false;
            EXPECT_NEAR(val, ref, 1e-12 * (1.0 + std::abs(ref)));
        }
    }
}

TEST(EnergyBounds, CubicAndLinearExamples) {
    const auto ops = grid16(1.0);
    ModelParams p = params_for(ops);
    p.f = NonlinearitySpec::odd_polynomial({0.0, 1.0});
    auto k = compute_energy_bound_constants(p, ops);
    EXPECT_DOUBLE_EQ(k.delta_f, 0.5);
    EXPECT_NEAR(k.M_f, 1.0, 1e-12);
    // Independent oracle: dense scan of delta s^2 - P(s).
    double scan = -1e300;
    for (int i = -100000; i <= 100000; ++i) {
        const double s = i * 1e-4;
        scan = std::max(scan, 0.5 * s * s - (s * s * s * s / 4 - s * s / 2));
    }
    EXPECT_NEAR(k.M_f, scan, 1e-7);

    const auto ops25 = grid16(0.25);
    ModelParams lin = params_for(ops25);
    lin.f = NonlinearitySpec::odd_polynomial({1.0});
    k = compute_energy_bound_constants(lin, ops25);
    EXPECT_DOUBLE_EQ(k.delta_f, 0.375);
    EXPECT_NEAR(k.M_f, 0.0, 1e-15);

    lin.f = NonlinearitySpec::odd_polynomial({0.1});
    EXPECT_THROW(compute_energy_bound_constants(lin, ops25), AssumptionError);
}

TEST(EnergyBounds, SandwichAndPositivePartOnRandomStates) {
    std::mt19937_64 rng(31);
    const auto ops = grid16();
    for (int rep = 0; rep < 100; ++rep) {
        ModelParams p = params_for(ops);
        if (rep % 2) p.p0 = testsupport::gaussian(ops.beam_size(), rng, 2.0);
        const auto k = compute_energy_bound_constants(p, ops);
        const SimState s = rep % 3 ? testsupport::smooth_state(ops, rng, 3.0) : testsupport::rough_state(ops, rng, 0.3);
        const auto e = total_energy(s, p, ops);
        EXPECT_LE(k.c * e.E_plus - k.M0, e.E_total + 1e-9);
        EXPECT_LE(e.E_total, k.C * e.E_plus + k.M0 + 1e-9);
        EXPECT_GE(e.Etheta, 0.0);
        const double pv = std::sqrt(ops.beam_norm_sq(p.load(ops)) * ops.beam_norm_sq(s.v));
        EXPECT_GE(e.E_plus, -pv);
        if (p.p0.size() == 0) EXPECT_GE(e.E_plus, 0.0);
    }
}
