#include "acoustoplate/integrator.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace acoustoplate;

namespace {

DiscreteOperators ops_for(int n, double mu = 1.0, double gamma = 0.5) {
    return build_operators(GridSpec::make(n, n), mu, gamma);
}

ModelParams params_for(const DiscreteOperators& ops, double kappa = 1.0) {
    ModelParams p;
    p.mu = ops.mu;
    p.gamma = ops.gamma;
    p.kappa = kappa;
    return p;
}

// Squared Y-distance written out independently of the diagnostics module.
double y_dist_sq(const SimState& a, const SimState& b, const ModelParams& p, const DiscreteOperators& ops) {
    const Vector dz = a.z - b.z, dzt = a.zt - b.zt, dv = a.v - b.v, dvt = a.vt - b.vt, dth = a.theta - b.theta;
    return p.beta * (ops.wave_inner(ops.A_wave * dz, dz) + ops.wave_norm_sq(dzt)) +
           p.alpha * (ops.beam_norm_sq(ops.A_beam * dv) + ops.beam_inner(ops.M_gamma * dvt, dvt) + ops.beam_norm_sq(dth));
}

} // namespace

TEST(Rhs, ZeroStateIsStationary) {
    const auto ops = ops_for(16);
    const auto d = rhs(SimState::zero(ops), params_for(ops), ops);
    EXPECT_EQ(d.z_tt.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(d.v_tt.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(d.theta_t.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Rhs, KappaZeroDecouplesWave) {
    std::mt19937_64 rng(1);
    const auto ops = ops_for(16);
    const ModelParams p = params_for(ops, 0.0);
    SimState a = testsupport::smooth_state(ops, rng, 0.5);
    SimState b = a;
    b.v = testsupport::smooth_beam(ops, rng, 0.5);
    b.vt = testsupport::smooth_beam(ops, rng, 0.5);
    b.theta = testsupport::smooth_beam(ops, rng, 0.5);
    EXPECT_EQ((rhs(a, p, ops).z_tt - rhs(b, p, ops).z_tt).lpNorm<Eigen::Infinity>(), 0.0);
    SimState c = a;
    c.z = testsupport::smooth_wave(ops, rng, 0.5);
    c.zt = testsupport::smooth_wave(ops, rng, 0.5);
    EXPECT_EQ((rhs(a, p, ops).v_tt - rhs(c, p, ops).v_tt).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Rhs, CouplingPowerBalance) {
    std::mt19937_64 rng(2);
    const auto ops = ops_for(20);
    ModelParams p = params_for(ops);
    p.alpha = 1.7;
    p.beta = 0.6;
    p.kappa = 0.8;
    for (int rep = 0; rep < 100; ++rep) {
        const SimState s = testsupport::rough_state(ops, rng, 1.0);
        const double wave_side = p.beta * p.alpha * p.kappa * ops.wave_inner(ops.beam_flux * s.vt, s.zt);
        const double beam_side = p.alpha * p.beta * p.kappa * ops.beam_inner(ops.beam_trace * s.zt, s.vt);
        EXPECT_LE(std::abs(wave_side - beam_side), 1e-12 * (std::abs(wave_side) + std::abs(beam_side) + 1e-300));
    }
}

TEST(Step, RejectsBadArguments) {
    const auto ops = ops_for(8);
    EXPECT_THROW(step(SimState::zero(ops), 0.0, params_for(ops), ops, 1e-12), ConfigError);
    EXPECT_THROW(step(SimState::zero(ops), 1e-3, params_for(ops), ops, -1.0), ConfigError);
    ModelParams wrong = params_for(ops);
    wrong.mu = 2.0;
    EXPECT_THROW(step(SimState::zero(ops), 1e-3, wrong, ops, 1e-12), ConfigError);
}

TEST(Step, ZeroStateIsFixedPoint) {
    const auto ops = ops_for(16);
    const auto [next, rep] = step(SimState::zero(ops), 1e-3, params_for(ops), ops, 1e-12);
    EXPECT_EQ(next.z.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(next.v.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(rep.energy_residual, 0.0);
    EXPECT_DOUBLE_EQ(next.t, 1e-3);
}

TEST(Step, ConservativeLimitKeepsWaveEnergy) {
    std::mt19937_64 rng(3);
    const auto ops = ops_for(16);
    ModelParams p = params_for(ops, 0.0);
    p.f = NonlinearitySpec::odd_polynomial({});
    p.g = NonlinearitySpec::odd_polynomial({0.0});
    SimState s = SimState::zero(ops);
    s.z = testsupport::smooth_wave(ops, rng, 1.0);
    s.zt = testsupport::smooth_wave(ops, rng, 1.0);
    s.v = testsupport::smooth_beam(ops, rng, 1e-6);
    MidpointStepper st(p, ops, StepperOptions{1e-3, 1e-12});
    const auto e0 = st.energy(s);
    const double wave0 = e0.Ez0 + e0.Pi;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        auto [n, rep] = st.step(s);
        worst = std::max(worst, std::abs(rep.energy_residual));
        s = std::move(n);
    }
    const auto e1 = st.energy(s);
    EXPECT_LE(std::abs(e1.Ez0 + e1.Pi - wave0), 1e-10 * (1.0 + wave0));
    EXPECT_LE(worst, 10 * 1e-12 * (1.0 + std::abs(e0.E_total)));
}

// Energy identity and dissipation signs over the whole (gamma, kappa) grid.
TEST(Step, DiscreteEnergyIdentityAcrossParameters) {
    for (double gamma : {0.0, 0.5, 1.0})
        for (double kappa : {0.0, 0.5, 1.0}) {
            std::mt19937_64 rng(static_cast<unsigned>(100 * gamma + 10 * kappa + 1));
            const auto ops = ops_for(12, 1.0, gamma);
            const ModelParams p = params_for(ops, kappa);
            const double tol = 1e-12;
            MidpointStepper st(p, ops, StepperOptions{2e-3, tol});
            SimState s = testsupport::smooth_state(ops, rng, 1.0);
            for (int k = 0; k < 100; ++k) {
                const auto e = st.energy(s);
                auto [n, rep] = st.step(s, e);
                EXPECT_LE(std::abs(rep.energy_residual), 10 * tol * (1.0 + std::abs(e.E_total)))
                    << "gamma=" << gamma << " kappa=" << kappa << " step " << k;
                EXPECT_GE(rep.dissipation_wave, -10 * tol);
                EXPECT_GE(rep.dissipation_heat, -10 * tol);
                s = std::move(n);
            }
        }
}

TEST(Step, NewtonResidualMatchesContinuousRhsForSmallDt) {
    // For dt -> 0 the step reproduces the explicit derivatives.
    std::mt19937_64 rng(5);
    const auto ops = ops_for(12);
    const ModelParams p = params_for(ops);
    const SimState s = testsupport::smooth_state(ops, rng, 0.5);
    const double dt = 1e-6;
    const auto [n, rep] = step(s, dt, p, ops, 1e-13);
    const auto d = rhs(s, p, ops);
    const Vector ztt = (n.zt - s.zt) / dt, vtt = (n.vt - s.vt) / dt, tht = (n.theta - s.theta) / dt;
    EXPECT_LT((ztt - d.z_tt).lpNorm<Eigen::Infinity>(), 1e-3 * (1.0 + d.z_tt.lpNorm<Eigen::Infinity>()));
    EXPECT_LT((vtt - d.v_tt).lpNorm<Eigen::Infinity>(), 1e-3 * (1.0 + d.v_tt.lpNorm<Eigen::Infinity>()));
    EXPECT_LT((tht - d.theta_t).lpNorm<Eigen::Infinity>(), 1e-3 * (1.0 + d.theta_t.lpNorm<Eigen::Infinity>()));
}

TEST(Step, SecondOrderInTime) {
    std::mt19937_64 rng(6);
    const auto ops = ops_for(8);
    const ModelParams p = params_for(ops);
    const SimState s0 = testsupport::smooth_state(ops, rng, 0.5);
    const double T = 0.2;
    auto run = [&](double dt) {
        SimulationOptions o;
        o.dt = dt;
        o.T = T;
        o.save_every = T;
        o.tol = 1e-13;
        return simulate(s0, p, ops, o).final_state();
    };
    const double base = 0.02;
    const SimState ref = run(base / 8);
    const double e1 = std::sqrt(y_dist_sq(run(base), ref, p, ops));
    const double e2 = std::sqrt(y_dist_sq(run(base / 2), ref, p, ops));
    // Against a dt/8 reference the ideal ratio is (1 - 1/64)/(1/4 - 1/64) = 4.2.
    EXPECT_NEAR(e1 / e2, 4.2, 0.5);
}

TEST(Step, MuInvariance) {
    std::mt19937_64 rng(7);
    const auto opsA = ops_for(12, 0.5), opsB = ops_for(12, 2.0);
    const SimState s0 = testsupport::smooth_state(opsA, rng, 0.8);
    SimulationOptions o;
    o.dt = 1e-2;
    o.T = 1.0;
    o.save_every = 1.0;
    const auto a = simulate(s0, params_for(opsA), opsA, o).final_state();
    const auto b = simulate(s0, params_for(opsB), opsB, o).final_state();
    EXPECT_LE(std::sqrt(y_dist_sq(a, b, params_for(opsA), opsA)), 10 * o.tol * 1e3);
    EXPECT_LE((a.z - b.z).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Simulate, LedgerMonotoneAndAccumulatorsGrow) {
    std::mt19937_64 rng(8);
    const auto ops = ops_for(12);
    const ModelParams p = params_for(ops);
    SimulationOptions o;
    o.dt = 1e-2;
    o.T = 2.0;
    o.save_every = 0.1;
    const auto tr = simulate(testsupport::smooth_state(ops, rng, 1.0), p, ops, o);
    ASSERT_TRUE(tr.ok()) << tr.error;
    EXPECT_EQ(tr.states.size(), 21u);
    EXPECT_EQ(tr.reports.size(), 200u);
    EXPECT_LE(tr.max_energy_rise, 1e-8);
    for (std::size_t k = 1; k < tr.ledgers.size(); ++k) {
        EXPECT_GE(tr.ledgers[k].D_wave_accum, tr.ledgers[k - 1].D_wave_accum - 1e-12);
        EXPECT_GE(tr.ledgers[k].D_heat_accum, tr.ledgers[k - 1].D_heat_accum - 1e-12);
        EXPECT_LE(tr.ledgers[k].E_total, tr.ledgers[k - 1].E_total + 1e-8);
    }
    EXPECT_DOUBLE_EQ(tr.ledgers.front().E_total, total_energy(tr.states.front(), p, ops).E_total);
}

TEST(Simulate, DecoupledLedgersEachDecrease) {
    std::mt19937_64 rng(9);
    const auto ops = ops_for(12);
    const ModelParams p = params_for(ops, 0.0);
    SimulationOptions o;
    o.dt = 1e-2;
    o.T = 2.0;
    const auto tr = simulate(testsupport::smooth_state(ops, rng, 1.0), p, ops, o);
    ASSERT_TRUE(tr.ok());
    for (std::size_t k = 1; k < tr.ledgers.size(); ++k) {
        const auto& a = tr.ledgers[k - 1];
        const auto& b = tr.ledgers[k];
        EXPECT_LE(b.Ez0 + b.Pi, a.Ez0 + a.Pi + 1e-9);
        EXPECT_LE(b.Ev0 + b.Phi + b.Etheta, a.Ev0 + a.Phi + a.Etheta + 1e-9);
    }
}

TEST(Simulate, GammaSweepBoundedEnergy) {
    // E(t) <= C (1 + E(0)) with one C over gamma in {0, 0.5, 1}.
    std::mt19937_64 rng(10);
    double worst = 0.0;
    for (double gamma : {0.0, 0.5, 1.0}) {
        const auto ops = ops_for(10, 1.0, gamma);
        std::mt19937_64 local(rng);
        const SimState s0 = testsupport::smooth_state(ops, local, 1.0);
        SimulationOptions o;
        o.dt = 1e-2;
        o.T = 2.0;
        const auto tr = simulate(s0, params_for(ops), ops, o);
        ASSERT_TRUE(tr.ok());
        for (const auto& e : tr.ledgers) worst = std::max(worst, e.E_plus / (1.0 + tr.ledgers.front().E_plus));
    }
    EXPECT_LT(worst, 10.0);
}

TEST(Simulate, StepFailureKeepsPartialOutput) {
    std::mt19937_64 rng(11);
    const auto ops = ops_for(8);
    SimulationOptions o;
    o.dt = 0.05;
    o.T = 1.0;
    o.max_newton = 1;
    const auto tr = simulate(testsupport::smooth_state(ops, rng, 1.0), params_for(ops), ops, o);
    EXPECT_FALSE(tr.ok());
    EXPECT_NE(tr.error.find("Newton"), std::string::npos);
    EXPECT_GE(tr.states.size(), 1u);
}

TEST(Simulate, StiffnessWarning) {
    const auto ops = ops_for(64);
    MidpointStepper fine(params_for(ops), ops, StepperOptions{1e-3, 1e-12});
    EXPECT_TRUE(fine.stiff());
    const auto coarse = ops_for(8);
    MidpointStepper ok(params_for(coarse), coarse, StepperOptions{1e-3, 1e-12});
    EXPECT_FALSE(ok.stiff());
}
