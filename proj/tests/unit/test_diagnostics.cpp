#include "acoustoplate/diagnostics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace acoustoplate;

namespace {

ModelParams params_for(const DiscreteOperators& ops, double kappa = 1.0) {
    ModelParams p;
    p.mu = ops.mu;
    p.gamma = ops.gamma;
    p.kappa = kappa;
    return p;
}

Trajectory run(const SimState& s0, const ModelParams& p, const DiscreteOperators& ops, double T, double dt,
               double save_every) {
    SimulationOptions o;
    o.dt = dt;
    o.T = T;
    o.save_every = save_every;
    o.tol = 1e-11;
    auto tr = simulate(s0, p, ops, o);
    EXPECT_TRUE(tr.ok()) << tr.error;
    return tr;
}

} // namespace

TEST(YNorm, IdentityGammaTermAndTriangle) {
    std::mt19937_64 rng(1);
    const auto ops0 = build_operators(GridSpec::make(10, 10), 1.0, 0.0);
    const auto ops1 = build_operators(GridSpec::make(10, 10), 1.0, 1.0);
    const ModelParams p = params_for(ops0);
    const SimState a = testsupport::smooth_state(ops0, rng, 1.0);
    EXPECT_EQ(y_norm(a, a, p, ops0), 0.0);

    SimState only_vt = SimState::zero(ops0);
    only_vt.vt = testsupport::smooth_beam(ops0, rng, 1.0);
    const SimState zero = SimState::zero(ops0);
    const double diff = y_norm_sq(only_vt, zero, p, ops1) - y_norm_sq(only_vt, zero, p, ops0);
    EXPECT_NEAR(diff, p.alpha * ops0.beam_inner(ops0.A_beam * only_vt.vt, only_vt.vt), 1e-12 * (1.0 + diff));

    for (int rep = 0; rep < 50; ++rep) {
        const SimState x = testsupport::rough_state(ops0, rng, 1.0), y = testsupport::rough_state(ops0, rng, 1.0),
                       z = testsupport::smooth_state(ops0, rng, 1.0);
        EXPECT_LE(y_norm(x, z, p, ops0), y_norm(x, y, p, ops0) + y_norm(y, z, p, ops0) + 1e-12);
    }
    SimState bad = a;
    bad.v.resize(3);
    EXPECT_THROW(y_norm(a, bad, p, ops0), DiagnosticError);
}

TEST(YEmbedding, IsometryOntoCoordinates) {
    std::mt19937_64 rng(2);
    const auto ops = build_operators(GridSpec::make(10, 12), 1.3, 0.4);
    ModelParams p = params_for(ops);
    p.alpha = 0.7;
    p.beta = 1.9;
    const YEmbedding emb(p, ops);
    EXPECT_EQ(emb.size(), 2 * ops.wave_size() + 3 * ops.beam_size());
    const SimState zero = SimState::zero(ops);
    for (int rep = 0; rep < 10; ++rep) {
        const SimState a = testsupport::rough_state(ops, rng, 1.0), b = testsupport::rough_state(ops, rng, 1.0);
        const double direct = y_norm(a, b, p, ops);
        EXPECT_NEAR((emb(a) - emb(b)).norm(), direct, 1e-10 * direct);
        EXPECT_NEAR(emb(a).norm(), y_norm(a, zero, p, ops), 1e-10 * emb(a).norm());
        const YEmbedding h(p, ops, true);
        EXPECT_NEAR((h(a) - h(b)).norm(), h_norm(a, b, ops), 1e-10 * h_norm(a, b, ops));
    }
    // Lowest coordinates: the constant wave mode comes first.
    EXPECT_EQ(emb.coords()[0].field, YEmbedding::Field::Z);
    EXPECT_EQ(emb.coords()[0].k + emb.coords()[0].l, 0);
}

TEST(DistToEquilibria, ZeroAtEquilibriumAndRejectsEmpty) {
    const auto ops = build_operators(GridSpec::make(10, 10), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    const auto set = enumerate_equilibria(p, ops, 2, 1e-11);
    for (const auto& e : set.items) EXPECT_EQ(dist_to_equilibria(e.as_state(ops), set.items, p, ops), 0.0);
    EXPECT_THROW(dist_to_equilibria(SimState::zero(ops), {}, p, ops), DiagnosticError);
}

TEST(EnergyBall, StatesBelowLevelForEveryGamma) {
    std::mt19937_64 rng(3);
    for (double R : {5.0, 50.0}) {
        const auto ops = build_operators(GridSpec::make(10, 10), 1.0, 0.0);
        const ModelParams p = params_for(ops);
        for (int rep = 0; rep < 20; ++rep) {
            const SimState s = random_state_in_energy_ball(p, ops, R, rng);
            for (double gamma : {0.0, 0.5, 1.0}) {
                const auto og = build_operators(GridSpec::make(10, 10), 1.0, gamma);
                ModelParams pg = p;
                pg.gamma = gamma;
                EXPECT_LE(total_energy(s, pg, og).E_total, R + 1e-12);
            }
        }
    }
}

TEST(WindowedMaxima, Basic) {
    const auto m = windowed_maxima({3, 1, 2, 5, 0, 4, 1}, 3);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m[0], 3);
    EXPECT_EQ(m[1], 5);
    EXPECT_EQ(m[2], 1);
}

TEST(DifferenceFunctionals, IdenticalTrajectoriesGiveZeros) {
    std::mt19937_64 rng(4);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    const auto tr = run(testsupport::smooth_state(ops, rng, 1.0), p, ops, 0.5, 0.01, 0.01);
    const auto d = difference_functionals(tr, tr, p, ops);
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        EXPECT_EQ(d.E0_series[i], 0.0);
        EXPECT_EQ(d.G_series[i], 0.0);
        EXPECT_EQ(d.H_series[i], 0.0);
        EXPECT_EQ(d.Psi_series[i], 0.0);
        EXPECT_EQ(d.lot_series[i], 0.0);
    }
}

TEST(DifferenceFunctionals, MonotoneSeriesAndFeasibleInequality) {
    std::mt19937_64 rng(5);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    for (int rep = 0; rep < 4; ++rep) {
        const auto a = run(random_state_in_energy_ball(p, ops, 20.0, rng), p, ops, 3.0, 0.01, 0.01);
        const auto b = run(random_state_in_energy_ball(p, ops, 20.0, rng), p, ops, 3.0, 0.01, 0.01);
        const auto d = difference_functionals(a, b, p, ops);
        for (std::size_t i = 1; i < d.times.size(); ++i) {
            EXPECT_GE(d.G_series[i], d.G_series[i - 1]);
            EXPECT_GE(d.lot_series[i], d.lot_series[i - 1]);
            EXPECT_GE(d.E0_series[i], 0.0);
        }
        EXPECT_TRUE(d.fit.feasible);
        EXPECT_GE(d.fit.min_ratio, 1.0 - 1e-12);
        EXPECT_GE(d.fit.c0, 0.0);
        EXPECT_GE(d.fit.c1, 0.0);
        EXPECT_GE(d.fit.c2, 0.0);
    }
}

TEST(DifferenceFunctionals, RejectsMisalignedGrids) {
    std::mt19937_64 rng(6);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    const SimState s = testsupport::smooth_state(ops, rng, 0.5);
    const auto a = run(s, p, ops, 0.2, 0.01, 0.01);
    const auto b = run(s, p, ops, 0.3, 0.01, 0.01);
    EXPECT_THROW(difference_functionals(a, b, p, ops), DiagnosticError);
}

TEST(LinearProgram, SmallKnownProblem) {
    // min c0 + c1 + c2 with c0 >= 1 (row 1), c1 + c2 >= 2 (row 2), c2 >= 0.5 (row 3).
    std::vector<std::array<double, 3>> X{{1, 0, 0}, {0, 1, 1}, {0, 0, 1}};
    std::vector<double> b{1.0, 2.0, 0.5};
    std::array<double, 3> c{};
    ASSERT_TRUE(detail::lp3(X, b, {1.0, 1.0, 1.0}, c));
    EXPECT_NEAR(c[0] + c[1] + c[2], 3.0, 1e-12);
    EXPECT_GE(c[2], 0.5 - 1e-12);
}

TEST(Stabilizability, IdenticalInitialStatesAreDegenerate) {
    std::mt19937_64 rng(7);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    const auto tr = run(testsupport::smooth_state(ops, rng, 0.5), p, ops, 0.2, 0.01, 0.01);
    EXPECT_THROW(stabilizability_fit(tr, tr, p, ops), DiagnosticError);
}

TEST(Stabilizability, LinearRegimeDecaysWithoutLowerOrderTerm) {
    // Linear damping and force, small data: the difference obeys a linear dissipative system.
    std::mt19937_64 rng(8);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    ModelParams p = params_for(ops);
    p.g = NonlinearitySpec::odd_polynomial({1.0});
    p.f = NonlinearitySpec::odd_polynomial({2.0});
    p.Q = 0.0;
    SimState a = testsupport::smooth_state(ops, rng, 1e-4);
    SimState b = a;
    b.zt += testsupport::smooth_wave(ops, rng, 1e-4);
    b.vt += testsupport::smooth_beam(ops, rng, 1e-4);
    const auto ta = run(a, p, ops, 30.0, 0.02, 0.1);
    const auto tb = run(b, p, ops, 30.0, 0.02, 0.1);
    const auto fit = stabilizability_fit(ta, tb, p, ops);
    EXPECT_TRUE(fit.omega_positive) << fit.note;
    EXPECT_GT(fit.omega, 0.0);
    EXPECT_EQ(fit.violations, 0);
    const double lot_max = fit.lot.back();
    EXPECT_LE(fit.C2 * lot_max, 0.05 * fit.C1 * fit.distance_sq.front());
}

TEST(Stabilizability, NonlinearPairFitsWithoutViolations) {
    std::mt19937_64 rng(9);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    const auto ta = run(random_state_in_energy_ball(p, ops, 30.0, rng), p, ops, 20.0, 0.02, 0.1);
    const auto tb = run(random_state_in_energy_ball(p, ops, 30.0, rng), p, ops, 20.0, 0.02, 0.1);
    const auto fit = stabilizability_fit(ta, tb, p, ops);
    EXPECT_TRUE(fit.omega_positive) << fit.note;
    EXPECT_EQ(fit.violations, 0);
    for (std::size_t i = 0; i < fit.times.size(); ++i)
        EXPECT_LE(fit.distance_sq[i],
                  (fit.C1 * std::exp(-fit.omega * fit.times[i]) * fit.distance_sq.front() + fit.C2 * fit.lot[i]) *
                      (1.0 + 1e-9));
}

TEST(BoxCounting, IdenticalPointsHaveDimensionZero) {
    const Matrix pts = Matrix::Constant(200, 4, 0.3);
    const auto est = box_count_dimension(pts);
    EXPECT_EQ(est.slope, 0.0);
}

TEST(BoxCounting, SegmentAndPatchCalibration) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::VectorXd dir = (Eigen::VectorXd(5) << 1, -2, 0.5, 3, 1).finished().normalized();
    Matrix seg(10000, 5);
    for (int i = 0; i < 10000; ++i) seg.row(i) = (u(rng) * dir).transpose();
    const auto s1 = box_count_dimension(seg);
    EXPECT_NEAR(s1.slope, 1.0, 0.1);
    for (std::size_t i = 1; i < s1.counts.size(); ++i) {
        EXPECT_GE(s1.counts[i], s1.counts[i - 1]);
        EXPECT_LT(s1.epsilons[i], s1.epsilons[i - 1]);
    }
    const Eigen::VectorXd e2 = (Eigen::VectorXd(5) << 0, 1, 1, 0, -1).finished().normalized();
    Matrix patch(10000, 5);
    for (int i = 0; i < 10000; ++i) patch.row(i) = (u(rng) * dir + u(rng) * e2).transpose();
    EXPECT_NEAR(box_count_dimension(patch).slope, 2.0, 0.2);
}

TEST(BoxCounting, RejectsSmallSamples) {
    EXPECT_THROW(box_count_dimension(Matrix::Zero(50, 3)), DiagnosticError);
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    std::vector<SimState> few(10, SimState::zero(ops));
    EXPECT_THROW(fractal_dimension(few, 8, params_for(ops), ops), DiagnosticError);
}

TEST(AttractorSample, UniformBoundAndSampleCount) {
    const auto ops = build_operators(GridSpec::make(8, 8), 1.0, 0.5);
    const ModelParams p = params_for(ops);
    AttractorSampleOptions o;
    o.n_trajectories = 3;
    o.T_burn = 2.0;
    o.T_sample = 1.0;
    o.sample_every = 0.1;
    o.dt = 0.02;
    o.R = 20.0;
    o.threads = 2;
    const auto s = attractor_sample(p, ops, o);
    EXPECT_TRUE(s.errors.empty());
    EXPECT_EQ(s.states.size(), 3u * 11u);
    for (const auto& st : s.states) {
        EXPECT_GE(st.t, o.T_burn - 1e-9);
        EXPECT_LE(total_energy(st, p, ops).E_total, o.R + 1e-6);
        EXPECT_GE(uniform_bound_functional(st, ops), 0.0);
    }
    // Same seed, same sample: determinism independent of the thread count.
    o.threads = 1;
    const auto again = attractor_sample(p, ops, o);
    ASSERT_EQ(again.states.size(), s.states.size());
    for (std::size_t i = 0; i < s.states.size(); ++i) EXPECT_EQ((again.states[i].z - s.states[i].z).norm(), 0.0);
}

TEST(Semicontinuity, ReferenceAgainstItselfIsZero) {
    SemicontinuityOptions o;
    o.sample.n_trajectories = 2;
    o.sample.T_burn = 0.5;
    o.sample.T_sample = 0.5;
    o.sample.dt = 0.05;
    o.sample.R = 10.0;
    ModelParams p;
    const auto rows = semicontinuity_experiment({{0.5, 0.0}}, {0.5, 0.0}, p, GridSpec::make(8, 8), o);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].semidistance, 0.0);
    EXPECT_EQ(rows[0].product_semidistance, 0.0);
    EXPECT_EQ(rows[0].h_semidistance, 0.0);
    EXPECT_THROW(semicontinuity_experiment({}, {0.5, 0.0}, p, GridSpec::make(8, 8), o), ConfigError);
}
