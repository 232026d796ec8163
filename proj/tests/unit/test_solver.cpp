#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "thermovisco/galerkin.hpp"
#include "thermovisco/mesh.hpp"
#include "thermovisco/solver.hpp"

using namespace thermovisco;

namespace {

GalerkinSystem system1d(int cells) {
    const std::vector<double> e{1.0};
    const std::vector<int> c{cells};
    Mesh m = build_mesh(1, e, c);
    const int n = full_displacement_dofs(m);
    const int k = full_stress_dofs(m);
    return build_spaces(std::move(m), n, k);
}

GalerkinSystem system2d(int cells) {
    const std::vector<double> e{1.0, 1.0};
    const std::vector<int> c{cells, cells};
    Mesh m = build_mesh(2, e, c);
    const int n = full_displacement_dofs(m);
    const int k = full_stress_dofs(m);
    return build_spaces(std::move(m), n, k);
}

InitialData zero_data() {
    InitialData d;
    d.theta0 = [](const Point&) { return 1.0; };
    return d;
}

InitialData smooth_data() {
    InitialData d;
    d.u1 = [](const Point& x) {
        return Eigen::Vector3d(0.5 * std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]), 0.0, 0.0);
    };
    d.stress0 = [](const Point& x) { return SymTensor::diag(0.5 * std::cos(M_PI * x[0]), 0.0, 0.0); };
    d.theta0 = [](const Point& x) { return 1.0 + 0.2 * std::cos(M_PI * x[0]); };
    return d;
}

// 1D smooth data has sin(pi y) = 0 at y = 0; use the 1D variant there.
InitialData smooth_data_1d() {
    InitialData d = smooth_data();
    d.u1 = [](const Point& x) { return Eigen::Vector3d(0.5 * std::sin(M_PI * x[0]), 0.0, 0.0); };
    return d;
}

SolverConfig config(double dt, double t_end, InitialData data) {
    SolverConfig c;
    c.dt = dt;
    c.t_end = t_end;
    c.initial = std::move(data);
    return c;
}

Material material(double lambda, double mu, FlowRule flow) { return {ElasticityTensor(lambda, mu), std::move(flow)}; }

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double state_distance(const SimState& a, const SimState& b) {
    return std::max({max_abs(a.u - b.u), max_abs(a.v - b.v), max_abs(a.stress - b.stress), max_abs(a.theta - b.theta)});
}

}  // namespace

TEST(Initialize, ZeroData) {
    const GalerkinSystem sys = system1d(8);
    const SimState s = initialize(sys, config(0.1, 1.0, zero_data()));
    EXPECT_EQ(s.t, 0.0);
    EXPECT_EQ(max_abs(s.u), 0.0);
    EXPECT_EQ(max_abs(s.v), 0.0);
    EXPECT_EQ(max_abs(s.stress), 0.0);
    EXPECT_EQ(max_abs(s.theta.array() - 1.0), 0.0);
}

TEST(Initialize, DisplacementIsTheProjection) {
    const GalerkinSystem sys = build_spaces(build_mesh(1, std::vector<double>{1.0}, std::vector<int>{4}), 3, 4);
    InitialData d = zero_data();
    d.u0 = [](const Point& x) { return Eigen::Vector3d(x[0] * (1.0 - x[0]), 0.0, 0.0); };
    const SimState s = initialize(sys, config(0.1, 1.0, d));
    EXPECT_LT(max_abs(s.u - project_displacement(sys, d.u0).values), 1e-15);
}

TEST(Initialize, RejectsNonPositiveTemperature) {
    const GalerkinSystem sys = system1d(8);
    InitialData d = zero_data();
    d.theta0 = [](const Point& x) { return x[0] > 0.5 ? -1.0 : 1.0; };
    EXPECT_THROW(initialize(sys, config(0.1, 1.0, d)), std::invalid_argument);
}

TEST(SolverConfig, Validation) {
    SolverConfig c = config(0.1, 1.0, zero_data());
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.step_count(), 10);
    c.dt = -0.1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config(0.1, 0.05, zero_data());
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config(0.1, 0.25, zero_data());
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config(0.1, 1.0, zero_data());
    c.picard_tol = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config(0.1, 1.0, zero_data());
    c.truncation = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config(0.1, 1.0, InitialData{});
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Momentum, ConstantTemperatureExertsNoForce) {
    for (const GalerkinSystem& sys : {system1d(10), system2d(5)}) {
        const Eigen::VectorXd v_old = Eigen::VectorXd::LinSpaced(sys.n_disp(), -1.0, 1.0);
        const Eigen::VectorXd theta = Eigen::VectorXd::Constant(sys.n_temp(), 2.3);
        const Eigen::VectorXd v =
            momentum_substep(sys, v_old, theta, Eigen::VectorXd::Zero(sys.k_stress()), Eigen::VectorXd(), 0.1);
        EXPECT_LT(max_abs(v - v_old), 1e-13);
    }
}

TEST(Momentum, ConstantForceSingleSolve) {
    const GalerkinSystem sys = system1d(6);
    const double dt = 0.05;
    const Eigen::VectorXd load = displacement_load(sys, [](const Point&) { return Eigen::Vector3d(1.0, 0, 0); });
    // Exact load of a unit force on a hat function is its area h.
    EXPECT_LT(max_abs(load.array() - 1.0 / 6.0), 1e-14);
    const Eigen::VectorXd v = momentum_substep(sys, Eigen::VectorXd::Zero(sys.n_disp()),
                                               Eigen::VectorXd::Ones(sys.n_temp()),
                                               Eigen::VectorXd::Zero(sys.k_stress()), load, dt);
    const Eigen::VectorXd expected = dt * Eigen::MatrixXd(sys.disp_mass()).fullPivLu().solve(load);
    EXPECT_LT(max_abs(v - expected), 1e-14);
}

TEST(Momentum, IncrementIsLinear) {
    const GalerkinSystem sys = system2d(4);
    const double dt = 0.02;
    const Eigen::VectorXd v0 = Eigen::VectorXd::LinSpaced(sys.n_disp(), 0.0, 1.0);
    const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(sys.k_stress(), -1.0, 3.0).array().sin();
    const Eigen::VectorXd dth = Eigen::VectorXd::LinSpaced(sys.n_temp(), 0.0, 2.0).array().cos();
    const Eigen::VectorXd load = Eigen::VectorXd::LinSpaced(sys.n_disp(), 1.0, -1.0);
    const Eigen::VectorXd base = Eigen::VectorXd::Constant(sys.n_temp(), 1.0);
    const Eigen::VectorXd d1 = momentum_substep(sys, v0, base + dth, s, load, dt) - v0;
    const Eigen::VectorXd d2 = momentum_substep(sys, v0, base + 2.0 * dth, 2.0 * s, 2.0 * load, dt) - v0;
    EXPECT_LT(max_abs(d2 - 2.0 * d1), 1e-13 * (1.0 + max_abs(d1)));
}

TEST(StressUpdate, PureElasticity) {
    const GalerkinSystem sys = system2d(3);
    const ElasticityTensor c(1.5, 0.7, 2);
    const double dt = 0.1;
    const Eigen::VectorXd s_old = Eigen::VectorXd::LinSpaced(sys.k_stress(), -1.0, 1.0);
    const Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(sys.k_stress(), 2.0, 0.5);
    const Eigen::VectorXd theta = Eigen::VectorXd::Ones(sys.n_temp());
    const Eigen::VectorXd s = stress_substep(sys, c, FlowRule::linear(0.0), theta, s_old, e, dt);
    const int nc = sys.stress_components();
    for (int cell = 0; cell < sys.mesh().cell_count(); ++cell) {
        const Eigen::VectorXd ec = e.segment(cell * nc, nc);
        const SymTensor ce = c.apply(from_mandel(std::span<const double>(ec.data(), nc), 2));
        const Eigen::VectorXd expected = s_old.segment(cell * nc, nc) + dt * to_mandel(ce, 2);
        EXPECT_LT(max_abs(s.segment(cell * nc, nc) - expected), 1e-14);
    }
}

TEST(StressUpdate, LinearRelaxationWithUnitElasticity) {
    const GalerkinSystem sys = system2d(3);
    const ElasticityTensor c(0.0, 0.5, 2);
    const double dt = 0.1;
    const Eigen::VectorXd s_old = Eigen::VectorXd::LinSpaced(sys.k_stress(), -2.0, 3.0);
    const Eigen::VectorXd s = stress_substep(sys, c, FlowRule::linear(1.0), Eigen::VectorXd::Ones(sys.n_temp()),
                                             s_old, Eigen::VectorXd::Zero(sys.k_stress()), dt);
    EXPECT_LT(max_abs(s - s_old / (1.0 + dt)), 1e-13);
}

TEST(StressUpdate, EquilibriumIsAFixedPoint) {
    const GalerkinSystem sys = system2d(3);
    const ElasticityTensor c(1.0, 1.0, 2);
    const FlowRule flow = FlowRule::mroz_saturating(2.0);
    const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(sys.n_temp(), 0.5, 2.0);
    const Eigen::VectorXd s_old = Eigen::VectorXd::LinSpaced(sys.k_stress(), -2.0, 3.0);
    const Eigen::VectorXd e = flow_vector(sys, flow, theta, s_old);
    const Eigen::VectorXd s = stress_substep(sys, c, flow, theta, s_old, e, 0.05);
    EXPECT_LT(max_abs(s - s_old), 1e-12);
}

TEST(StressUpdate, StalledIterationReportsStepFailure) {
    const GalerkinSystem sys = system1d(4);
    StressSolveOptions opt;
    opt.max_iters = 0;
    try {
        (void)stress_substep(sys, ElasticityTensor(1.0, 1.0, 1), FlowRule::mroz_saturating(1.0),
                             Eigen::VectorXd::Ones(sys.n_temp()), Eigen::VectorXd::Ones(sys.k_stress()),
                             Eigen::VectorXd::Zero(sys.k_stress()), 0.1, opt);
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& e) {
        EXPECT_NE(std::string(e.what()).find("smaller dt"), std::string::npos);
    }
}

TEST(Heat, ConservesThermalContentWithoutSources) {
    const GalerkinSystem sys = system2d(6);
    const FieldCoefficients th0 =
        interpolate_temperature(sys, [](const Point& x) { return 1.0 + 0.3 * std::cos(M_PI * x[0]) * x[1]; });
    const Eigen::VectorXd th1 = heat_substep(sys, th0.values, Eigen::VectorXd(), Eigen::VectorXd(), 0.05);
    EXPECT_NEAR(sys.temp_weights().dot(th1), sys.temp_weights().dot(th0.values), 1e-13);
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(sys.n_temp(), 1.7);
    EXPECT_LT(max_abs(heat_substep(sys, c, Eigen::VectorXd(), Eigen::VectorXd(), 0.05) - c), 1e-13);
}

TEST(Heat, TruncatedSourceEntersTheRightHandSide) {
    const GalerkinSystem sys = system1d(8);
    const FlowRule flow = FlowRule::linear(1.0);
    const Eigen::VectorXd stress = Eigen::VectorXd::Constant(sys.k_stress(), std::sqrt(7.0));
    const Eigen::VectorXd theta = Eigen::VectorXd::Ones(sys.n_temp());
    const Eigen::VectorXd q = heat_source(sys, flow, TruncationLevel(5.0), theta, stress);
    EXPECT_LT(max_abs(q.array() - 5.0), 1e-14);
    EXPECT_LT(max_abs(heat_source(sys, flow, TruncationLevel(10.0), theta, stress).array() - 7.0), 1e-13);
    const double dt = 0.01;
    const Eigen::VectorXd th = heat_substep(sys, theta, Eigen::VectorXd(), q, dt);
    EXPECT_LT(max_abs(th.array() - (1.0 + 5.0 * dt)), 1e-13);
}

TEST(Heat, CosineModeDecayMatchesFiniteDifferences) {
    const int cells = 100;
    const double dt = 1e-3;
    const int steps = 100;
    const GalerkinSystem sys = system1d(cells);
    const auto theta0 = [](double x) { return 1.0 + 0.5 * std::cos(M_PI * x); };
    Eigen::VectorXd th = interpolate_temperature(sys, [&](const Point& p) { return theta0(p[0]); }).values;
    double previous_max = th.maxCoeff();
    for (int n = 0; n < steps; ++n) {
        th = heat_substep(sys, th, Eigen::VectorXd(), Eigen::VectorXd(), dt);
        EXPECT_LT(th.maxCoeff(), previous_max);
        previous_max = th.maxCoeff();
    }

    // Heat-only finite differences: implicit Euler with ghost-node Neumann ends.
    const int nodes = cells + 1;
    const double h = 1.0 / cells;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nodes, nodes);
    for (int i = 0; i < nodes; ++i) {
        a(i, i) = 1.0 / dt + 2.0 / (h * h);
        if (i > 0) a(i, i - 1) = -(i == nodes - 1 ? 2.0 : 1.0) / (h * h);
        if (i + 1 < nodes) a(i, i + 1) = -(i == 0 ? 2.0 : 1.0) / (h * h);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd fd(nodes);
    for (int i = 0; i < nodes; ++i) fd[i] = theta0(i * h);
    for (int n = 0; n < steps; ++n) {
        const Eigen::VectorXd rhs = fd / dt;
        fd = lu.solve(rhs);
    }
    const double err = l2_distance(sys, FieldCoefficients{Space::temperature, th}, [&](const Point& x) {
        const double s = std::min(x[0] / h, nodes - 1.0 - 1e-12);
        const int i = static_cast<int>(s);
        return fd[i] + (s - i) * (fd[i + 1] - fd[i]);
    });
    EXPECT_LT(err, 1e-3);
    // Both decay toward the mean like the exact mode.
    const double exact_amp = 0.5 * std::exp(-M_PI * M_PI * steps * dt);
    EXPECT_NEAR(th[0] - 1.0, exact_amp, 0.02 * exact_amp);
}

TEST(Heat, ExpansionDecayFollowsTheExponentialBound) {
    const GalerkinSystem sys = system1d(10);
    const double dt = 0.01;
    const int nq = 2;
    const Eigen::VectorXd div = Eigen::VectorXd::Ones(sys.mesh().cell_count() * nq);
    Eigen::VectorXd th = Eigen::VectorXd::Ones(sys.n_temp());
    for (int n = 0; n < 100; ++n) {
        th = heat_substep(sys, th, div, Eigen::VectorXd(), dt);
    }
    const double expected = std::exp(-1.0);
    EXPECT_LT(std::abs(th.minCoeff() - expected) / expected, 0.02);
    EXPECT_GE(th.minCoeff(), expected * 0.95);
}

TEST(Heat, NonPositiveResultRaisesPositivityViolation) {
    const GalerkinSystem sys = system1d(4);
    const Eigen::VectorXd div = Eigen::VectorXd::Constant(sys.mesh().cell_count() * 2, -200.0);
    EXPECT_THROW((void)heat_substep(sys, Eigen::VectorXd::Ones(sys.n_temp()), div, Eigen::VectorXd(), 0.01),
                 PositivityViolation);
}

TEST(Step, ZeroDataIsAFixedPoint) {
    const GalerkinSystem sys = system1d(10);
    ThermoViscoSolver solver(sys, material(1.0, 1.0, FlowRule::linear(1.0)), config(0.01, 0.05, zero_data()));
    const SimState before = solver.state();
    const StepReport& r = solver.step();
    EXPECT_EQ(r.picard_iterations, 1);
    EXPECT_LT(state_distance(before, solver.state()), 1e-14);
    EXPECT_NEAR(solver.state().t, 0.01, 1e-15);
    const RunSummary sum = solver.run();
    EXPECT_EQ(sum.final_state.step, 5);
    EXPECT_LT(state_distance(before, sum.final_state), 1e-14);
}

TEST(Step, DecoupledStepReproducesChainedSubsteps) {
    const GalerkinSystem sys = system1d(20);
    const double dt = 0.01;
    const Material mat = material(1.0, 1.0, FlowRule::linear(0.0));
    ThermoViscoSolver solver(sys, mat, config(dt, dt, smooth_data_1d()));
    const SimState old = solver.state();
    const StepReport& r = solver.step();
    EXPECT_LE(r.picard_iterations, 10);
    const SimState& s = solver.state();

    const Eigen::VectorXd th =
        heat_substep(sys, old.theta, divergence_at_gauss(sys, s.v), Eigen::VectorXd(), dt);
    const Eigen::VectorXd v = momentum_substep(sys, old.v, s.theta, s.stress, Eigen::VectorXd(), dt);
    const Eigen::VectorXd e = strain(sys, FieldCoefficients{Space::displacement, s.v}).values;
    const Eigen::VectorXd st =
        stress_substep(sys, solver.elasticity(), mat.flow, s.theta, old.stress, e, dt);
    EXPECT_LT(max_abs(th - s.theta), 1e-9);
    EXPECT_LT(max_abs(v - s.v), 1e-9);
    EXPECT_LT(max_abs(st - s.stress), 1e-9);
    EXPECT_LT(max_abs(s.u - (old.u + dt * s.v)), 1e-15);
}

TEST(Step, CoupledStepIsAFixedPointOfTheSubsteps) {
    const GalerkinSystem sys = system1d(20);
    const double dt = 0.01;
    const Material mat = material(1.0, 1.0, FlowRule::mroz_saturating(1.0));
    SolverConfig cfg = config(dt, dt, smooth_data_1d());
    cfg.forcing = [](const Point& x, double t) { return Eigen::Vector3d(std::sin(M_PI * x[0]) * (1.0 + t), 0, 0); };
    ThermoViscoSolver solver(sys, mat, cfg);
    const SimState old = solver.state();
    solver.step();
    const SimState& s = solver.state();
    const Eigen::VectorXd load =
        displacement_load(sys, [&](const Point& p) { return cfg.forcing(p, dt); });
    const Eigen::VectorXd q = heat_source(sys, mat.flow, TruncationLevel(solver.truncation_height()), s.theta, s.stress);
    EXPECT_LT(max_abs(heat_substep(sys, old.theta, divergence_at_gauss(sys, s.v), q, dt) - s.theta), 1e-9);
    EXPECT_LT(max_abs(momentum_substep(sys, old.v, s.theta, s.stress, load, dt) - s.v), 1e-9);
    const Eigen::VectorXd e = strain(sys, FieldCoefficients{Space::displacement, s.v}).values;
    EXPECT_LT(max_abs(stress_substep(sys, solver.elasticity(), mat.flow, s.theta, old.stress, e, dt) - s.stress),
              1e-9);
}

TEST(Step, FirstOrderInTime) {
    const GalerkinSystem sys = system1d(40);
    const Material mat = material(1.0, 1.0, FlowRule::linear(0.2));
    std::vector<SimState> finals;
    for (double dt : {0.01, 0.005, 0.0025}) {
        finals.push_back(run(sys, mat, config(dt, 0.2, smooth_data_1d())).final_state);
    }
    const double d1 = state_distance(finals[0], finals[1]);
    const double d2 = state_distance(finals[1], finals[2]);
    EXPECT_GT(d1 / d2, 1.6);
    EXPECT_LT(d1 / d2, 2.4);
}

TEST(Step, SplittingOrderDoesNotChangeTheConvergedStep) {
    const GalerkinSystem sys = system2d(6);
    const Material mat = material(1.0, 1.0, FlowRule::mroz_saturating(0.5));
    SolverConfig a = config(0.01, 0.05, smooth_data());
    SolverConfig b = a;
    b.order = SplittingOrder::mechanics_first;
    const SimState sa = run(sys, mat, a).final_state;
    const SimState sb = run(sys, mat, b).final_state;
    EXPECT_LT(state_distance(sa, sb), 1e-8);
}

TEST(Step, PicardResidualDecreasesOverTheLastIterates) {
    const GalerkinSystem sys = system1d(40);
    const RunSummary sum = run(sys, material(1.0, 1.0, FlowRule::linear(0.2)), config(0.002, 0.1, smooth_data_1d()));
    ASSERT_EQ(sum.reports.size(), 50u);
    for (const auto& r : sum.reports) {
        const auto& h = r.residual_history;
        ASSERT_FALSE(h.empty());
        EXPECT_LT(h.back(), 1e-10);
        for (std::size_t i = h.size() >= 3 ? h.size() - 2 : 1; i < h.size(); ++i) {
            EXPECT_LT(h[i], h[i - 1]) << "step " << r.step;
        }
    }
}

TEST(Step, NonConvergenceCarriesResidualHistory) {
    const GalerkinSystem sys = system1d(20);
    SolverConfig cfg = config(0.01, 0.05, smooth_data_1d());
    cfg.picard_max_iters = 2;
    ThermoViscoSolver solver(sys, material(1.0, 1.0, FlowRule::linear(0.2)), cfg);
    try {
        solver.step();
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& e) {
        EXPECT_EQ(e.residual_history().size(), 2u);
        EXPECT_NEAR(e.time(), 0.01, 1e-15);
    }
}

TEST(Run, StepCountAndFinalTime) {
    const GalerkinSystem sys = system1d(10);
    const double dt = 0.013;
    const RunSummary sum = run(sys, material(1.0, 1.0, FlowRule::linear(0.2)), config(dt, 3 * dt, smooth_data_1d()));
    EXPECT_EQ(sum.final_state.step, 3);
    EXPECT_NEAR(sum.final_state.t, 3 * dt, 1e-12);
    EXPECT_EQ(sum.ledger.rows().size(), 4u);
    EXPECT_EQ(sum.reports.size(), 3u);
}

TEST(Run, ObserversSeeEveryStepInOrder) {
    const GalerkinSystem sys = system1d(10);
    std::vector<int> steps;
    std::vector<double> times;
    const Observer obs = [&](int step, double t, const SimState& s, const BalanceSample& d) {
        EXPECT_EQ(step, s.step);
        EXPECT_EQ(step, d.step);
        EXPECT_EQ(t, s.t);
        steps.push_back(step);
        times.push_back(t);
    };
    run(sys, material(1.0, 1.0, FlowRule::linear(0.2)), config(0.01, 0.05, smooth_data_1d()), {obs});
    EXPECT_EQ(steps, (std::vector<int>{1, 2, 3, 4, 5}));
    for (std::size_t i = 0; i < times.size(); ++i) {
        EXPECT_NEAR(times[i], 0.01 * static_cast<double>(i + 1), 1e-15);
    }
}

TEST(Run, RejectsInadmissibleFlowUnlessDisabled) {
    const GalerkinSystem sys = system1d(10);
    const FlowRule bad = FlowRule::custom("negated", [](double, const SymTensor& t) { return -1.0 * t; }, 1.0);
    SolverConfig cfg = config(0.01, 0.05, smooth_data_1d());
    EXPECT_THROW(ThermoViscoSolver(sys, material(1.0, 1.0, bad), cfg), std::domain_error);
    cfg.require_admissible = false;
    EXPECT_NO_THROW(ThermoViscoSolver(sys, material(1.0, 1.0, bad), cfg));
}

TEST(Run, SourceStaysWithinTruncationBand) {
    const GalerkinSystem sys = system1d(40);
    SolverConfig cfg = config(0.002, 0.1, smooth_data_1d());
    cfg.initial.stress0 = [](const Point& x) { return SymTensor::diag(2.0 * std::sin(M_PI * x[0]), 0, 0); };
    cfg.truncation = 0.05;
    const RunSummary sum = run(sys, material(1.0, 1.0, FlowRule::linear(1.0)), cfg);
    double top = 0.0;
    for (const auto& r : sum.reports) {
        EXPECT_GE(r.source_min, 0.0);
        EXPECT_LE(r.source_max, 0.05);
        top = std::max(top, r.source_max);
    }
    EXPECT_DOUBLE_EQ(top, 0.05);
    EXPECT_DOUBLE_EQ(sum.truncation_height, 0.05);
}

TEST(Energy, OperatorAndQuadratureTotalsAgree) {
    const GalerkinSystem sys = system2d(5);
    ThermoViscoSolver solver(sys, material(1.2, 0.8, FlowRule::linear(0.3)), config(0.01, 0.03, smooth_data()));
    solver.run();
    const EnergyTotals a = energy_totals(sys, solver.elasticity(), solver.state());
    const EnergyTotals b = quadrature_energies(sys, solver.elasticity(), solver.state());
    EXPECT_NEAR(a.kinetic, b.kinetic, 1e-12);
    EXPECT_NEAR(a.elastic, b.elastic, 1e-12);
    EXPECT_NEAR(a.thermal, b.thermal, 1e-12);
}

TEST(Energy, DriftIsFirstOrderWithoutDissipation) {
    // Mechanical energy trades reversibly with theta through the expansion
    // coupling, so the conserved quantity is kinetic + elastic + thermal.
    const GalerkinSystem sys = system1d(40);
    const Material mat = material(1.0, 1.0, FlowRule::linear(0.0));
    auto drift = [&](double dt) {
        InitialData d = zero_data();
        d.u1 = [](const Point& x) { return Eigen::Vector3d(0.1 * std::sin(M_PI * x[0]), 0, 0); };
        const RunSummary sum = run(sys, mat, config(dt, 1.0, d));
        const LedgerRow& first = sum.ledger.initial();
        const LedgerRow& last = sum.ledger.back();
        return std::abs(last.total_energy() - first.total_energy()) / (first.kinetic + first.elastic);
    };
    const double d1 = drift(0.002);
    const double d2 = drift(0.001);
    EXPECT_LT(d2, 0.05);
    EXPECT_GT(d1 / d2, 1.6);
    EXPECT_LT(d1 / d2, 2.4);
}
