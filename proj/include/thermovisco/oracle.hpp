#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "thermovisco/constitutive.hpp"
#include "thermovisco/diagnostics.hpp"

namespace thermovisco {

/// Scalar flow G(theta, T) of the 1D reduction.
using ScalarFlow = std::function<double(double theta, double stress)>;

/// 1D restriction of a tensor flow rule: G(theta, T e1 x e1) . (e1 x e1).
ScalarFlow scalar_flow(const FlowRule& rule);

/// Reduced problem on [0, length]:
///   u_tt - (T - theta)_x = f,  T_t / c + G(theta, T) = u_tx,
///   theta_t - theta_xx + theta u_tx = G(theta, T) T,
/// u = 0 at both ends, theta_x = 0 at both ends.
struct FDProblem {
    double length = 1.0;
    int nodes = 101;
    double dt = 1e-3;
    double modulus = 1.0;  ///< c
    ScalarFlow flow;       ///< null means G = 0
    /// False drops the theta_x force and the theta u_tx term, leaving a pure
    /// wave / stress system beside a pure heat equation.
    bool coupled = true;
    std::function<double(double x, double t)> forcing;
    std::function<double(double x)> u0;
    std::function<double(double x)> u1;
    std::function<double(double x)> stress0;
    std::function<double(double x)> theta0;
};

/// Staggered grid: u, v, theta at the N nodes; T at the N - 1 cell midpoints.
/// Velocity is also carried half a step ahead for the leapfrog update.
struct FDGrid {
    int nodes = 0;
    double h = 0.0;
    double dt = 0.0;
    int step = 0;
    double t = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd v;       ///< at t
    Eigen::VectorXd v_half;  ///< at t + dt/2
    Eigen::VectorXd stress;
    Eigen::VectorXd theta;
};

/// Throws std::invalid_argument for N < 3, sqrt(c) dt > h, missing theta0 or
/// a non-positive initial temperature.
FDGrid fd_initialize(const FDProblem& problem);

/// One step. Throws std::runtime_error if a temperature comes out <= 0.
FDGrid fd_step(const FDGrid& grid, const FDProblem& problem);

/// Ledger sample of a grid (integrals by the trapezoid / midpoint rule).
BalanceSample fd_sample(const FDGrid& grid, const FDProblem& problem);

using FDObserver = std::function<void(const FDGrid& grid, const BalanceSample& delta)>;

struct FDRunResult {
    FDGrid grid;
    BalanceLedger ledger;
};

FDRunResult fd_run(const FDGrid& start, const FDProblem& problem, double t_end,
                   const std::vector<FDObserver>& observers = {});

/// Piecewise-linear (u, theta) and piecewise-constant (T) readouts.
double fd_displacement(const FDGrid& grid, double x);
double fd_stress(const FDGrid& grid, double x);
double fd_temperature(const FDGrid& grid, double x);

}  // namespace thermovisco
