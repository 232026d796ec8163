#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "thermovisco/constitutive.hpp"
#include "thermovisco/diagnostics.hpp"
#include "thermovisco/galerkin.hpp"

namespace thermovisco {

using Forcing = std::function<Eigen::Vector3d(const Point& p, double t)>;

struct InitialData {
    VectorSampler u0;
    VectorSampler u1;
    TensorSampler stress0;
    ScalarSampler theta0;
};

enum class SplittingOrder { heat_first, mechanics_first };

struct Material {
    ElasticityTensor elasticity;
    FlowRule flow;
};

struct SolverConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    /// Height of the source truncation; unset means 10 E(0) / |domain|.
    std::optional<double> truncation;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    SplittingOrder order = SplittingOrder::heat_first;

    Forcing forcing;  ///< null means f = 0
    InitialData initial;

    /// Run the randomized admissibility check on the flow rule before stepping.
    bool require_admissible = true;
    std::int64_t admissibility_samples = 2000;
    std::uint64_t admissibility_seed = 1;

    double stress_tol = 1e-13;
    int stress_max_iters = 500;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    [[nodiscard]] int step_count() const;
};

struct SimState {
    int step = 0;
    double t = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    Eigen::VectorXd stress;
    Eigen::VectorXd theta;
};

class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, double time, std::vector<double> residual_history = {})
        : std::runtime_error(what), time_(time), history_(std::move(residual_history)) {}
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] const std::vector<double>& residual_history() const { return history_; }

private:
    double time_;
    std::vector<double> history_;
};

class PositivityViolation : public StepFailure {
public:
    using StepFailure::StepFailure;
};

/// Rejects non-positive initial temperatures.
SimState initialize(const GalerkinSystem& sys, const SolverConfig& cfg);

/// Velocity after one momentum substep: M_u (v_new - v_old) / dt = -B^T S + D^T theta + load.
Eigen::VectorXd momentum_substep(const GalerkinSystem& sys, const Eigen::VectorXd& v_old,
                                 const Eigen::VectorXd& theta, const Eigen::VectorXd& stress,
                                 const Eigen::VectorXd& load, double dt);

struct StressSolveOptions {
    double tol = 1e-13;
    int max_iters = 500;
};

/// Per-cell semi-implicit update C^{-1}(S_new - S_old)/dt + G(theta_c, S_new) = strain_rate,
/// restricted to the active stress components of each cell. `strain_rate` holds
/// stress-space coefficients (see strain()); theta_c is the cell-midpoint temperature.
/// Throws StepFailure when the inner iteration stalls.
Eigen::VectorXd stress_substep(const GalerkinSystem& sys, const ElasticityTensor& c, const FlowRule& flow,
                               const Eigen::VectorXd& theta, const Eigen::VectorXd& stress_old,
                               const Eigen::VectorXd& strain_rate, double dt, const StressSolveOptions& opt = {});

/// Per-cell Mandel coordinates of G(theta_c, S_c), laid out like the stress coefficients.
Eigen::VectorXd flow_vector(const GalerkinSystem& sys, const FlowRule& flow, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& stress);

/// Cellwise heat source T_n(G(theta_c, S_c) : S_c).
Eigen::VectorXd heat_source(const GalerkinSystem& sys, const FlowRule& flow, const TruncationLevel& level,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& stress);

/// Implicit heat solve (M + dt K + dt A(w)) theta_new = M theta_old + dt r, where
/// A(w)_ab = int w N_a N_b with w sampled at the 2-point Gauss points (layout of
/// divergence_at_gauss) and r_a = int q N_a with q the cellwise source.
/// Throws PositivityViolation if a dof comes out non-positive.
Eigen::VectorXd heat_substep(const GalerkinSystem& sys, const Eigen::VectorXd& theta_old,
                             const Eigen::VectorXd& div_samples, const Eigen::VectorXd& cell_source, double dt);

struct EnergyTotals {
    double kinetic = 0.0;
    double elastic = 0.0;
    double thermal = 0.0;
    [[nodiscard]] double total() const { return kinetic + elastic + thermal; }
};

/// Energies from the assembled operators.
EnergyTotals energy_totals(const GalerkinSystem& sys, const ElasticityTensor& c, const SimState& s);
/// Same quantities re-integrated pointwise by Gauss quadrature.
EnergyTotals quadrature_energies(const GalerkinSystem& sys, const ElasticityTensor& c, const SimState& s);

struct StepReport {
    int step = 0;
    int picard_iterations = 0;
    std::vector<double> residual_history;
    double source_min = 0.0;
    double source_max = 0.0;
};

using Observer = std::function<void(int step, double t, const SimState& state, const BalanceSample& delta)>;

struct RunSummary {
    SimState final_state;
    BalanceLedger ledger;
    std::vector<StepReport> reports;
    double truncation_height = 0.0;
};

class ThermoViscoSolver {
public:
    /// Validates the config, checks the flow rule (unless disabled) and projects
    /// the initial data.
    ThermoViscoSolver(const GalerkinSystem& sys, Material material, SolverConfig cfg);

    [[nodiscard]] const SimState& state() const { return state_; }
    [[nodiscard]] const BalanceLedger& ledger() const { return ledger_; }
    [[nodiscard]] const GalerkinSystem& system() const { return sys_; }
    [[nodiscard]] const SolverConfig& config() const { return cfg_; }
    [[nodiscard]] const ElasticityTensor& elasticity() const { return material_.elasticity; }
    [[nodiscard]] double truncation_height() const { return truncation_.height(); }
    [[nodiscard]] const std::vector<StepReport>& reports() const { return reports_; }

    void add_observer(Observer obs) { observers_.push_back(std::move(obs)); }

    /// One Picard-coupled time step.
    const StepReport& step();
    /// Steps until t_end.
    RunSummary run();

    /// Ledger sample of the current state (with zero increments).
    [[nodiscard]] BalanceSample sample_state() const;

private:
    const GalerkinSystem& sys_;
    Material material_;
    SolverConfig cfg_;
    TruncationLevel truncation_{1.0};
    SimState state_;
    BalanceLedger ledger_;
    std::vector<StepReport> reports_;
    std::vector<Observer> observers_;
    StressSolveOptions stress_opt_;

    // Mechanics with the stress eliminated: (M/dt + dt B^T A^{-1} Gram^{-1} B) v = ...
    SparseMatrix compliance_inv_;  // block diagonal per cell, active components only
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> mech_solver_;

    void mechanics(const Eigen::VectorXd& theta, const Eigen::VectorXd& stress_iter, const Eigen::VectorXd& load,
                   Eigen::VectorXd& v_out, Eigen::VectorXd& stress_out) const;
};

RunSummary run(const GalerkinSystem& sys, const Material& material, const SolverConfig& cfg,
               const std::vector<Observer>& observers = {});

}  // namespace thermovisco
