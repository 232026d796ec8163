#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermovisco/config.hpp"
#include "thermovisco/galerkin.hpp"
#include "thermovisco/oracle.hpp"
#include "thermovisco/solver.hpp"

namespace thermovisco {

/// Exit codes of every command.
enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitConfigError = 2 };

/// Environment variable overriding output.directory.
inline constexpr const char* kOutputDirEnv = "THERMOVISCO_OUTPUT_DIR";

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_check_constitutive(const std::string& config_path, std::optional<std::int64_t> samples,
                           std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);
int cmd_convergence(const std::string& config_path, const std::string& levels, std::ostream& out,
                    std::ostream& err);
int cmd_oracle(const std::string& config_path, std::ostream& out, std::ostream& err);

/// One refinement level: cells per axis, displacement and stress levels
/// (unset = all) and time step.
struct Level {
    int cells = 0;
    std::optional<int> n_disp;
    std::optional<int> k_stress;
    double dt = 0.0;
};

/// Parses "cells,n,k,dt;cells,n,k,dt;..."; n and k may be "all".
/// Throws ConfigError on malformed input or levels not ordered coarse to fine.
std::vector<Level> parse_levels(const std::string& text, int dim);

struct LevelDifference {
    double displacement = 0.0;
    double stress = 0.0;
    double temperature = 0.0;
    [[nodiscard]] double combined() const;
};

struct ConvergenceReport {
    std::vector<Level> levels;
    std::vector<double> energy_residuals;  ///< at t_end, per level
    std::vector<LevelDifference> differences;  ///< level i vs level i + 1
    bool decreasing = false;
};

/// Runs every level (in parallel) and compares consecutive final states on the
/// finer mesh. Propagates solver errors.
ConvergenceReport convergence_study(const RunConfig& base, const std::vector<Level>& levels);

/// L2 difference between a final state on `coarse` and one on `fine`, the
/// coarse fields evaluated pointwise on the fine quadrature.
LevelDifference level_difference(const GalerkinSystem& coarse, const SimState& coarse_state,
                                 const GalerkinSystem& fine, const SimState& fine_state);

struct OracleComparison {
    double displacement = 0.0;  ///< relative L2 differences
    double stress = 0.0;
    double temperature = 0.0;
};

/// Relative L2 gap between a 1D Galerkin state and an oracle grid at the same time.
OracleComparison compare_with_oracle(const GalerkinSystem& sys, const SimState& state, const FDGrid& grid);

}  // namespace thermovisco
