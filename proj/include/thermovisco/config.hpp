#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermovisco/constitutive.hpp"
#include "thermovisco/galerkin.hpp"
#include "thermovisco/oracle.hpp"
#include "thermovisco/solver.hpp"

namespace thermovisco {

/// Invalid or unreadable configuration; the message names the field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parsed INI run configuration.
///
/// Field data are expressions in x, y, z (and t for the forcing). Vector and
/// tensor fields list their components separated by ';' (tensors in the order
/// xx | xx;yy;xy | xx;yy;zz;yz;xz;xy). The presets @zero and @one stand for
/// the zero field and the field with every component equal to one.
struct RunConfig {
    std::string source;  ///< path or "<string>"

    int dim = 1;
    std::vector<double> extents;
    std::vector<int> cells;

    std::optional<int> n_disp_level;  ///< unset = all
    std::optional<int> k_stress_level;

    double lambda = 1.0;
    double mu = 1.0;
    std::string flow = "linear";
    double kappa0 = 1.0;
    double kappa_min = 0.0;
    std::int64_t admissibility_samples = 2000;
    std::uint64_t seed = 1;

    double dt = 0.0;
    double t_end = 0.0;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    std::optional<double> truncation;  ///< unset = auto
    SplittingOrder splitting = SplittingOrder::heat_first;

    std::string u0 = "@zero";
    std::string u1 = "@zero";
    std::string stress0 = "@zero";
    std::string theta0 = "@one";
    std::string f = "@zero";

    std::string output_directory = "output";
    int snapshot_stride = 0;  ///< 0 = final state only
    std::string ledger_file = "ledger.csv";

    double c_scheme = 1.0;
    std::optional<double> oracle_dt;  ///< unset = time.dt
};

RunConfig parse_config(std::istream& in, const std::string& source = "<string>");
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

Mesh make_mesh(const RunConfig& cfg);
GalerkinSystem make_system(const RunConfig& cfg);
FlowRule make_flow_rule(const RunConfig& cfg);
Material make_material(const RunConfig& cfg);
SolverConfig make_solver_config(const RunConfig& cfg);
/// Requires dim == 1.
FDProblem make_fd_problem(const RunConfig& cfg);

/// Flow rule names accepted in material.flow.
const std::vector<std::string>& flow_rule_names();

/// Component samplers from field strings; `field` names the key in messages.
ScalarSampler make_scalar_field(const std::string& text, int dim, const std::string& field);
VectorSampler make_vector_field(const std::string& text, int dim, const std::string& field);
TensorSampler make_tensor_field(const std::string& text, int dim, const std::string& field);
Forcing make_forcing(const std::string& text, int dim, const std::string& field);

}  // namespace thermovisco
