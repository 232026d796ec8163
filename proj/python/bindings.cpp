#include <memory>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermovisco/commands.hpp"
#include "thermovisco/config.hpp"
#include "thermovisco/constitutive.hpp"
#include "thermovisco/diagnostics.hpp"
#include "thermovisco/oracle.hpp"
#include "thermovisco/solver.hpp"

namespace py = pybind11;
using namespace thermovisco;

namespace {

// Owns the Galerkin system together with the solver that borrows it.
class Simulation {
public:
    explicit Simulation(const RunConfig& cfg)
        : cfg_(cfg),
          sys_(std::make_unique<GalerkinSystem>(make_system(cfg))),
          solver_(std::make_unique<ThermoViscoSolver>(*sys_, make_material(cfg), make_solver_config(cfg))) {}

    void step() { solver_->step(); }
    void run() { solver_->run(); }

    const SimState& state() const { return solver_->state(); }
    const BalanceLedger& ledger() const { return solver_->ledger(); }
    double truncation_height() const { return solver_->truncation_height(); }

    py::dict verdicts() const {
        VerdictSettings vs;
        vs.c_scheme = cfg_.c_scheme;
        vs.dt = cfg_.dt;
        const RunVerdicts v = evaluate_verdicts(solver_->ledger(), vs);
        py::dict d;
        d["tolerance"] = v.tolerance;
        d["max_energy_residual"] = v.max_energy_residual;
        d["max_entropy_residual"] = v.max_entropy_residual;
        d["min_dissipation_margin"] = v.min_dissipation_margin;
        d["positivity_worst_ratio"] = v.positivity.worst_ratio;
        d["monotonicity_violations"] = v.monotonicity_violations;
        d["energy_bound_excess"] = v.energy_bound_excess;
        d["passed"] = v.passed();
        return d;
    }

    std::string ledger_csv() const {
        std::ostringstream os;
        solver_->ledger().write_csv(os);
        return os.str();
    }

private:
    RunConfig cfg_;
    std::unique_ptr<GalerkinSystem> sys_;
    std::unique_ptr<ThermoViscoSolver> solver_;
};

py::dict admissibility(const std::string& flow, double kappa0, double kappa_min, std::int64_t samples,
                       std::uint64_t seed) {
    RunConfig cfg;
    cfg.flow = flow;
    cfg.kappa0 = kappa0;
    cfg.kappa_min = kappa_min;
    const auto r = verify_admissibility(make_flow_rule(cfg), samples, seed);
    py::dict d;
    d["rule"] = r.rule;
    d["worst_monotonicity"] = r.worst_monotonicity;
    d["worst_dissipation"] = r.worst_dissipation;
    d["max_zero_response"] = r.max_zero_response;
    d["empirical_growth"] = r.empirical_growth;
    d["declared_growth"] = r.declared_growth;
    d["passed"] = r.passed();
    return d;
}

py::dict oracle_run(const RunConfig& cfg) {
    const FDProblem p = make_fd_problem(cfg);
    const FDRunResult r = fd_run(fd_initialize(p), p, cfg.t_end);
    py::dict d;
    d["t"] = r.grid.t;
    d["u"] = r.grid.u;
    d["stress"] = r.grid.stress;
    d["theta"] = r.grid.theta;
    std::ostringstream os;
    r.ledger.write_csv(os);
    d["ledger_csv"] = os.str();
    return d;
}

py::dict oracle_gap(const RunConfig& cfg) {
    const FDProblem p = make_fd_problem(cfg);
    const FDRunResult fd = fd_run(fd_initialize(p), p, cfg.t_end);
    const GalerkinSystem sys = make_system(cfg);
    const RunSummary gal = run(sys, make_material(cfg), make_solver_config(cfg));
    const OracleComparison c = compare_with_oracle(sys, gal.final_state, fd.grid);
    py::dict d;
    d["displacement"] = c.displacement;
    d["stress"] = c.stress;
    d["temperature"] = c.temperature;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Galerkin solver for coupled thermo-visco-elasticity";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);

    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("dim", &RunConfig::dim)
        .def_readwrite("cells", &RunConfig::cells)
        .def_readwrite("extents", &RunConfig::extents)
        .def_readwrite("dt", &RunConfig::dt)
        .def_readwrite("t_end", &RunConfig::t_end)
        .def_readwrite("flow", &RunConfig::flow)
        .def_readwrite("kappa0", &RunConfig::kappa0)
        .def_readwrite("truncation", &RunConfig::truncation)
        .def_readwrite("c_scheme", &RunConfig::c_scheme);

    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", &parse_config_string, py::arg("text"));

    py::class_<SimState>(m, "SimState")
        .def_readonly("step", &SimState::step)
        .def_readonly("t", &SimState::t)
        .def_readonly("u", &SimState::u)
        .def_readonly("v", &SimState::v)
        .def_readonly("stress", &SimState::stress)
        .def_readonly("theta", &SimState::theta);

    py::class_<Simulation>(m, "Simulation")
        .def(py::init<const RunConfig&>(), py::arg("config"))
        .def("step", &Simulation::step)
        .def("run", &Simulation::run)
        .def_property_readonly("state", &Simulation::state, py::return_value_policy::reference_internal)
        .def_property_readonly("truncation_height", &Simulation::truncation_height)
        .def("verdicts", &Simulation::verdicts)
        .def("ledger_csv", &Simulation::ledger_csv);

    m.def("check_admissibility", &admissibility, py::arg("flow"), py::arg("kappa0") = 1.0,
          py::arg("kappa_min") = 0.0, py::arg("samples") = 10000, py::arg("seed") = 1);
    m.def("oracle_run", &oracle_run, py::arg("config"));
    m.def("oracle_gap", &oracle_gap, py::arg("config"));
    m.def("ledger_header", [] { return std::string(BalanceLedger::csv_header()); });
}
