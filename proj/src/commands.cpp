#include "thermovisco/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "thermovisco/diagnostics.hpp"
#include "thermovisco/snapshot.hpp"

namespace thermovisco {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string fmt(double v, const char* pattern = "%.6e") {
    char buf[48];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

fs::path output_directory(const RunConfig& cfg) {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    fs::path dir(cfg.output_directory);
    if (dir.is_relative() && cfg.source != "<string>") {
        dir = fs::path(cfg.source).parent_path() / dir;
    }
    return dir;
}

std::string history_text(const std::vector<double>& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) {
        s += (i ? ", " : "") + fmt(h[i], "%.3e");
    }
    return s;
}

Json verdicts_json(const RunVerdicts& v) {
    Json j;
    j["tolerance"] = v.tolerance;
    j["energy_balance"] = {{"max_residual", v.max_energy_residual}, {"passed", v.energy_ok}};
    j["dissipation_inequality"] = {{"min_margin", v.min_dissipation_margin}, {"passed", v.dissipation_ok}};
    j["positivity"] = {{"worst_ratio", v.positivity.worst_ratio},
                       {"worst_time", v.positivity.worst_time},
                       {"passed", v.positivity_ok}};
    j["monotone_accumulators"] = {{"violations", v.monotonicity_violations}, {"passed", v.monotone_ok}};
    j["energy_bound"] = {{"excess", v.energy_bound_excess}, {"passed", v.bounded_ok}};
    j["entropy_balance"] = {{"max_residual", v.max_entropy_residual}};
    return j;
}

// Coarse field readouts usable as samplers on another mesh.
VectorSampler disp_sampler(const GalerkinSystem& sys, const Eigen::VectorXd& u) {
    return [&sys, f = FieldCoefficients{Space::displacement, u}](const Point& p) {
        return eval_displacement(sys, f, p);
    };
}
TensorSampler stress_sampler(const GalerkinSystem& sys, const Eigen::VectorXd& s) {
    return [&sys, f = FieldCoefficients{Space::stress, s}](const Point& p) { return eval_stress(sys, f, p); };
}
ScalarSampler temp_sampler(const GalerkinSystem& sys, const Eigen::VectorXd& th) {
    return [&sys, f = FieldCoefficients{Space::temperature, th}](const Point& p) {
        return eval_temperature(sys, f, p);
    };
}

RunConfig level_config(const RunConfig& base, const Level& level) {
    RunConfig c = base;
    c.cells.assign(static_cast<std::size_t>(base.dim), level.cells);
    c.n_disp_level = level.n_disp;
    c.k_stress_level = level.k_stress;
    c.dt = level.dt;
    return c;
}

}  // namespace

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::optional<GalerkinSystem> sys;
    std::optional<ThermoViscoSolver> solver;
    try {
        cfg = load_config(config_path);
        sys.emplace(make_system(cfg));
        solver.emplace(*sys, make_material(cfg), make_solver_config(cfg));
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    const fs::path dir = output_directory(cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
        return kExitFailure;
    }
    std::ofstream ledger_out(dir / cfg.ledger_file);
    if (!ledger_out) {
        err << "error: cannot write " << (dir / cfg.ledger_file) << '\n';
        return kExitFailure;
    }
    ledger_out << BalanceLedger::csv_header() << '\n';
    BalanceLedger::write_csv_row(ledger_out, solver->ledger().back());

    const int stride = cfg.snapshot_stride;
    auto snapshot_name = [](int step) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "snapshot_%06d.txt", step);
        return std::string(buf);
    };
    if (stride > 0) {
        write_snapshot_file((dir / snapshot_name(0)).string(), *sys, solver->state());
    }
    ThermoViscoSolver& s = *solver;
    s.add_observer([&](int step, double, const SimState& state, const BalanceSample&) {
        BalanceLedger::write_csv_row(ledger_out, s.ledger().back());
        if (stride > 0 && step % stride == 0) {
            write_snapshot_file((dir / snapshot_name(step)).string(), *sys, state);
        }
    });

    Json summary;
    summary["config"] = config_path;
    summary["dim"] = cfg.dim;
    summary["dt"] = cfg.dt;
    summary["t_end"] = cfg.t_end;
    summary["truncation_height"] = s.truncation_height();

    int status = kExitPass;
    try {
        s.run();
    } catch (const StepFailure& e) {
        err << "runtime error at t = " << e.time() << ": " << e.what() << '\n';
        if (!e.residual_history().empty()) {
            err << "Picard residual history: " << history_text(e.residual_history()) << '\n';
        }
        summary["status"] = "failed";
        summary["error"] = e.what();
        summary["failed_at"] = e.time();
        status = kExitFailure;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        summary["status"] = "failed";
        summary["error"] = e.what();
        status = kExitFailure;
    }
    ledger_out.flush();

    write_snapshot_file((dir / "final_state.txt").string(), *sys, s.state());

    double src_min = 0.0;
    double src_max = 0.0;
    int max_picard = 0;
    for (const auto& r : s.reports()) {
        src_min = std::min(src_min, r.source_min);
        src_max = std::max(src_max, r.source_max);
        max_picard = std::max(max_picard, r.picard_iterations);
    }
    const bool source_ok = src_min >= 0.0 && src_max <= s.truncation_height();

    VerdictSettings vs;
    vs.c_scheme = cfg.c_scheme;
    vs.dt = cfg.dt;
    const RunVerdicts v = evaluate_verdicts(s.ledger(), vs);
    const bool passed = status == kExitPass && v.passed() && source_ok;

    summary["steps"] = s.state().step;
    summary["final_time"] = s.state().t;
    summary["max_picard_iterations"] = max_picard;
    summary["source_range"] = {{"min", src_min}, {"max", src_max}, {"passed", source_ok}};
    summary["verdicts"] = verdicts_json(v);
    if (!summary.contains("status")) {
        summary["status"] = passed ? "passed" : "failed";
    }
    summary["passed"] = passed;
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

    out << "steps " << s.state().step << ", t = " << fmt(s.state().t, "%.6g") << ", output in " << dir.string()
        << '\n';
    out << "  energy residual (max)      " << fmt(v.max_energy_residual) << "  tol " << fmt(v.tolerance)
        << (v.energy_ok ? "  ok" : "  FAIL") << '\n';
    out << "  dissipation margin (min)   " << fmt(v.min_dissipation_margin) << (v.dissipation_ok ? "  ok" : "  FAIL")
        << '\n';
    out << "  positivity ratio (worst)   " << fmt(v.positivity.worst_ratio) << (v.positivity_ok ? "  ok" : "  FAIL")
        << '\n';
    out << "  accumulators monotone      " << (v.monotone_ok ? "yes  ok" : "no  FAIL") << '\n';
    out << "  energy bound excess        " << fmt(v.energy_bound_excess) << (v.bounded_ok ? "  ok" : "  FAIL") << '\n';
    out << "  heat source range          [" << fmt(src_min) << ", " << fmt(src_max) << "]"
        << (source_ok ? "  ok" : "  FAIL") << '\n';
    out << (passed ? "PASS" : "FAIL") << '\n';
    return passed ? kExitPass : kExitFailure;
}

int cmd_check_constitutive(const std::string& config_path, std::optional<std::int64_t> samples,
                           std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
    FlowRule rule = FlowRule::linear(0.0);
    std::int64_t n = 10000;
    std::uint64_t s = 1;
    try {
        const RunConfig cfg = load_config(config_path);
        rule = make_flow_rule(cfg);
        n = samples.value_or(10000);
        s = seed.value_or(cfg.seed);
        if (n < 1) {
            throw ConfigError("--samples: must be >= 1");
        }
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const AdmissibilityReport r = verify_admissibility(rule, n, s);
    auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
    out << "flow rule " << r.rule << ", " << r.samples << " samples, seed " << r.seed << '\n';
    out << "  monotonicity  min (G(a)-G(b)):(a-b) = " << fmt(r.worst_monotonicity) << "  " << flag(r.monotone)
        << '\n';
    if (!r.monotone) {
        out << "    witness theta = " << r.witness_theta << '\n';
    }
    out << "  dissipation   min G(a):a            = " << fmt(r.worst_dissipation) << "  " << flag(r.dissipative)
        << '\n';
    out << "  zero stress   max |G(theta, 0)|     = " << fmt(r.max_zero_response) << "  "
        << flag(r.vanishes_at_zero) << '\n';
    out << "  growth        empirical " << fmt(r.empirical_growth) << " declared " << fmt(r.declared_growth) << "  "
        << flag(r.bounded_growth) << '\n';
    out << (r.passed() ? "PASS" : "FAIL") << '\n';
    return r.passed() ? kExitPass : kExitFailure;
}

std::vector<Level> parse_levels(const std::string& text, int dim) {
    (void)dim;
    std::vector<Level> levels;
    std::stringstream ss(text);
    std::string item;
    int index = 0;
    while (std::getline(ss, item, ';')) {
        ++index;
        const std::string where = "--levels entry " + std::to_string(index);
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ',')) {
            const auto b = p.find_first_not_of(" \t");
            const auto e = p.find_last_not_of(" \t");
            parts.push_back(b == std::string::npos ? "" : p.substr(b, e - b + 1));
        }
        if (parts.size() != 4) {
            throw ConfigError(where + ": expected cells,n,k,dt");
        }
        Level lv;
        try {
            std::size_t used = 0;
            lv.cells = std::stoi(parts[0], &used);
            if (used != parts[0].size() || lv.cells < 2) {
                throw ConfigError(where + ": cells must be an integer >= 2");
            }
            for (int i : {1, 2}) {
                auto& slot = i == 1 ? lv.n_disp : lv.k_stress;
                const auto& text = parts[static_cast<std::size_t>(i)];
                if (text != "all") {
                    const int v = std::stoi(text, &used);
                    if (used != text.size() || v < 1) {
                        throw ConfigError(where + ": levels must be integers >= 1 or 'all'");
                    }
                    slot = v;
                }
            }
            lv.dt = std::stod(parts[3], &used);
            if (used != parts[3].size() || !(lv.dt > 0.0)) {
                throw ConfigError(where + ": dt must be > 0");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(where + ": malformed entry '" + item + "'");
        }
        levels.push_back(lv);
    }
    if (levels.size() < 2) {
        throw ConfigError("--levels: need at least two levels");
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const Level& a = levels[i - 1];
        const Level& b = levels[i];
        const bool n_ok = !a.n_disp || !b.n_disp || *b.n_disp >= *a.n_disp;
        const bool n_all_ok = !(!a.n_disp && b.n_disp && b.cells <= a.cells);
        const bool k_ok = !a.k_stress || !b.k_stress || *b.k_stress >= *a.k_stress;
        const bool k_all_ok = !(!a.k_stress && b.k_stress && b.cells <= a.cells);
        if (b.cells < a.cells || b.dt > a.dt || !n_ok || !k_ok || !n_all_ok || !k_all_ok) {
            throw ConfigError("--levels: must be ordered coarse to fine; entry " + std::to_string(i + 1) +
                              " is coarser than entry " + std::to_string(i));
        }
    }
    return levels;
}

double LevelDifference::combined() const {
    return std::sqrt(displacement * displacement + stress * stress + temperature * temperature);
}

LevelDifference level_difference(const GalerkinSystem& coarse, const SimState& coarse_state,
                                 const GalerkinSystem& fine, const SimState& fine_state) {
    LevelDifference d;
    d.displacement = l2_distance(fine, FieldCoefficients{Space::displacement, fine_state.u},
                                 disp_sampler(coarse, coarse_state.u));
    d.stress = l2_distance(fine, FieldCoefficients{Space::stress, fine_state.stress},
                           stress_sampler(coarse, coarse_state.stress));
    d.temperature = l2_distance(fine, FieldCoefficients{Space::temperature, fine_state.theta},
                                temp_sampler(coarse, coarse_state.theta));
    return d;
}

ConvergenceReport convergence_study(const RunConfig& base, const std::vector<Level>& levels) {
    struct Outcome {
        GalerkinSystem sys;
        RunSummary run;
    };
    std::vector<RunConfig> configs;
    for (const auto& lv : levels) {
        configs.push_back(level_config(base, lv));
        const double steps = base.t_end / lv.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
            throw ConfigError("--levels: t_end must be a multiple of every level's dt");
        }
    }
    std::vector<std::future<std::unique_ptr<Outcome>>> jobs;
    for (const auto& c : configs) {
        jobs.push_back(std::async(std::launch::async, [c]() {
            auto o = std::make_unique<Outcome>(Outcome{make_system(c), {}});
            o->run = run(o->sys, make_material(c), make_solver_config(c));
            return o;
        }));
    }
    std::vector<std::unique_ptr<Outcome>> results;
    for (auto& j : jobs) {
        results.push_back(j.get());
    }

    ConvergenceReport rep;
    rep.levels = levels;
    for (const auto& r : results) {
        rep.energy_residuals.push_back(r->run.ledger.back().energy_residual);
    }
    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
        rep.differences.push_back(level_difference(results[i]->sys, results[i]->run.final_state,
                                                   results[i + 1]->sys, results[i + 1]->run.final_state));
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.differences.size(); ++i) {
        const double prev = rep.differences[i - 1].combined();
        const double cur = rep.differences[i].combined();
        if (!(cur < prev || (cur == 0.0 && prev == 0.0))) {
            rep.decreasing = false;
        }
    }
    return rep;
}

int cmd_convergence(const std::string& config_path, const std::string& levels_text, std::ostream& out,
                    std::ostream& err) {
    RunConfig cfg;
    std::vector<Level> levels;
    try {
        cfg = load_config(config_path);
        levels = parse_levels(levels_text, cfg.dim);
        for (const auto& lv : levels) {
            make_system(level_config(cfg, lv));
        }
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    ConvergenceReport rep;
    try {
        rep = convergence_study(cfg, levels);
    } catch (const StepFailure& e) {
        err << "runtime error at t = " << e.time() << ": " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitFailure;
    }

    out << "level  cells  n_disp  k_stress  dt            energy_residual\n";
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        const Level& lv = rep.levels[i];
        char line[160];
        std::snprintf(line, sizeof line, "%-6zu %-6d %-7s %-9s %-13.6g %.6e\n", i + 1, lv.cells,
                      lv.n_disp ? std::to_string(*lv.n_disp).c_str() : "all",
                      lv.k_stress ? std::to_string(*lv.k_stress).c_str() : "all", lv.dt, rep.energy_residuals[i]);
        out << line;
    }
    out << "pair   |du|          |dT|          |dtheta|      combined\n";
    for (std::size_t i = 0; i < rep.differences.size(); ++i) {
        const auto& d = rep.differences[i];
        char line[160];
        std::snprintf(line, sizeof line, "%zu-%-4zu %.6e  %.6e  %.6e  %.6e\n", i + 1, i + 2, d.displacement, d.stress,
                      d.temperature, d.combined());
        out << line;
    }
    out << (rep.decreasing ? "PASS: differences decrease" : "FAIL: differences do not decrease") << '\n';
    return rep.decreasing ? kExitPass : kExitFailure;
}

OracleComparison compare_with_oracle(const GalerkinSystem& sys, const SimState& state, const FDGrid& grid) {
    const VectorSampler fu = [&grid](const Point& p) { return Eigen::Vector3d(fd_displacement(grid, p[0]), 0.0, 0.0); };
    const TensorSampler fs = [&grid](const Point& p) { return SymTensor::diag(fd_stress(grid, p[0]), 0.0, 0.0); };
    const ScalarSampler ft = [&grid](const Point& p) { return fd_temperature(grid, p[0]); };

    auto rel = [](double diff, double norm) { return norm > 0.0 ? diff / norm : diff; };
    OracleComparison c;
    c.displacement = rel(l2_distance(sys, FieldCoefficients{Space::displacement, state.u}, fu),
                         l2_distance(sys, sys.zero_field(Space::displacement), fu));
    c.stress = rel(l2_distance(sys, FieldCoefficients{Space::stress, state.stress}, fs),
                   l2_distance(sys, sys.zero_field(Space::stress), fs));
    c.temperature = rel(l2_distance(sys, FieldCoefficients{Space::temperature, state.theta}, ft),
                        l2_distance(sys, sys.zero_field(Space::temperature), ft));
    return c;
}

int cmd_oracle(const std::string& config_path, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    FDProblem problem;
    FDGrid start;
    try {
        cfg = load_config(config_path);
        problem = make_fd_problem(cfg);
        start = fd_initialize(problem);
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    FDRunResult fd;
    RunSummary gal;
    std::optional<GalerkinSystem> sys;
    try {
        fd = fd_run(start, problem, cfg.t_end);
        sys.emplace(make_system(cfg));
        gal = run(*sys, make_material(cfg), make_solver_config(cfg));
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const StepFailure& e) {
        err << "runtime error at t = " << e.time() << ": " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitFailure;
    }

    const fs::path dir = output_directory(cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
        return kExitFailure;
    }
    std::ofstream csv(dir / "oracle_ledger.csv");
    fd.ledger.write_csv(csv);

    const OracleComparison c = compare_with_oracle(*sys, gal.final_state, fd.grid);
    const auto history = positivity_history(fd.ledger);
    const PositivityVerdict pos = positivity_bound_check(history);
    const bool monotone = fd.ledger.monotonicity_violations() == 0;
    const bool passed = monotone && pos.passed;

    Json summary;
    summary["config"] = config_path;
    summary["nodes"] = problem.nodes;
    summary["dt"] = problem.dt;
    summary["t_end"] = cfg.t_end;
    summary["relative_l2"] = {{"displacement", c.displacement}, {"stress", c.stress}, {"temperature", c.temperature}};
    summary["positivity_worst_ratio"] = pos.worst_ratio;
    summary["monotone_accumulators"] = monotone;
    summary["passed"] = passed;
    std::ofstream(dir / "oracle_summary.json") << summary.dump(2) << '\n';

    out << "oracle: " << problem.nodes << " nodes, dt = " << fmt(problem.dt, "%.6g") << ", t = " << fmt(fd.grid.t, "%.6g")
        << '\n';
    out << "  relative L2 gap to Galerkin  u " << fmt(c.displacement) << "  T " << fmt(c.stress) << "  theta "
        << fmt(c.temperature) << '\n';
    out << "  positivity ratio (worst)     " << fmt(pos.worst_ratio) << (pos.passed ? "  ok" : "  FAIL") << '\n';
    out << "  accumulators monotone        " << (monotone ? "yes  ok" : "no  FAIL") << '\n';
    out << (passed ? "PASS" : "FAIL") << '\n';
    return passed ? kExitPass : kExitFailure;
}

}  // namespace thermovisco
