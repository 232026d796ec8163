#include "thermovisco/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseLU>

namespace thermovisco {

namespace {

// Compliance C^{-1} in Mandel coordinates of the d x d symmetric block.
Eigen::MatrixXd compliance_matrix(const ElasticityTensor& c, int dim) {
    const int nc = sym_components(dim);
    Eigen::MatrixXd a(nc, nc);
    std::vector<double> e(static_cast<std::size_t>(nc), 0.0);
    for (int j = 0; j < nc; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        a.col(j) = to_mandel(c.inverse_apply(from_mandel(e, dim)), dim);
    }
    return a;
}

SymTensor cell_tensor(const Eigen::VectorXd& stress, int base, int active, int dim) {
    std::array<double, 6> m{};
    for (int j = 0; j < active; ++j) {
        m[static_cast<std::size_t>(j)] = stress[base + j];
    }
    return from_mandel(std::span<const double>(m.data(), static_cast<std::size_t>(sym_components(dim))), dim);
}

// Relative change, floored at `floor` so round-off sized fields do not stall the loop.
double relative_change(const Eigen::VectorXd& next, const Eigen::VectorXd& prev, double floor) {
    if (next.size() == 0) {
        return 0.0;
    }
    const double scale = std::max(next.lpNorm<Eigen::Infinity>(), floor);
    return (next - prev).lpNorm<Eigen::Infinity>() / scale;
}

std::string history_text(const std::vector<double>& h) {
    std::ostringstream os;
    os.precision(3);
    for (std::size_t i = 0; i < h.size(); ++i) {
        os << (i ? ", " : "") << std::scientific << h[i];
    }
    return os.str();
}

}  // namespace

void SolverConfig::validate() const {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("time.dt must be > 0");
    }
    if (!(t_end >= dt)) {
        throw std::invalid_argument("time.t_end must be >= time.dt");
    }
    if (!(picard_tol > 0.0)) {
        throw std::invalid_argument("time.picard_tol must be > 0");
    }
    if (picard_max_iters < 1) {
        throw std::invalid_argument("time.picard_max_iters must be >= 1");
    }
    if (truncation && !(*truncation > 0.0)) {
        throw std::invalid_argument("time.truncation must be > 0 or auto");
    }
    if (!initial.theta0) {
        throw std::invalid_argument("data.theta0 is required");
    }
    const double n = t_end / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
        throw std::invalid_argument("time.t_end must be an integer multiple of time.dt");
    }
}

int SolverConfig::step_count() const { return static_cast<int>(std::llround(t_end / dt)); }

SimState initialize(const GalerkinSystem& sys, const SolverConfig& cfg) {
    if (!cfg.initial.theta0) {
        throw std::invalid_argument("initial temperature sampler missing");
    }
    SimState s;
    s.u = cfg.initial.u0 ? project_displacement(sys, cfg.initial.u0).values
                         : Eigen::VectorXd::Zero(sys.n_disp());
    s.v = cfg.initial.u1 ? project_displacement(sys, cfg.initial.u1).values
                         : Eigen::VectorXd::Zero(sys.n_disp());
    s.stress = cfg.initial.stress0 ? project_stress(sys, cfg.initial.stress0).values
                                   : Eigen::VectorXd::Zero(sys.k_stress());
    s.theta = interpolate_temperature(sys, cfg.initial.theta0).values;
    Eigen::Index at = 0;
    const double tmin = s.theta.minCoeff(&at);
    if (!(tmin > 0.0)) {
        std::ostringstream os;
        os << "initial temperature must be strictly positive; got " << tmin << " at node " << at;
        throw std::invalid_argument(os.str());
    }
    return s;
}

Eigen::VectorXd momentum_substep(const GalerkinSystem& sys, const Eigen::VectorXd& v_old,
                                 const Eigen::VectorXd& theta, const Eigen::VectorXd& stress,
                                 const Eigen::VectorXd& load, double dt) {
    Eigen::VectorXd rhs = sys.div_coupling().transpose() * theta - sys.strain_operator().transpose() * stress;
    if (load.size() > 0) {
        rhs += load;
    }
    return v_old + dt * sys.solve_disp_mass(rhs);
}

Eigen::VectorXd stress_substep(const GalerkinSystem& sys, const ElasticityTensor& c, const FlowRule& flow,
                               const Eigen::VectorXd& theta, const Eigen::VectorXd& stress_old,
                               const Eigen::VectorXd& strain_rate, double dt, const StressSolveOptions& opt) {
    const int dim = sys.dim();
    const int nc = sys.stress_components();
    const Eigen::MatrixXd a = compliance_matrix(c.with_dim(dim), dim);
    std::vector<Eigen::MatrixXd> a_inv(static_cast<std::size_t>(nc + 1));
    for (int m = 1; m <= nc; ++m) {
        a_inv[static_cast<std::size_t>(m)] = a.topLeftCorner(m, m).inverse();
    }

    Eigen::VectorXd out = stress_old;
    const int cells = sys.mesh().cell_count();
    for (int cell = 0; cell < cells; ++cell) {
        const int m = sys.active_stress_in_cell(cell);
        if (m == 0) {
            continue;
        }
        const int base = cell * nc;
        const double th = temperature_at_center(sys, theta, cell);
        const Eigen::MatrixXd& ainv = a_inv[static_cast<std::size_t>(m)];
        const Eigen::VectorXd s_old = stress_old.segment(base, m);
        const Eigen::VectorXd e = strain_rate.segment(base, m);

        auto map = [&](const Eigen::VectorXd& s) {
            std::array<double, 6> buf{};
            for (int j = 0; j < m; ++j) {
                buf[static_cast<std::size_t>(j)] = s[j];
            }
            const SymTensor t = from_mandel(std::span<const double>(buf.data(), static_cast<std::size_t>(nc)), dim);
            const Eigen::VectorXd g = to_mandel(flow.eval(th, t), dim).head(m);
            return Eigen::VectorXd(s_old + dt * ainv * (e - g));
        };

        Eigen::VectorXd s = s_old;
        Eigen::VectorXd phi = map(s);
        double res = (phi - s).norm();
        double omega = 1.0;
        int it = 0;
        while (res > opt.tol * std::max(1.0, s.norm())) {
            if (++it > opt.max_iters || omega < 1e-8) {
                std::ostringstream os;
                os << "stress update did not converge in cell " << cell << " (residual " << res
                   << "); try a smaller dt";
                throw StepFailure(os.str(), 0.0);
            }
            const Eigen::VectorXd trial = s + omega * (phi - s);
            const Eigen::VectorXd phi_trial = map(trial);
            const double res_trial = (phi_trial - trial).norm();
            if (res_trial > res) {
                omega *= 0.5;
                continue;
            }
            s = trial;
            phi = phi_trial;
            res = res_trial;
        }
        out.segment(base, m) = s;
    }
    return out;
}

Eigen::VectorXd flow_vector(const GalerkinSystem& sys, const FlowRule& flow, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& stress) {
    const int nc = sys.stress_components();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(stress.size());
    if (flow.is_zero()) {
        return g;
    }
    for (int cell = 0; cell < sys.mesh().cell_count(); ++cell) {
        const int m = sys.active_stress_in_cell(cell);
        if (m == 0) {
            continue;
        }
        const SymTensor t = cell_tensor(stress, cell * nc, m, sys.dim());
        g.segment(cell * nc, m) = to_mandel(flow.eval(temperature_at_center(sys, theta, cell), t), sys.dim()).head(m);
    }
    return g;
}

Eigen::VectorXd heat_source(const GalerkinSystem& sys, const FlowRule& flow, const TruncationLevel& level,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& stress) {
    const int cells = sys.mesh().cell_count();
    const int nc = sys.stress_components();
    Eigen::VectorXd q = Eigen::VectorXd::Zero(cells);
    if (flow.is_zero()) {
        return q;
    }
    for (int cell = 0; cell < cells; ++cell) {
        const int m = sys.active_stress_in_cell(cell);
        if (m == 0) {
            continue;
        }
        const SymTensor t = cell_tensor(stress, cell * nc, m, sys.dim());
        q[cell] = truncate(level, dissipation(flow, temperature_at_center(sys, theta, cell), t));
    }
    return q;
}

Eigen::VectorXd heat_substep(const GalerkinSystem& sys, const Eigen::VectorXd& theta_old,
                             const Eigen::VectorXd& div_samples, const Eigen::VectorXd& cell_source, double dt) {
    const Mesh& mesh = sys.mesh();
    const int corners = mesh.corners_per_cell();
    const auto rule = gauss_rule(sys.dim(), 2);
    const int nq = static_cast<int>(rule.size());

    SparseMatrix lhs = sys.temp_mass() + dt * sys.temp_stiffness();
    if (div_samples.size() > 0 && div_samples.lpNorm<Eigen::Infinity>() > 0.0) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(mesh.cell_count() * corners * corners));
        for (int cell = 0; cell < mesh.cell_count(); ++cell) {
            const double vol = mesh.cell_volume(cell);
            const auto& conn = mesh.cell_nodes[static_cast<std::size_t>(cell)];
            for (int a = 0; a < corners; ++a) {
                for (int b = 0; b < corners; ++b) {
                    double v = 0.0;
                    for (int q = 0; q < nq; ++q) {
                        const auto& qp = rule[static_cast<std::size_t>(q)];
                        v += qp.weight * div_samples[cell * nq + q] * shape_value(sys.dim(), a, qp.local) *
                             shape_value(sys.dim(), b, qp.local);
                    }
                    trip.emplace_back(conn[static_cast<std::size_t>(a)], conn[static_cast<std::size_t>(b)],
                                      dt * vol * v);
                }
            }
        }
        SparseMatrix adv(sys.n_temp(), sys.n_temp());
        adv.setFromTriplets(trip.begin(), trip.end());
        lhs += adv;
    }

    Eigen::VectorXd rhs = sys.temp_mass() * theta_old;
    if (cell_source.size() > 0) {
        for (int cell = 0; cell < mesh.cell_count(); ++cell) {
            const double share = dt * cell_source[cell] * mesh.cell_volume(cell) / corners;
            if (share == 0.0) {
                continue;
            }
            const auto& conn = mesh.cell_nodes[static_cast<std::size_t>(cell)];
            for (int a = 0; a < corners; ++a) {
                rhs[conn[static_cast<std::size_t>(a)]] += share;
            }
        }
    }

    lhs.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(lhs);
    if (lu.info() != Eigen::Success) {
        throw StepFailure("heat system factorization failed", 0.0);
    }
    Eigen::VectorXd theta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !theta.allFinite()) {
        throw StepFailure("heat solve failed", 0.0);
    }
    Eigen::Index at = 0;
    const double tmin = theta.minCoeff(&at);
    if (!(tmin > 0.0)) {
        std::ostringstream os;
        os << "temperature lost positivity: theta = " << tmin << " at node " << at;
        throw PositivityViolation(os.str(), 0.0);
    }
    return theta;
}

EnergyTotals energy_totals(const GalerkinSystem& sys, const ElasticityTensor& c, const SimState& s) {
    EnergyTotals e;
    e.kinetic = 0.5 * s.v.dot(sys.disp_mass() * s.v);
    const int nc = sys.stress_components();
    const Eigen::MatrixXd a = compliance_matrix(c.with_dim(sys.dim()), sys.dim());
    for (int cell = 0; cell < sys.mesh().cell_count(); ++cell) {
        const int m = sys.active_stress_in_cell(cell);
        if (m == 0) {
            continue;
        }
        const auto seg = s.stress.segment(cell * nc, m);
        e.elastic += 0.5 * sys.mesh().cell_volume(cell) * seg.dot(a.topLeftCorner(m, m) * seg);
    }
    e.thermal = sys.temp_weights().dot(s.theta);
    return e;
}

EnergyTotals quadrature_energies(const GalerkinSystem& sys, const ElasticityTensor& c, const SimState& s) {
    const Mesh& mesh = sys.mesh();
    const ElasticityTensor cd = c.with_dim(sys.dim());
    const FieldCoefficients v{Space::displacement, s.v};
    const FieldCoefficients th{Space::temperature, s.theta};
    const auto rule = gauss_rule(sys.dim(), 3);
    EnergyTotals e;
    for (int cell = 0; cell < mesh.cell_count(); ++cell) {
        const Point o = mesh.cell_origin(cell);
        const double vol = mesh.cell_volume(cell);
        const int nc = sys.stress_components();
        const SymTensor t = cell_tensor(s.stress, cell * nc, sys.active_stress_in_cell(cell), sys.dim());
        e.elastic += 0.5 * vol * cd.inverse_apply(t).dot(t);
        for (const auto& qp : rule) {
            Point p = o;
            for (int a = 0; a < sys.dim(); ++a) {
                p[static_cast<std::size_t>(a)] += qp.local[static_cast<std::size_t>(a)] * mesh.spacing(a);
            }
            const double w = qp.weight * vol;
            e.kinetic += 0.5 * w * eval_displacement(sys, v, p).squaredNorm();
            e.thermal += w * eval_temperature(sys, th, p);
        }
    }
    return e;
}

ThermoViscoSolver::ThermoViscoSolver(const GalerkinSystem& sys, Material material, SolverConfig cfg)
    : sys_(sys), material_(std::move(material)), cfg_(std::move(cfg)) {
    cfg_.validate();
    material_.elasticity = material_.elasticity.with_dim(sys_.dim());
    if (cfg_.require_admissible && !material_.flow.is_zero()) {
        const auto report =
            verify_admissibility(material_.flow, cfg_.admissibility_samples, cfg_.admissibility_seed);
        if (!report.passed()) {
            throw std::domain_error("flow rule '" + material_.flow.name() + "' is not admissible");
        }
    }
    stress_opt_.tol = cfg_.stress_tol;
    stress_opt_.max_iters = cfg_.stress_max_iters;
    state_ = initialize(sys_, cfg_);

    const int nc = sys_.stress_components();
    const Eigen::MatrixXd a = compliance_matrix(material_.elasticity, sys_.dim());
    std::vector<Eigen::Triplet<double>> trip;
    for (int cell = 0; cell < sys_.mesh().cell_count(); ++cell) {
        const int m = sys_.active_stress_in_cell(cell);
        if (m == 0) {
            continue;
        }
        const Eigen::MatrixXd inv = a.topLeftCorner(m, m).inverse();
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                trip.emplace_back(cell * nc + i, cell * nc + j, inv(i, j));
            }
        }
    }
    compliance_inv_.resize(sys_.k_stress(), sys_.k_stress());
    compliance_inv_.setFromTriplets(trip.begin(), trip.end());
    const Eigen::VectorXd inv_gram = sys_.stress_gram().cwiseInverse();
    const SparseMatrix& b = sys_.strain_operator();
    SparseMatrix mech = sys_.disp_mass() / cfg_.dt +
                        cfg_.dt * SparseMatrix(b.transpose() * compliance_inv_ * inv_gram.asDiagonal() * b);
    auto solver = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(mech);
    if (solver->info() != Eigen::Success) {
        throw std::runtime_error("mechanics system factorization failed");
    }
    mech_solver_ = std::move(solver);
    if (cfg_.truncation) {
        truncation_ = TruncationLevel(*cfg_.truncation);
    } else {
        const double e0 = energy_totals(sys_, material_.elasticity, state_).total();
        truncation_ = TruncationLevel(10.0 * e0 / sys_.mesh().domain_volume());
    }
    ledger_.append(sample_state());
}

BalanceSample ThermoViscoSolver::sample_state() const {
    const EnergyTotals e = energy_totals(sys_, material_.elasticity, state_);
    BalanceSample s;
    s.step = state_.step;
    s.t = state_.t;
    s.kinetic = e.kinetic;
    s.elastic = e.elastic;
    s.thermal = e.thermal;
    s.entropy = sys_.temp_weights().dot(state_.theta.array().log().matrix());
    s.integral_div_u = divergence_integral(sys_, state_.u);
    s.theta_min = state_.theta.minCoeff();
    s.div_v_sup = divergence_sup(sys_, state_.v);
    return s;
}

const StepReport& ThermoViscoSolver::step() {
    const double dt = cfg_.dt;
    const int next_step = state_.step + 1;
    const double t_next = next_step * dt;
    const FlowRule& flow = material_.flow;

    Eigen::VectorXd load;
    if (cfg_.forcing) {
        load = displacement_load(sys_, [&](const Point& p) { return cfg_.forcing(p, t_next); });
    }

    StepReport report;
    report.step = next_step;
    report.source_min = std::numeric_limits<double>::infinity();
    report.source_max = -std::numeric_limits<double>::infinity();

    Eigen::VectorXd theta = state_.theta;
    Eigen::VectorXd v = state_.v;
    Eigen::VectorXd stress = state_.stress;
    Eigen::VectorXd source;

    auto heat = [&](const Eigen::VectorXd& th, const Eigen::VectorXd& vel, const Eigen::VectorXd& s) {
        source = heat_source(sys_, flow, truncation_, th, s);
        if (source.size() > 0) {
            report.source_min = std::min(report.source_min, source.minCoeff());
            report.source_max = std::max(report.source_max, source.maxCoeff());
        }
        return heat_substep(sys_, state_.theta, divergence_at_gauss(sys_, vel), source, dt);
    };
    bool converged = false;
    try {
        for (int it = 0; it < cfg_.picard_max_iters; ++it) {
            Eigen::VectorXd theta_new;
            Eigen::VectorXd v_new;
            Eigen::VectorXd stress_new;
            if (cfg_.order == SplittingOrder::heat_first) {
                theta_new = heat(theta, v, stress);
                mechanics(theta_new, stress, load, v_new, stress_new);
            } else {
                mechanics(theta, stress, load, v_new, stress_new);
                theta_new = heat(theta, v_new, stress_new);
            }
            const double floor = 1e-6 * theta_new.lpNorm<Eigen::Infinity>();
            const double r = std::max({relative_change(theta_new, theta, floor), relative_change(v_new, v, floor),
                                       relative_change(stress_new, stress, floor)});
            report.residual_history.push_back(r);
            theta = std::move(theta_new);
            v = std::move(v_new);
            stress = std::move(stress_new);
            report.picard_iterations = it + 1;
            if (r < cfg_.picard_tol) {
                converged = true;
                break;
            }
        }
    } catch (const PositivityViolation& e) {
        throw PositivityViolation(e.what(), t_next, report.residual_history);
    } catch (const StepFailure& e) {
        throw StepFailure(e.what(), t_next, report.residual_history);
    }
    if (!converged) {
        throw StepFailure("Picard iteration did not converge in " + std::to_string(cfg_.picard_max_iters) +
                              " iterations at t = " + std::to_string(t_next) + "; residuals: " +
                              history_text(report.residual_history),
                          t_next, report.residual_history);
    }
    if (report.source_min > report.source_max) {
        report.source_min = report.source_max = 0.0;
    }

    // Dissipation terms of the converged step.
    double inelastic = 0.0;
    double entropic = 0.0;
    double src = 0.0;
    const int nc = sys_.stress_components();
    for (int cell = 0; cell < sys_.mesh().cell_count(); ++cell) {
        const double vol = sys_.mesh().cell_volume(cell);
        const double th = temperature_at_center(sys_, theta, cell);
        const double q = source.size() > 0 ? source[cell] : 0.0;
        src += vol * q;
        entropic += vol * q / th;
        const int m = sys_.active_stress_in_cell(cell);
        if (m > 0 && !flow.is_zero()) {
            inelastic += vol * dissipation(flow, th, cell_tensor(stress, cell * nc, m, sys_.dim()));
        }
    }
    const Eigen::VectorXd tau = theta.array().log().matrix();

    state_.u += dt * v;
    state_.v = std::move(v);
    state_.stress = std::move(stress);
    state_.theta = std::move(theta);
    state_.step = next_step;
    state_.t = t_next;

    BalanceSample delta = sample_state();
    delta.d_grad_tau = dt * tau.dot(sys_.temp_stiffness() * tau);
    delta.d_inelastic = dt * inelastic;
    delta.d_entropic = dt * entropic;
    delta.d_source = dt * src;
    delta.d_work = load.size() > 0 ? dt * load.dot(state_.v) : 0.0;
    ledger_.append(delta);

    reports_.push_back(std::move(report));
    for (const auto& obs : observers_) {
        obs(state_.step, state_.t, state_, delta);
    }
    return reports_.back();
}

void ThermoViscoSolver::mechanics(const Eigen::VectorXd& theta, const Eigen::VectorXd& stress_iter,
                                  const Eigen::VectorXd& load, Eigen::VectorXd& v_out,
                                  Eigen::VectorXd& stress_out) const {
    const double dt = cfg_.dt;
    const SparseMatrix& b = sys_.strain_operator();
    Eigen::VectorXd rhs = sys_.disp_mass() * state_.v / dt - b.transpose() * state_.stress +
                          sys_.div_coupling().transpose() * theta;
    if (!material_.flow.is_zero()) {
        rhs += dt * (b.transpose() * (compliance_inv_ * flow_vector(sys_, material_.flow, theta, stress_iter)));
    }
    if (load.size() > 0) {
        rhs += load;
    }
    v_out = mech_solver_->solve(rhs);
    const Eigen::VectorXd rate = (b * v_out).cwiseQuotient(sys_.stress_gram());
    stress_out = stress_substep(sys_, material_.elasticity, material_.flow, theta, state_.stress, rate, dt, stress_opt_);
}

RunSummary ThermoViscoSolver::run() {
    const int total = cfg_.step_count();
    while (state_.step < total) {
        step();
    }
    return {state_, ledger_, reports_, truncation_.height()};
}

RunSummary run(const GalerkinSystem& sys, const Material& material, const SolverConfig& cfg,
               const std::vector<Observer>& observers) {
    ThermoViscoSolver solver(sys, material, cfg);
    for (const auto& o : observers) {
        solver.add_observer(o);
    }
    return solver.run();
}

}  // namespace thermovisco
