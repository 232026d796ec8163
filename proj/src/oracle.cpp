#include "thermovisco/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace thermovisco {

namespace {

double flow_at(const FDProblem& p, double theta, double stress) { return p.flow ? p.flow(theta, stress) : 0.0; }

double force_at(const FDProblem& p, double x, double t) { return p.forcing ? p.forcing(x, t) : 0.0; }

// Acceleration (T - theta)_x + f at interior nodes; zero on the clamped ends.
Eigen::VectorXd acceleration(const FDGrid& g, const FDProblem& p, double t) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(g.nodes);
    for (int i = 1; i + 1 < g.nodes; ++i) {
        a[i] = (g.stress[i] - g.stress[i - 1]) / g.h + force_at(p, i * g.h, t);
        if (p.coupled) {
            a[i] -= (g.theta[i + 1] - g.theta[i - 1]) / (2.0 * g.h);
        }
    }
    return a;
}

// Tridiagonal solve; sub[i] couples i to i-1, sup[i] couples i to i+1.
Eigen::VectorXd thomas(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd sup, Eigen::VectorXd rhs) {
    const auto n = diag.size();
    for (Eigen::Index i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    Eigen::VectorXd x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    }
    return x;
}

double node_weight(int i, int nodes, double h) { return (i == 0 || i == nodes - 1) ? 0.5 * h : h; }

}  // namespace

ScalarFlow scalar_flow(const FlowRule& rule) {
    if (rule.is_zero()) {
        return {};
    }
    return [rule](double theta, double stress) { return rule.eval(theta, SymTensor::diag(stress, 0.0, 0.0))[0]; };
}

FDGrid fd_initialize(const FDProblem& p) {
    if (p.nodes < 3) {
        throw std::invalid_argument("oracle: need at least 3 nodes");
    }
    if (!(p.length > 0.0) || !(p.dt > 0.0) || !(p.modulus > 0.0)) {
        throw std::invalid_argument("oracle: length, dt and modulus must be > 0");
    }
    if (!p.theta0) {
        throw std::invalid_argument("oracle: initial temperature missing");
    }
    FDGrid g;
    g.nodes = p.nodes;
    g.h = p.length / (p.nodes - 1);
    g.dt = p.dt;
    const double wave_speed = std::sqrt(p.modulus);
    if (wave_speed * p.dt > g.h * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "oracle: CFL violated, sqrt(c) dt = " << wave_speed * p.dt << " > h = " << g.h;
        throw std::invalid_argument(os.str());
    }

    g.u = Eigen::VectorXd::Zero(p.nodes);
    g.v = Eigen::VectorXd::Zero(p.nodes);
    g.theta.resize(p.nodes);
    g.stress = Eigen::VectorXd::Zero(p.nodes - 1);
    for (int i = 0; i < p.nodes; ++i) {
        const double x = i * g.h;
        const bool end = i == 0 || i == p.nodes - 1;
        if (!end) {
            g.u[i] = p.u0 ? p.u0(x) : 0.0;
            g.v[i] = p.u1 ? p.u1(x) : 0.0;
        }
        g.theta[i] = p.theta0(x);
        if (!(g.theta[i] > 0.0)) {
            throw std::invalid_argument("oracle: initial temperature must be > 0");
        }
    }
    for (int c = 0; c + 1 < p.nodes; ++c) {
        g.stress[c] = p.stress0 ? p.stress0((c + 0.5) * g.h) : 0.0;
    }
    g.v_half = g.v + 0.5 * p.dt * acceleration(g, p, 0.0);
    return g;
}

FDGrid fd_step(const FDGrid& g, const FDProblem& p) {
    const int n = g.nodes;
    const double h = g.h;
    const double dt = g.dt;
    FDGrid next = g;
    next.step = g.step + 1;
    next.t = next.step * dt;

    next.u = g.u + dt * g.v_half;

    Eigen::VectorXd heat_src = Eigen::VectorXd::Zero(n - 1);
    for (int c = 0; c + 1 < n; ++c) {
        const double th = 0.5 * (g.theta[c] + g.theta[c + 1]);
        const double gv = flow_at(p, th, g.stress[c]);
        heat_src[c] = gv * g.stress[c];
        next.stress[c] = g.stress[c] + dt * p.modulus * ((g.v_half[c + 1] - g.v_half[c]) / h - gv);
    }

    // theta_new / dt - theta_xx + a theta_new = theta / dt + b, ghost-node Neumann ends.
    Eigen::VectorXd sub = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sup = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd rhs(n);
    const double k = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        double a = 0.0;
        double b = 0.0;
        if (i == 0) {
            a = (g.v_half[1] - g.v_half[0]) / h;
            b = heat_src[0];
        } else if (i == n - 1) {
            a = (g.v_half[n - 1] - g.v_half[n - 2]) / h;
            b = heat_src[n - 2];
        } else {
            a = (g.v_half[i + 1] - g.v_half[i - 1]) / (2.0 * h);
            b = 0.5 * (heat_src[i - 1] + heat_src[i]);
        }
        diag[i] = 1.0 / dt + 2.0 * k + (p.coupled ? a : 0.0);
        rhs[i] = g.theta[i] / dt + b;
        if (i == 0) {
            sup[i] = -2.0 * k;
        } else if (i == n - 1) {
            sub[i] = -2.0 * k;
        } else {
            sub[i] = -k;
            sup[i] = -k;
        }
    }
    next.theta = thomas(sub, diag, sup, rhs);
    for (int i = 0; i < n; ++i) {
        if (!(next.theta[i] > 0.0)) {
            std::ostringstream os;
            os << "oracle: temperature lost positivity at node " << i << ", t = " << next.t;
            throw std::runtime_error(os.str());
        }
    }

    const Eigen::VectorXd acc = acceleration(next, p, next.t);
    next.v_half = g.v_half + dt * acc;
    next.v = 0.5 * (g.v_half + next.v_half);
    return next;
}

BalanceSample fd_sample(const FDGrid& g, const FDProblem& p) {
    BalanceSample s;
    s.step = g.step;
    s.t = g.t;
    for (int i = 0; i < g.nodes; ++i) {
        const double w = node_weight(i, g.nodes, g.h);
        s.kinetic += 0.5 * w * g.v[i] * g.v[i];
        s.thermal += w * g.theta[i];
        s.entropy += w * std::log(g.theta[i]);
    }
    for (int c = 0; c + 1 < g.nodes; ++c) {
        s.elastic += 0.5 * g.h * g.stress[c] * g.stress[c] / p.modulus;
        const double dv = (g.v[c + 1] - g.v[c]) / g.h;
        s.div_v_sup = std::max(s.div_v_sup, std::abs(dv));
    }
    s.integral_div_u = g.u[g.nodes - 1] - g.u[0];
    s.theta_min = g.theta.minCoeff();
    return s;
}

FDRunResult fd_run(const FDGrid& start, const FDProblem& p, double t_end, const std::vector<FDObserver>& observers) {
    FDRunResult out{start, {}};
    out.ledger.append(fd_sample(start, p));
    const int total = static_cast<int>(std::llround(t_end / start.dt));
    while (out.grid.step < total) {
        const FDGrid& g = out.grid;
        BalanceSample inc;
        for (int c = 0; c + 1 < g.nodes; ++c) {
            const double th = 0.5 * (g.theta[c] + g.theta[c + 1]);
            const double q = flow_at(p, th, g.stress[c]) * g.stress[c];
            inc.d_inelastic += g.dt * g.h * q;
            inc.d_entropic += g.dt * g.h * q / th;
        }
        inc.d_source = inc.d_inelastic;
        FDGrid next = fd_step(g, p);
        for (int c = 0; c + 1 < next.nodes; ++c) {
            const double dtau = (std::log(next.theta[c + 1]) - std::log(next.theta[c])) / next.h;
            inc.d_grad_tau += next.dt * next.h * dtau * dtau;
        }
        for (int i = 1; i + 1 < next.nodes; ++i) {
            inc.d_work += next.dt * next.h * force_at(p, i * next.h, g.t + 0.5 * g.dt) * g.v_half[i];
        }
        BalanceSample s = fd_sample(next, p);
        s.d_grad_tau = inc.d_grad_tau;
        s.d_inelastic = inc.d_inelastic;
        s.d_entropic = inc.d_entropic;
        s.d_source = inc.d_source;
        s.d_work = inc.d_work;
        out.ledger.append(s);
        out.grid = std::move(next);
        for (const auto& obs : observers) {
            obs(out.grid, s);
        }
    }
    return out;
}

double fd_displacement(const FDGrid& g, double x) {
    const double s = std::clamp(x / g.h, 0.0, static_cast<double>(g.nodes - 1));
    const int i = std::min(static_cast<int>(s), g.nodes - 2);
    const double w = s - i;
    return (1.0 - w) * g.u[i] + w * g.u[i + 1];
}

double fd_stress(const FDGrid& g, double x) {
    const int c = std::clamp(static_cast<int>(std::floor(x / g.h)), 0, g.nodes - 2);
    return g.stress[c];
}

double fd_temperature(const FDGrid& g, double x) {
    const double s = std::clamp(x / g.h, 0.0, static_cast<double>(g.nodes - 1));
    const int i = std::min(static_cast<int>(s), g.nodes - 2);
    const double w = s - i;
    return (1.0 - w) * g.theta[i] + w * g.theta[i + 1];
}

}  // namespace thermovisco
