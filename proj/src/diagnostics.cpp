#include "thermovisco/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace thermovisco {

const char* BalanceLedger::csv_header() {
    return "t,kinetic,elastic,thermal,entropy,grad_tau_diss,inelastic_diss,entropic_diss,work,source_trunc,"
           "energy_residual,dissipation_margin,theta_min,positivity_ratio";
}

void BalanceLedger::append(const BalanceSample& s) {
    const int expected = rows_.empty() ? 0 : rows_.back().step + 1;
    if (s.step != expected) {
        throw LedgerGap("ledger gap: expected step " + std::to_string(expected) + ", got " + std::to_string(s.step));
    }

    LedgerRow r;
    r.step = s.step;
    r.t = s.t;
    r.kinetic = s.kinetic;
    r.elastic = s.elastic;
    r.thermal = s.thermal;
    r.entropy = s.entropy;
    r.integral_div_u = s.integral_div_u;
    r.theta_min = s.theta_min;
    r.div_v_sup = s.div_v_sup;

    if (!rows_.empty()) {
        const LedgerRow& p = rows_.back();
        r.grad_tau_diss = p.grad_tau_diss + s.d_grad_tau;
        r.inelastic_diss = p.inelastic_diss + s.d_inelastic;
        r.entropic_diss = p.entropic_diss + s.d_entropic;
        r.work = p.work + s.d_work;
        r.source_trunc = p.source_trunc + s.d_source;
        r.div_v_time_integral = p.div_v_time_integral + 0.5 * (s.t - p.t) * (s.div_v_sup + p.div_v_sup);
        if (s.d_grad_tau < 0.0 || s.d_inelastic < 0.0 || s.d_entropic < 0.0 || s.d_source < 0.0) {
            ++monotonicity_violations_;
        }
    }

    const LedgerRow& r0 = rows_.empty() ? r : rows_.front();
    const double change = r.total_energy() - r0.total_energy();
    r.energy_residual = std::abs(change - r.work - (r.source_trunc - r.inelastic_diss));
    const double supply = r.work + (r0.thermal - r0.entropy) + r0.kinetic + r0.elastic;
    const double held = (r.thermal - r.entropy) + r.kinetic + r.elastic + r.grad_tau_diss;
    r.dissipation_margin = supply - held;
    const double bound = r0.theta_min * std::exp(-r.div_v_time_integral);
    r.positivity_ratio = r.theta_min / bound;

    rows_.push_back(r);
}

const LedgerRow& BalanceLedger::initial() const {
    if (rows_.empty()) {
        throw LedgerGap("ledger is empty");
    }
    return rows_.front();
}

const LedgerRow& BalanceLedger::back() const {
    if (rows_.empty()) {
        throw LedgerGap("ledger is empty");
    }
    return rows_.back();
}

const LedgerRow& BalanceLedger::row_at(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    const auto it = std::lower_bound(rows_.begin(), rows_.end(), t - tol,
                                     [](const LedgerRow& r, double v) { return r.t < v; });
    if (it == rows_.end() || std::abs(it->t - t) > tol) {
        throw LedgerGap("ledger has no row at t = " + std::to_string(t));
    }
    return *it;
}

void BalanceLedger::write_csv_row(std::ostream& os, const LedgerRow& r) {
    char buf[64];
    const double cols[] = {r.t,
                           r.kinetic,
                           r.elastic,
                           r.thermal,
                           r.entropy,
                           r.grad_tau_diss,
                           r.inelastic_diss,
                           r.entropic_diss,
                           r.work,
                           r.source_trunc,
                           r.energy_residual,
                           r.dissipation_margin,
                           r.theta_min,
                           r.positivity_ratio};
    bool first = true;
    for (double v : cols) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!first) {
            os << ',';
        }
        os << buf;
        first = false;
    }
    os << '\n';
}

void BalanceLedger::write_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    for (const auto& r : rows_) {
        write_csv_row(os, r);
    }
}

EnergyBalance energy_balance(const BalanceLedger& ledger, double t) {
    const LedgerRow& r0 = ledger.initial();
    const LedgerRow& r = ledger.row_at(t);
    EnergyBalance b;
    b.change = r.total_energy() - r0.total_energy();
    b.work = r.work;
    b.truncation_deficit = r.inelastic_diss - r.source_trunc;
    b.residual = std::abs(b.change - b.work + b.truncation_deficit);
    return b;
}

double energy_residual(const BalanceLedger& ledger, double t) { return energy_balance(ledger, t).residual; }

double entropy_residual(const BalanceLedger& ledger, double t) {
    const LedgerRow& r0 = ledger.initial();
    const LedgerRow& r = ledger.row_at(t);
    return std::abs((r.entropy - r0.entropy) + (r.integral_div_u - r0.integral_div_u) - r.entropic_diss -
                    r.grad_tau_diss);
}

double scheme_tolerance(double c_scheme, double dt) { return std::max(1e-10, c_scheme * dt); }

DissipationVerdict dissipation_inequality_check(const BalanceLedger& ledger, double t, double tolerance) {
    DissipationVerdict v;
    v.margin = ledger.row_at(t).dissipation_margin;
    v.tolerance = tolerance;
    v.passed = v.margin >= -tolerance;
    return v;
}

PositivityVerdict positivity_bound_check(std::span<const PositivitySample> history, double slack) {
    if (history.empty()) {
        throw std::invalid_argument("positivity check needs a non-empty history");
    }
    const double theta0 = history.front().theta_min;
    PositivityVerdict v;
    v.worst_ratio = std::numeric_limits<double>::infinity();
    double integral = 0.0;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (i > 0) {
            const auto& p = history[i - 1];
            const auto& c = history[i];
            integral += 0.5 * (c.t - p.t) * (c.div_v_sup + p.div_v_sup);
        }
        const double ratio = history[i].theta_min / (theta0 * std::exp(-integral));
        if (ratio < v.worst_ratio) {
            v.worst_ratio = ratio;
            v.worst_time = history[i].t;
        }
    }
    v.passed = v.worst_ratio >= 1.0 - slack;
    return v;
}

std::vector<PositivitySample> positivity_history(const BalanceLedger& ledger) {
    std::vector<PositivitySample> h;
    h.reserve(ledger.rows().size());
    for (const auto& r : ledger.rows()) {
        h.push_back({r.t, r.theta_min, r.div_v_sup});
    }
    return h;
}

double energy_bound_excess(const BalanceLedger& ledger) {
    const LedgerRow& r0 = ledger.initial();
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto& r : ledger.rows()) {
        excess = std::max(excess, r.total_energy() - r0.total_energy() - r.work);
    }
    return excess;
}

RunVerdicts evaluate_verdicts(const BalanceLedger& ledger, const VerdictSettings& settings) {
    RunVerdicts v;
    v.tolerance = scheme_tolerance(settings.c_scheme, settings.dt);
    v.min_dissipation_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : ledger.rows()) {
        v.max_energy_residual = std::max(v.max_energy_residual, r.energy_residual);
        v.max_entropy_residual = std::max(v.max_entropy_residual, entropy_residual(ledger, r.t));
        v.min_dissipation_margin = std::min(v.min_dissipation_margin, r.dissipation_margin);
    }
    v.energy_bound_excess = energy_bound_excess(ledger);
    const auto history = positivity_history(ledger);
    v.positivity = positivity_bound_check(history, settings.positivity_slack);
    v.monotonicity_violations = ledger.monotonicity_violations();

    v.energy_ok = v.max_energy_residual <= v.tolerance;
    v.dissipation_ok = v.min_dissipation_margin >= -v.tolerance;
    v.positivity_ok = v.positivity.passed;
    v.monotone_ok = v.monotonicity_violations == 0;
    v.bounded_ok = v.energy_bound_excess <= v.tolerance;
    return v;
}

}  // namespace thermovisco
