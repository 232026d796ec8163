#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermovisco {

/// What a time stepper reports after each accepted step (or for the initial
/// state, with step == 0 and all increments zero).
///
/// State integrals are evaluated at time t; the d_* members are the
/// contributions of the interval (t - dt, t].
struct BalanceSample {
    int step = 0;
    double t = 0.0;

    double kinetic = 0.0;         ///< 1/2 int |u_t|^2
    double elastic = 0.0;         ///< 1/2 int C^{-1} T : T
    double thermal = 0.0;         ///< int theta
    double entropy = 0.0;         ///< int ln theta
    double integral_div_u = 0.0;  ///< int div u

    double d_grad_tau = 0.0;  ///< dt int |grad ln theta|^2
    double d_inelastic = 0.0; ///< dt int G(theta,T) : T
    double d_entropic = 0.0;  ///< dt int T_n(G : T) / theta
    double d_work = 0.0;      ///< dt int f . u_t
    double d_source = 0.0;    ///< dt int T_n(G : T)

    double theta_min = 0.0;
    double div_v_sup = 0.0;  ///< max |div u_t| at time t
};

/// One ledger line. The first fourteen members are the CSV columns.
struct LedgerRow {
    int step = 0;
    double t = 0.0;
    double kinetic = 0.0;
    double elastic = 0.0;
    double thermal = 0.0;
    double entropy = 0.0;
    double grad_tau_diss = 0.0;
    double inelastic_diss = 0.0;
    double entropic_diss = 0.0;
    double work = 0.0;
    double source_trunc = 0.0;
    double energy_residual = 0.0;
    double dissipation_margin = 0.0;
    double theta_min = 0.0;
    double positivity_ratio = 1.0;

    double integral_div_u = 0.0;
    double div_v_sup = 0.0;
    double div_v_time_integral = 0.0;  ///< trapezoid rule of div_v_sup over [0, t]

    [[nodiscard]] double total_energy() const { return kinetic + elastic + thermal; }
};

class LedgerGap : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accumulated energy / entropy / dissipation integrals of a run.
///
/// Single writer; reading between appends is safe.
class BalanceLedger {
public:
    static const char* csv_header();

    /// Throws LedgerGap if `s.step` does not follow the last row.
    void append(const BalanceSample& s);

    [[nodiscard]] const std::vector<LedgerRow>& rows() const { return rows_; }
    [[nodiscard]] bool empty() const { return rows_.empty(); }
    [[nodiscard]] const LedgerRow& initial() const;
    [[nodiscard]] const LedgerRow& back() const;
    /// Row logged at time t (to 1e-9 relative). Throws LedgerGap otherwise.
    [[nodiscard]] const LedgerRow& row_at(double t) const;

    /// Steps whose dissipation increments (inelastic, entropic, gradient,
    /// truncated source) were negative.
    [[nodiscard]] int monotonicity_violations() const { return monotonicity_violations_; }

    void write_csv(std::ostream& os) const;
    static void write_csv_row(std::ostream& os, const LedgerRow& r);

private:
    std::vector<LedgerRow> rows_;
    int monotonicity_violations_ = 0;
};

struct EnergyBalance {
    double change = 0.0;              ///< E(t) - E(0), E = kinetic + elastic + thermal
    double work = 0.0;                ///< int int f . u_t
    double truncation_deficit = 0.0;  ///< int int G:T - int int T_n(G:T)  (>= 0)
    double residual = 0.0;            ///< |change - work + truncation_deficit|
};

/// Energy balance at time t with the truncation term itemized.
EnergyBalance energy_balance(const BalanceLedger& ledger, double t);
double energy_residual(const BalanceLedger& ledger, double t);
/// |int ln theta(t) - int ln theta(0) + [int div u]_0^t - int int T_n(G:T)/theta - int int |grad ln theta|^2|
double entropy_residual(const BalanceLedger& ledger, double t);

/// max(1e-10, c_scheme * dt).
double scheme_tolerance(double c_scheme, double dt);

struct DissipationVerdict {
    double margin = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};
/// Slack of the total dissipation inequality at time t; passes iff margin >= -tol.
DissipationVerdict dissipation_inequality_check(const BalanceLedger& ledger, double t, double tolerance);

struct PositivitySample {
    double t = 0.0;
    double theta_min = 0.0;
    double div_v_sup = 0.0;
};

struct PositivityVerdict {
    double worst_ratio = 0.0;
    double worst_time = 0.0;
    bool passed = false;
};

/// Worst ratio of theta_min(t) to min(theta_0) exp(-int_0^t |div u_t|_inf ds);
/// the integral uses the trapezoid rule on the samples. Throws
/// std::invalid_argument on an empty history.
PositivityVerdict positivity_bound_check(std::span<const PositivitySample> history, double slack = 0.05);
std::vector<PositivitySample> positivity_history(const BalanceLedger& ledger);

/// max over rows of E(t) - E(0) - work(t); a positive value means the
/// discrete energy grew beyond what the forcing supplied.
double energy_bound_excess(const BalanceLedger& ledger);

struct VerdictSettings {
    double c_scheme = 1.0;
    double dt = 1.0;
    double positivity_slack = 0.05;
};

struct RunVerdicts {
    double tolerance = 0.0;
    double max_energy_residual = 0.0;
    double max_entropy_residual = 0.0;
    double min_dissipation_margin = 0.0;
    double energy_bound_excess = 0.0;
    PositivityVerdict positivity;
    int monotonicity_violations = 0;

    bool energy_ok = false;
    bool dissipation_ok = false;
    bool positivity_ok = false;
    bool monotone_ok = false;
    bool bounded_ok = false;

    [[nodiscard]] bool passed() const { return energy_ok && dissipation_ok && positivity_ok && monotone_ok && bounded_ok; }
};

RunVerdicts evaluate_verdicts(const BalanceLedger& ledger, const VerdictSettings& settings);

}  // namespace thermovisco
