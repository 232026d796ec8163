#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "thermovisco/sym_tensor.hpp"

namespace thermovisco {

/// Isotropic elasticity tensor C A = lambda tr(A) I + 2 mu A acting on the
/// symmetric d x d block (d = dim).
class ElasticityTensor {
public:
    /// Requires mu > 0 and 3 lambda + 2 mu > 0, which makes C positive definite
    /// in every dimension 1..3.
    ElasticityTensor(double lambda, double mu, int dim = 3);

    [[nodiscard]] SymTensor apply(const SymTensor& a) const;
    [[nodiscard]] SymTensor inverse_apply(const SymTensor& a) const;
    /// Full-matrix overloads; non-symmetric input throws std::invalid_argument.
    [[nodiscard]] Eigen::Matrix3d apply(const Eigen::Matrix3d& a) const;
    [[nodiscard]] Eigen::Matrix3d inverse_apply(const Eigen::Matrix3d& a) const;

    [[nodiscard]] double lambda() const { return lambda_; }
    [[nodiscard]] double mu() const { return mu_; }
    [[nodiscard]] int dim() const { return dim_; }
    /// Largest eigenvalue of C on the d x d symmetric block.
    [[nodiscard]] double max_eigenvalue() const;
    /// Scalar modulus of the 1D reduction, lambda + 2 mu.
    [[nodiscard]] double uniaxial_modulus() const { return lambda_ + 2.0 * mu_; }

    /// Same material acting in a different dimension.
    [[nodiscard]] ElasticityTensor with_dim(int dim) const { return {lambda_, mu_, dim}; }

private:
    double lambda_;
    double mu_;
    int dim_;
};

enum class FlowKind { linear, mroz_saturating, temperature_weighted, custom };

std::string to_string(FlowKind kind);

/// Inelastic flow rule G(theta, T).
///
/// Reference rules:
///   linear:               G = kappa(theta) T
///   mroz_saturating:      G = kappa(theta) T / (1 + |T|)
///   temperature_weighted: G = kappa(theta) T, kappa(theta) = kappa0 / (1 + max(theta, 0))
/// kappa(theta) is clamped to [kappa_min, kappa_max] for every real theta, so the
/// growth constant C_G = kappa_max is uniform in theta.
class FlowRule {
public:
    using Function = std::function<SymTensor(double theta, const SymTensor& stress)>;

    static FlowRule linear(double kappa0);
    static FlowRule mroz_saturating(double kappa0);
    static FlowRule temperature_weighted(double kappa0, double kappa_min);
    /// User-supplied rule. It must pass verify_admissibility() before the solver
    /// accepts it; `growth_constant` is the declared C_G.
    static FlowRule custom(std::string name, Function fn, double growth_constant);

    [[nodiscard]] SymTensor eval(double theta, const SymTensor& stress) const;
    /// Temperature sensitivity kappa(theta), already clamped.
    [[nodiscard]] double rate(double theta) const;

    [[nodiscard]] FlowKind kind() const { return kind_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] double kappa0() const { return kappa0_; }
    [[nodiscard]] double kappa_min() const { return kappa_min_; }
    [[nodiscard]] double kappa_max() const { return kappa_max_; }
    /// Declared C_G in |G(theta, T)| <= C_G (1 + |T|).
    [[nodiscard]] double growth_constant() const { return growth_constant_; }
    /// True when G vanishes identically (kappa_max == 0 for reference rules).
    [[nodiscard]] bool is_zero() const;

private:
    FlowRule() = default;

    FlowKind kind_ = FlowKind::linear;
    std::string name_;
    double kappa0_ = 0.0;
    double kappa_min_ = 0.0;
    double kappa_max_ = 0.0;
    double growth_constant_ = 0.0;
    Function custom_;
};

/// f(theta, T) -> G(theta, T) : T, the inelastic heat source.
inline double dissipation(const FlowRule& rule, double theta, const SymTensor& stress) {
    return rule.eval(theta, stress).dot(stress);
}

/// Truncation height n > 0 of T_n(r) = min{n, max{r, -n}}.
class TruncationLevel {
public:
    explicit TruncationLevel(double height);
    [[nodiscard]] double height() const { return height_; }

private:
    double height_;
};

[[nodiscard]] double truncate(const TruncationLevel& level, double r);

struct AdmissibilityTolerances {
    double monotonicity = 1e-12;
    double dissipation = 1e-12;
    double zero_response = 1e-14;
    double growth_relative = 1e-9;
};

/// Result of a randomized check of the structural assumptions on G.
/// Failures are reported here, never thrown.
struct AdmissibilityReport {
    std::string rule;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;

    double worst_monotonicity = 0.0;  ///< min of (G(th,a)-G(th,b)):(a-b)
    double worst_dissipation = 0.0;   ///< min of G(th,a):a
    double max_zero_response = 0.0;   ///< max of |G(th,0)|
    double empirical_growth = 0.0;    ///< max of |G(th,a)| / (1 + |a|)
    double declared_growth = 0.0;

    // Witness of the worst monotonicity sample.
    double witness_theta = 0.0;
    SymTensor witness_a;
    SymTensor witness_b;

    bool monotone = false;
    bool dissipative = false;
    bool vanishes_at_zero = false;
    bool bounded_growth = false;

    [[nodiscard]] bool passed() const { return monotone && dissipative && vanishes_at_zero && bounded_growth; }
};

AdmissibilityReport verify_admissibility(const FlowRule& rule, std::int64_t sample_count, std::uint64_t seed,
                                         const AdmissibilityTolerances& tol = {});

}  // namespace thermovisco
