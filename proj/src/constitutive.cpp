#include "thermovisco/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

namespace thermovisco {

namespace {

double block_trace(const SymTensor& a, int dim) {
    double tr = 0.0;
    for (int i = 0; i < dim; ++i) {
        tr += a[i];
    }
    return tr;
}

SymTensor random_tensor(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> decade(-3.0, 3.0);
    const double scale = std::pow(10.0, decade(rng));
    SymTensor t;
    for (int i = 0; i < SymTensor::kSize; ++i) {
        t[i] = scale * normal(rng);
    }
    return t;
}

}  // namespace

ElasticityTensor::ElasticityTensor(double lambda, double mu, int dim) : lambda_(lambda), mu_(mu), dim_(dim) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("elasticity tensor dimension must be 1, 2 or 3");
    }
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0)) {
        throw std::invalid_argument("elasticity tensor is not positive definite: need mu > 0 and 3*lambda + 2*mu > 0");
    }
}

SymTensor ElasticityTensor::apply(const SymTensor& a) const {
    return lambda_ * block_trace(a, dim_) * SymTensor::identity(dim_) + 2.0 * mu_ * a;
}

SymTensor ElasticityTensor::inverse_apply(const SymTensor& a) const {
    const double beta = lambda_ / (dim_ * lambda_ + 2.0 * mu_);
    return (a - beta * block_trace(a, dim_) * SymTensor::identity(dim_)) * (1.0 / (2.0 * mu_));
}

Eigen::Matrix3d ElasticityTensor::apply(const Eigen::Matrix3d& a) const {
    return apply(SymTensor::from_matrix(a)).to_matrix();
}

Eigen::Matrix3d ElasticityTensor::inverse_apply(const Eigen::Matrix3d& a) const {
    return inverse_apply(SymTensor::from_matrix(a)).to_matrix();
}

double ElasticityTensor::max_eigenvalue() const {
    const double volumetric = dim_ * lambda_ + 2.0 * mu_;
    return dim_ == 1 ? volumetric : std::max(volumetric, 2.0 * mu_);
}

std::string to_string(FlowKind kind) {
    switch (kind) {
        case FlowKind::linear: return "linear";
        case FlowKind::mroz_saturating: return "mroz_saturating";
        case FlowKind::temperature_weighted: return "temperature_weighted";
        case FlowKind::custom: return "custom";
    }
    return "unknown";
}

FlowRule FlowRule::linear(double kappa0) {
    if (!(kappa0 >= 0.0)) {
        throw std::invalid_argument("flow rule: kappa0 must be >= 0");
    }
    FlowRule r;
    r.kind_ = FlowKind::linear;
    r.name_ = "linear";
    r.kappa0_ = r.kappa_min_ = r.kappa_max_ = kappa0;
    r.growth_constant_ = kappa0;
    return r;
}

FlowRule FlowRule::mroz_saturating(double kappa0) {
    FlowRule r = linear(kappa0);
    r.kind_ = FlowKind::mroz_saturating;
    r.name_ = "mroz_saturating";
    return r;
}

FlowRule FlowRule::temperature_weighted(double kappa0, double kappa_min) {
    if (!(kappa0 >= 0.0) || !(kappa_min >= 0.0) || kappa_min > kappa0) {
        throw std::invalid_argument("flow rule: need 0 <= kappa_min <= kappa0");
    }
    FlowRule r;
    r.kind_ = FlowKind::temperature_weighted;
    r.name_ = "temperature_weighted";
    r.kappa0_ = kappa0;
    r.kappa_min_ = kappa_min;
    r.kappa_max_ = kappa0;
    r.growth_constant_ = kappa0;
    return r;
}

FlowRule FlowRule::custom(std::string name, Function fn, double growth_constant) {
    if (!fn) {
        throw std::invalid_argument("flow rule: custom rule needs a callable");
    }
    FlowRule r;
    r.kind_ = FlowKind::custom;
    r.name_ = std::move(name);
    r.custom_ = std::move(fn);
    r.growth_constant_ = growth_constant;
    return r;
}

double FlowRule::rate(double theta) const {
    switch (kind_) {
        case FlowKind::temperature_weighted:
            return std::clamp(kappa0_ / (1.0 + std::max(theta, 0.0)), kappa_min_, kappa_max_);
        case FlowKind::custom:
            return std::numeric_limits<double>::quiet_NaN();
        default:
            return kappa0_;
    }
}

SymTensor FlowRule::eval(double theta, const SymTensor& stress) const {
    switch (kind_) {
        case FlowKind::linear:
        case FlowKind::temperature_weighted:
            return rate(theta) * stress;
        case FlowKind::mroz_saturating:
            return (rate(theta) / (1.0 + stress.norm())) * stress;
        case FlowKind::custom:
            return custom_(theta, stress);
    }
    return {};
}

bool FlowRule::is_zero() const { return kind_ != FlowKind::custom && kappa_max_ == 0.0; }

TruncationLevel::TruncationLevel(double height) : height_(height) {
    if (!(height > 0.0)) {
        throw std::invalid_argument("truncation height must be > 0");
    }
}

double truncate(const TruncationLevel& level, double r) {
    const double n = level.height();
    return std::min(n, std::max(r, -n));
}

AdmissibilityReport verify_admissibility(const FlowRule& rule, std::int64_t sample_count, std::uint64_t seed,
                                         const AdmissibilityTolerances& tol) {
    if (sample_count < 1) {
        throw std::invalid_argument("verify_admissibility: sample_count must be >= 1");
    }
    AdmissibilityReport rep;
    rep.rule = rule.name();
    rep.samples = sample_count;
    rep.seed = seed;
    rep.declared_growth = rule.growth_constant();
    rep.worst_monotonicity = std::numeric_limits<double>::infinity();
    rep.worst_dissipation = std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    // Temperatures cover negative values too: G must be defined on all of R.
    std::uniform_real_distribution<double> theta_dist(-5.0, 50.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> near_decade(-3.0, 0.0);

    for (std::int64_t s = 0; s < sample_count; ++s) {
        const double theta = theta_dist(rng);
        const SymTensor a = random_tensor(rng);
        SymTensor b;
        if (unit(rng) < 0.25) {
            // Nearby pair: probes the local slope of G.
            SymTensor d = random_tensor(rng);
            d *= std::pow(10.0, near_decade(rng)) * a.norm() / std::max(d.norm(), 1e-300);
            b = a + d;
        } else {
            b = random_tensor(rng);
        }

        const SymTensor ga = rule.eval(theta, a);
        const SymTensor gb = rule.eval(theta, b);

        const double mono = (ga - gb).dot(a - b);
        if (mono < rep.worst_monotonicity) {
            rep.worst_monotonicity = mono;
            rep.witness_theta = theta;
            rep.witness_a = a;
            rep.witness_b = b;
        }
        rep.worst_dissipation = std::min({rep.worst_dissipation, ga.dot(a), gb.dot(b)});
        rep.empirical_growth =
            std::max({rep.empirical_growth, ga.norm() / (1.0 + a.norm()), gb.norm() / (1.0 + b.norm())});
        rep.max_zero_response = std::max(rep.max_zero_response, rule.eval(theta, SymTensor::zero()).max_abs());
    }

    rep.monotone = rep.worst_monotonicity >= -tol.monotonicity;
    rep.dissipative = rep.worst_dissipation >= -tol.dissipation;
    rep.vanishes_at_zero = rep.max_zero_response <= tol.zero_response;
    rep.bounded_growth = rep.empirical_growth <= rep.declared_growth * (1.0 + tol.growth_relative);
    return rep;
}

}  // namespace thermovisco
