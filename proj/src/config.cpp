#include "thermovisco/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "thermovisco/expression.hpp"

namespace thermovisco {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"mesh", {"dim", "extents", "cells"}},
        {"spaces", {"n_disp_level", "k_stress_level"}},
        {"material", {"lambda", "mu", "flow", "kappa0", "kappa_min", "admissibility_samples", "seed"}},
        {"time", {"dt", "t_end", "picard_tol", "picard_max_iters", "truncation", "splitting"}},
        {"data", {"u0", "u1", "stress0", "theta0", "f"}},
        {"output", {"directory", "snapshot_stride", "ledger"}},
        {"diagnostics", {"c_scheme"}},
        {"oracle", {"dt"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string::npos) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) {
        throw ConfigError(field + ": expected a number, got '" + text + "'");
    }
    return v;
}

long long to_integer(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) {
        throw ConfigError(field + ": expected an integer, got '" + text + "'");
    }
    return v;
}

std::optional<int> to_level(const std::string& field, const std::string& text) {
    if (trim(text) == "all") {
        return std::nullopt;
    }
    const long long v = to_integer(field, text);
    if (v < 1) {
        throw ConfigError(field + ": must be >= 1 or 'all'");
    }
    return static_cast<int>(v);
}

std::vector<std::string> list_items(const std::string& text) {
    std::vector<std::string> items;
    for (auto& s : split(text, ",; \t")) {
        if (!s.empty()) {
            items.push_back(s);
        }
    }
    return items;
}

// One expression per component, or a preset for all of them.
std::vector<Expression> components(const std::string& text, int count, const std::string& field,
                                   bool allow_time) {
    const std::string t = trim(text);
    if (!t.empty() && t[0] == '@') {
        if (t == "@zero") {
            return std::vector<Expression>(static_cast<std::size_t>(count), Expression::constant(0.0));
        }
        if (t == "@one") {
            return std::vector<Expression>(static_cast<std::size_t>(count), Expression::constant(1.0));
        }
        throw ConfigError(field + ": unknown preset '" + t + "'");
    }
    const auto parts = split(t, ";");
    if (static_cast<int>(parts.size()) != count) {
        throw ConfigError(field + ": expected " + std::to_string(count) + " component(s) separated by ';', got " +
                          std::to_string(parts.size()));
    }
    std::vector<Expression> out;
    for (const auto& p : parts) {
        try {
            out.push_back(Expression::parse(p));
        } catch (const ExpressionError& e) {
            throw ConfigError(field + ": " + e.what());
        }
        if (!allow_time && out.back().uses_time()) {
            throw ConfigError(field + ": initial data may not depend on t");
        }
    }
    return out;
}

}  // namespace

const std::vector<std::string>& flow_rule_names() {
    static const std::vector<std::string> names{"linear", "mroz_saturating", "temperature_weighted",
                                                "test_anti_monotone"};
    return names;
}

ScalarSampler make_scalar_field(const std::string& text, int dim, const std::string& field) {
    auto c = components(text, 1, field, false);
    (void)dim;
    return [e = c[0]](const Point& p) { return e(p[0], p[1], p[2]); };
}

VectorSampler make_vector_field(const std::string& text, int dim, const std::string& field) {
    auto c = components(text, dim, field, false);
    return [c, dim](const Point& p) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (int i = 0; i < dim; ++i) {
            v[i] = c[static_cast<std::size_t>(i)](p[0], p[1], p[2]);
        }
        return v;
    };
}

TensorSampler make_tensor_field(const std::string& text, int dim, const std::string& field) {
    auto c = components(text, sym_components(dim), field, false);
    return [c, dim](const Point& p) {
        SymTensor t;
        for (int j = 0; j < sym_components(dim); ++j) {
            t[mandel_slot(dim, j)] = c[static_cast<std::size_t>(j)](p[0], p[1], p[2]);
        }
        return t;
    };
}

Forcing make_forcing(const std::string& text, int dim, const std::string& field) {
    auto c = components(text, dim, field, true);
    return [c, dim](const Point& p, double t) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (int i = 0; i < dim; ++i) {
            v[i] = c[static_cast<std::size_t>(i)](p[0], p[1], p[2], t);
        }
        return v;
    };
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            if (body.empty()) {
                throw ConfigError(section + ": key outside of any section");
            }
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            (void)value;
            if (!it->second.count(key)) {
                throw ConfigError(section + "." + key + ": unknown key");
            }
        }
    }

    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) {
            return trim(*v);
        }
        return std::nullopt;
    };
    auto require = [&](const std::string& path) {
        auto v = get(path);
        if (!v || v->empty()) {
            throw ConfigError(path + ": required");
        }
        return *v;
    };

    RunConfig c;
    c.source = source;

    const long long dim = to_integer("mesh.dim", require("mesh.dim"));
    if (dim < 1 || dim > 3) {
        throw ConfigError("mesh.dim: must be 1, 2 or 3");
    }
    c.dim = static_cast<int>(dim);
    const auto ext = list_items(require("mesh.extents"));
    const auto cells = list_items(require("mesh.cells"));
    if (static_cast<int>(ext.size()) != c.dim) {
        throw ConfigError("mesh.extents: expected " + std::to_string(c.dim) + " value(s)");
    }
    if (static_cast<int>(cells.size()) != c.dim) {
        throw ConfigError("mesh.cells: expected " + std::to_string(c.dim) + " value(s)");
    }
    for (const auto& e : ext) {
        c.extents.push_back(to_double("mesh.extents", e));
        if (!(c.extents.back() > 0.0)) {
            throw ConfigError("mesh.extents: must be > 0");
        }
    }
    for (const auto& e : cells) {
        const long long n = to_integer("mesh.cells", e);
        if (n < 2) {
            throw ConfigError("mesh.cells: must be >= 2");
        }
        c.cells.push_back(static_cast<int>(n));
    }

    if (auto v = get("spaces.n_disp_level")) {
        c.n_disp_level = to_level("spaces.n_disp_level", *v);
    }
    if (auto v = get("spaces.k_stress_level")) {
        c.k_stress_level = to_level("spaces.k_stress_level", *v);
    }

    if (auto v = get("material.lambda")) {
        c.lambda = to_double("material.lambda", *v);
    }
    if (auto v = get("material.mu")) {
        c.mu = to_double("material.mu", *v);
    }
    if (!(c.mu > 0.0)) {
        throw ConfigError("material.mu: must be > 0");
    }
    if (!(3.0 * c.lambda + 2.0 * c.mu > 0.0)) {
        throw ConfigError("material.lambda: need 3 lambda + 2 mu > 0");
    }
    if (auto v = get("material.flow")) {
        c.flow = *v;
        const auto& names = flow_rule_names();
        if (std::find(names.begin(), names.end(), c.flow) == names.end()) {
            throw ConfigError("material.flow: unknown rule '" + c.flow + "'");
        }
    }
    if (auto v = get("material.kappa0")) {
        c.kappa0 = to_double("material.kappa0", *v);
    }
    if (!(c.kappa0 >= 0.0)) {
        throw ConfigError("material.kappa0: must be >= 0");
    }
    if (auto v = get("material.kappa_min")) {
        c.kappa_min = to_double("material.kappa_min", *v);
    }
    if (!(c.kappa_min >= 0.0) || c.kappa_min > c.kappa0) {
        throw ConfigError("material.kappa_min: must lie in [0, kappa0]");
    }
    if (auto v = get("material.admissibility_samples")) {
        c.admissibility_samples = to_integer("material.admissibility_samples", *v);
        if (c.admissibility_samples < 1) {
            throw ConfigError("material.admissibility_samples: must be >= 1");
        }
    }
    if (auto v = get("material.seed")) {
        const long long s = to_integer("material.seed", *v);
        if (s < 0) {
            throw ConfigError("material.seed: must be >= 0");
        }
        c.seed = static_cast<std::uint64_t>(s);
    }

    c.dt = to_double("time.dt", require("time.dt"));
    if (!(c.dt > 0.0)) {
        throw ConfigError("time.dt: must be > 0");
    }
    c.t_end = to_double("time.t_end", require("time.t_end"));
    if (!(c.t_end >= c.dt)) {
        throw ConfigError("time.t_end: must be >= time.dt");
    }
    const double steps = c.t_end / c.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
        throw ConfigError("time.t_end: must be an integer multiple of time.dt");
    }
    if (auto v = get("time.picard_tol")) {
        c.picard_tol = to_double("time.picard_tol", *v);
        if (!(c.picard_tol > 0.0)) {
            throw ConfigError("time.picard_tol: must be > 0");
        }
    }
    if (auto v = get("time.picard_max_iters")) {
        const long long n = to_integer("time.picard_max_iters", *v);
        if (n < 1) {
            throw ConfigError("time.picard_max_iters: must be >= 1");
        }
        c.picard_max_iters = static_cast<int>(n);
    }
    if (auto v = get("time.truncation"); v && *v != "auto") {
        c.truncation = to_double("time.truncation", *v);
        if (!(*c.truncation > 0.0)) {
            throw ConfigError("time.truncation: must be > 0 or 'auto'");
        }
    }
    if (auto v = get("time.splitting")) {
        if (*v == "heat_first") {
            c.splitting = SplittingOrder::heat_first;
        } else if (*v == "mechanics_first") {
            c.splitting = SplittingOrder::mechanics_first;
        } else {
            throw ConfigError("time.splitting: expected heat_first or mechanics_first");
        }
    }

    if (auto v = get("data.u0")) {
        c.u0 = *v;
    }
    if (auto v = get("data.u1")) {
        c.u1 = *v;
    }
    if (auto v = get("data.stress0")) {
        c.stress0 = *v;
    }
    if (auto v = get("data.theta0")) {
        c.theta0 = *v;
    }
    if (auto v = get("data.f")) {
        c.f = *v;
    }
    // Parse eagerly so errors surface as config errors.
    make_vector_field(c.u0, c.dim, "data.u0");
    make_vector_field(c.u1, c.dim, "data.u1");
    make_tensor_field(c.stress0, c.dim, "data.stress0");
    make_scalar_field(c.theta0, c.dim, "data.theta0");
    make_forcing(c.f, c.dim, "data.f");

    if (auto v = get("output.directory")) {
        c.output_directory = *v;
    }
    if (auto v = get("output.snapshot_stride")) {
        const long long n = to_integer("output.snapshot_stride", *v);
        if (n < 0) {
            throw ConfigError("output.snapshot_stride: must be >= 0");
        }
        c.snapshot_stride = static_cast<int>(n);
    }
    if (auto v = get("output.ledger")) {
        if (v->empty()) {
            throw ConfigError("output.ledger: must not be empty");
        }
        c.ledger_file = *v;
    }

    if (auto v = get("diagnostics.c_scheme")) {
        c.c_scheme = to_double("diagnostics.c_scheme", *v);
        if (!(c.c_scheme > 0.0)) {
            throw ConfigError("diagnostics.c_scheme: must be > 0");
        }
    }
    if (auto v = get("oracle.dt")) {
        c.oracle_dt = to_double("oracle.dt", *v);
        if (!(*c.oracle_dt > 0.0)) {
            throw ConfigError("oracle.dt: must be > 0");
        }
    }
    return c;
}

RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    return parse_config(in, path);
}

Mesh make_mesh(const RunConfig& cfg) {
    try {
        return build_mesh(cfg.dim, cfg.extents, cfg.cells);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

GalerkinSystem make_system(const RunConfig& cfg) {
    Mesh mesh = make_mesh(cfg);
    const int n = cfg.n_disp_level.value_or(full_displacement_dofs(mesh));
    const int k = cfg.k_stress_level.value_or(full_stress_dofs(mesh));
    if (n > full_displacement_dofs(mesh)) {
        throw ConfigError("spaces.n_disp_level: mesh provides only " + std::to_string(full_displacement_dofs(mesh)) +
                          " displacement dofs");
    }
    if (k > full_stress_dofs(mesh)) {
        throw ConfigError("spaces.k_stress_level: mesh provides only " + std::to_string(full_stress_dofs(mesh)) +
                          " stress dofs");
    }
    return build_spaces(std::move(mesh), n, k);
}

FlowRule make_flow_rule(const RunConfig& cfg) {
    if (cfg.flow == "linear") {
        return FlowRule::linear(cfg.kappa0);
    }
    if (cfg.flow == "mroz_saturating") {
        return FlowRule::mroz_saturating(cfg.kappa0);
    }
    if (cfg.flow == "temperature_weighted") {
        return FlowRule::temperature_weighted(cfg.kappa0, cfg.kappa_min);
    }
    if (cfg.flow == "test_anti_monotone") {
        const double k = cfg.kappa0;
        return FlowRule::custom(
            "test_anti_monotone", [k](double, const SymTensor& t) { return -k * t; }, k);
    }
    throw ConfigError("material.flow: unknown rule '" + cfg.flow + "'");
}

Material make_material(const RunConfig& cfg) {
    return {ElasticityTensor(cfg.lambda, cfg.mu, cfg.dim), make_flow_rule(cfg)};
}

SolverConfig make_solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.dt = cfg.dt;
    s.t_end = cfg.t_end;
    s.truncation = cfg.truncation;
    s.picard_tol = cfg.picard_tol;
    s.picard_max_iters = cfg.picard_max_iters;
    s.order = cfg.splitting;
    s.admissibility_samples = cfg.admissibility_samples;
    s.admissibility_seed = cfg.seed;
    s.initial.u0 = make_vector_field(cfg.u0, cfg.dim, "data.u0");
    s.initial.u1 = make_vector_field(cfg.u1, cfg.dim, "data.u1");
    s.initial.stress0 = make_tensor_field(cfg.stress0, cfg.dim, "data.stress0");
    s.initial.theta0 = make_scalar_field(cfg.theta0, cfg.dim, "data.theta0");
    if (cfg.f != "@zero") {
        s.forcing = make_forcing(cfg.f, cfg.dim, "data.f");
    }
    return s;
}

FDProblem make_fd_problem(const RunConfig& cfg) {
    if (cfg.dim != 1) {
        throw ConfigError("mesh.dim: the oracle needs a 1D configuration");
    }
    FDProblem p;
    p.length = cfg.extents[0];
    p.nodes = cfg.cells[0] + 1;
    p.dt = cfg.oracle_dt.value_or(cfg.dt);
    p.modulus = cfg.lambda + 2.0 * cfg.mu;
    p.flow = scalar_flow(make_flow_rule(cfg));
    auto u0 = make_scalar_field(cfg.u0, 1, "data.u0");
    auto u1 = make_scalar_field(cfg.u1, 1, "data.u1");
    auto s0 = make_scalar_field(cfg.stress0, 1, "data.stress0");
    auto th = make_scalar_field(cfg.theta0, 1, "data.theta0");
    p.u0 = [u0](double x) { return u0({x, 0.0, 0.0}); };
    p.u1 = [u1](double x) { return u1({x, 0.0, 0.0}); };
    p.stress0 = [s0](double x) { return s0({x, 0.0, 0.0}); };
    p.theta0 = [th](double x) { return th({x, 0.0, 0.0}); };
    if (cfg.f != "@zero") {
        auto f = make_forcing(cfg.f, 1, "data.f");
        p.forcing = [f](double x, double t) { return f({x, 0.0, 0.0}, t)[0]; };
    }
    return p;
}

}  // namespace thermovisco
