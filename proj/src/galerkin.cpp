#include "thermovisco/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace thermovisco {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr std::array<std::array<int, 2>, 6> kSlotIndex{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

std::array<double, 3> spacings(const Mesh& m) {
    std::array<double, 3> h{1.0, 1.0, 1.0};
    for (int a = 0; a < m.dim; ++a) {
        h[static_cast<std::size_t>(a)] = m.spacing(a);
    }
    return h;
}

Point physical(const Mesh& m, int cell, const Point& local) {
    Point p = m.cell_origin(cell);
    for (int a = 0; a < m.dim; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        p[aa] += local[aa] * m.spacing(a);
    }
    return p;
}

// Mandel coordinate j of sym(e_q (x) grad N).
double strain_mandel(int dim, int j, int q, const Eigen::Vector3d& grad) {
    const int slot = mandel_slot(dim, j);
    const auto [r, t] = kSlotIndex[static_cast<std::size_t>(slot)];
    if (r == t) {
        return r == q ? grad[r] : 0.0;
    }
    double v = 0.0;
    if (r == q) {
        v += grad[t];
    }
    if (t == q) {
        v += grad[r];
    }
    return 0.5 * kSqrt2 * v;
}

}  // namespace

std::string to_string(Space space) {
    switch (space) {
        case Space::displacement: return "displacement";
        case Space::stress: return "stress";
        case Space::temperature: return "temperature";
    }
    return "unknown";
}

std::vector<QuadraturePoint> gauss_rule(int dim, int points_per_axis) {
    std::vector<double> x;
    std::vector<double> w;
    switch (points_per_axis) {
        case 1:
            x = {0.5};
            w = {1.0};
            break;
        case 2: {
            const double d = 0.5 / std::sqrt(3.0);
            x = {0.5 - d, 0.5 + d};
            w = {0.5, 0.5};
            break;
        }
        case 3: {
            const double d = 0.5 * std::sqrt(0.6);
            x = {0.5 - d, 0.5, 0.5 + d};
            w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
            break;
        }
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            x = {0.5 - 0.5 * b, 0.5 - 0.5 * a, 0.5 + 0.5 * a, 0.5 + 0.5 * b};
            w = {0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb};
            break;
        }
        default:
            throw std::invalid_argument("gauss_rule: supported orders are 1..4 points per axis");
    }
    const int n = static_cast<int>(x.size());
    const int ny = dim > 1 ? n : 1;
    const int nz = dim > 2 ? n : 1;
    std::vector<QuadraturePoint> rule;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < n; ++i) {
                QuadraturePoint qp{{x[static_cast<std::size_t>(i)], 0.0, 0.0}, w[static_cast<std::size_t>(i)]};
                if (dim > 1) {
                    qp.local[1] = x[static_cast<std::size_t>(j)];
                    qp.weight *= w[static_cast<std::size_t>(j)];
                }
                if (dim > 2) {
                    qp.local[2] = x[static_cast<std::size_t>(k)];
                    qp.weight *= w[static_cast<std::size_t>(k)];
                }
                rule.push_back(qp);
            }
        }
    }
    return rule;
}

double shape_value(int dim, int corner, const Point& local) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
        const double xi = local[static_cast<std::size_t>(a)];
        v *= ((corner >> a) & 1) ? xi : 1.0 - xi;
    }
    return v;
}

Eigen::Vector3d shape_gradient(int dim, int corner, const Point& local, const std::array<double, 3>& h) {
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (int a = 0; a < dim; ++a) {
        double v = (((corner >> a) & 1) ? 1.0 : -1.0) / h[static_cast<std::size_t>(a)];
        for (int b = 0; b < dim; ++b) {
            if (b == a) {
                continue;
            }
            const double xi = local[static_cast<std::size_t>(b)];
            v *= ((corner >> b) & 1) ? xi : 1.0 - xi;
        }
        g[a] = v;
    }
    return g;
}

int GalerkinSystem::dof_count(Space space) const {
    switch (space) {
        case Space::displacement: return n_disp_;
        case Space::stress: return k_stress_;
        case Space::temperature: return n_temp();
    }
    return 0;
}

int GalerkinSystem::disp_dof(int node, int component) const {
    const int first = node_first_dof_[static_cast<std::size_t>(node)];
    if (first < 0) {
        return -1;
    }
    const int dof = first + component;
    return dof < n_disp_ ? dof : -1;
}

int GalerkinSystem::active_stress_in_cell(int cell) const {
    const int first = cell * stress_components_;
    return std::clamp(k_stress_ - first, 0, stress_components_);
}

Eigen::VectorXd GalerkinSystem::solve_disp_mass(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = disp_mass_solver_->solve(rhs);
    if (disp_mass_solver_->info() != Eigen::Success) {
        throw std::runtime_error("displacement mass solve failed");
    }
    return x;
}

FieldCoefficients GalerkinSystem::zero_field(Space space) const {
    return {space, Eigen::VectorXd::Zero(dof_count(space))};
}

void GalerkinSystem::require(const FieldCoefficients& field, Space space) const {
    if (field.space != space) {
        throw std::invalid_argument("expected " + to_string(space) + " coefficients, got " + to_string(field.space));
    }
    if (field.values.size() != dof_count(space)) {
        throw std::invalid_argument(to_string(space) + " coefficients have length " +
                                    std::to_string(field.values.size()) + ", expected " +
                                    std::to_string(dof_count(space)));
    }
}

int full_displacement_dofs(const Mesh& mesh) {
    int interior = 1;
    for (int a = 0; a < mesh.dim; ++a) {
        interior *= mesh.cells[static_cast<std::size_t>(a)] - 1;
    }
    return interior * mesh.dim;
}

int full_stress_dofs(const Mesh& mesh) { return mesh.cell_count() * sym_components(mesh.dim); }

GalerkinSystem build_spaces(Mesh mesh, int n_disp_level, int k_stress_level) {
    const int n_full = full_displacement_dofs(mesh);
    const int k_full = full_stress_dofs(mesh);
    if (n_disp_level < 1 || n_disp_level > n_full) {
        throw std::invalid_argument("displacement level " + std::to_string(n_disp_level) + " outside [1, " +
                                    std::to_string(n_full) + "] for this mesh");
    }
    if (k_stress_level < 1 || k_stress_level > k_full) {
        throw std::invalid_argument("stress level " + std::to_string(k_stress_level) + " outside [1, " +
                                    std::to_string(k_full) + "] for this mesh");
    }

    GalerkinSystem sys;
    sys.mesh_ = std::move(mesh);
    const Mesh& m = sys.mesh_;
    const int dim = m.dim;
    sys.n_disp_ = n_disp_level;
    sys.k_stress_ = k_stress_level;
    sys.stress_components_ = sym_components(dim);

    sys.node_first_dof_.assign(static_cast<std::size_t>(m.node_count()), -1);
    int next = 0;
    for (int node = 0; node < m.node_count(); ++node) {
        if (!m.is_boundary_node(node)) {
            sys.node_first_dof_[static_cast<std::size_t>(node)] = next;
            for (int q = 0; q < dim; ++q) {
                sys.disp_node_.push_back(node);
            }
            next += dim;
        }
    }
    sys.disp_node_.resize(static_cast<std::size_t>(sys.n_disp_));

    const auto h = spacings(m);
    const auto rule = gauss_rule(dim, 2);
    const int corners = m.corners_per_cell();
    const int nt = m.node_count();

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> mu_t;
    std::vector<Triplet> mt_t;
    std::vector<Triplet> kt_t;
    std::vector<Triplet> b_t;
    std::vector<Triplet> d_t;

    for (int c = 0; c < m.cell_count(); ++c) {
        const auto& conn = m.cell_nodes[static_cast<std::size_t>(c)];
        const double vol = m.cell_volume(c);
        const int active_stress = sys.active_stress_in_cell(c);
        for (const auto& qp : rule) {
            const double w = qp.weight * vol;
            std::array<double, 8> n{};
            std::array<Eigen::Vector3d, 8> g;
            for (int b = 0; b < corners; ++b) {
                n[static_cast<std::size_t>(b)] = shape_value(dim, b, qp.local);
                g[static_cast<std::size_t>(b)] = shape_gradient(dim, b, qp.local, h);
            }
            for (int a = 0; a < corners; ++a) {
                const int na = conn[static_cast<std::size_t>(a)];
                const auto ua = static_cast<std::size_t>(a);
                for (int b = 0; b < corners; ++b) {
                    const int nb = conn[static_cast<std::size_t>(b)];
                    const auto ub = static_cast<std::size_t>(b);
                    mt_t.emplace_back(na, nb, w * n[ua] * n[ub]);
                    kt_t.emplace_back(na, nb, w * g[ua].dot(g[ub]));
                    for (int q = 0; q < dim; ++q) {
                        const int ia = sys.disp_dof(na, q);
                        const int ib = sys.disp_dof(nb, q);
                        if (ia >= 0 && ib >= 0) {
                            mu_t.emplace_back(ia, ib, w * n[ua] * n[ub]);
                        }
                        // D(a_temp, j_disp) = int N_a d_q N_b
                        if (ib >= 0) {
                            d_t.emplace_back(na, ib, w * n[ua] * g[ub][q]);
                        }
                    }
                }
                for (int q = 0; q < dim; ++q) {
                    const int ja = sys.disp_dof(na, q);
                    if (ja < 0) {
                        continue;
                    }
                    for (int j = 0; j < active_stress; ++j) {
                        const double val = strain_mandel(dim, j, q, g[ua]);
                        if (val != 0.0) {
                            b_t.emplace_back(c * sys.stress_components_ + j, ja, w * val);
                        }
                    }
                }
            }
        }
    }

    sys.disp_mass_.resize(sys.n_disp_, sys.n_disp_);
    sys.disp_mass_.setFromTriplets(mu_t.begin(), mu_t.end());
    sys.temp_mass_.resize(nt, nt);
    sys.temp_mass_.setFromTriplets(mt_t.begin(), mt_t.end());
    sys.temp_stiffness_.resize(nt, nt);
    sys.temp_stiffness_.setFromTriplets(kt_t.begin(), kt_t.end());
    sys.strain_op_.resize(sys.k_stress_, sys.n_disp_);
    sys.strain_op_.setFromTriplets(b_t.begin(), b_t.end());
    sys.div_coupling_.resize(nt, sys.n_disp_);
    sys.div_coupling_.setFromTriplets(d_t.begin(), d_t.end());

    sys.stress_gram_.resize(sys.k_stress_);
    for (int i = 0; i < sys.k_stress_; ++i) {
        sys.stress_gram_[i] = m.cell_volume(sys.stress_cell(i));
    }
    sys.temp_weights_ = sys.temp_mass_ * Eigen::VectorXd::Ones(nt);

    auto solver = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
    solver->compute(sys.disp_mass_);
    if (solver->info() != Eigen::Success) {
        throw std::runtime_error("displacement Gram matrix is singular");
    }
    sys.disp_mass_solver_ = std::move(solver);
    return sys;
}

Eigen::VectorXd displacement_load(const GalerkinSystem& sys, const VectorSampler& f) {
    const Mesh& m = sys.mesh();
    const auto rule = gauss_rule(m.dim, 3);
    Eigen::VectorXd b =Eigen::VectorXd::Zero(sys.n_disp());
    for (int c = 0; c < m.cell_count(); ++c) {
        const auto& conn = m.cell_nodes[static_cast<std::size_t>(c)];
        const double vol = m.cell_volume(c);
        for (const auto& qp : rule) {
            const Eigen::Vector3d fv = f(physical(m, c, qp.local));
            for (int a = 0; a < m.corners_per_cell(); ++a) {
                const double wn = qp.weight * vol * shape_value(m.dim, a, qp.local);
                for (int q = 0; q < m.dim; ++q) {
                    const int i = sys.disp_dof(conn[static_cast<std::size_t>(a)], q);
                    if (i >= 0) {
                        b[i] += wn * fv[q];
                    }
                }
            }
        }
    }
    return b;
}

FieldCoefficients project_displacement(const GalerkinSystem& sys, const VectorSampler& field) {
    return {Space::displacement, sys.solve_disp_mass(displacement_load(sys, field))};
}

FieldCoefficients project_stress(const GalerkinSystem& sys, const TensorSampler& field) {
    const Mesh& m = sys.mesh();
    const auto rule = gauss_rule(m.dim, 3);
    const int mc = sys.stress_components();
    FieldCoefficients out = sys.zero_field(Space::stress);
    for (int c = 0; c < m.cell_count(); ++c) {
        const int active = sys.active_stress_in_cell(c);
        if (active == 0) {
            break;
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(mc);
        for (const auto& qp : rule) {
            mean += qp.weight * to_mandel(field(physical(m, c, qp.local)), m.dim);
        }
        for (int j = 0; j < active; ++j) {
            out.values[c * mc + j] = mean[j];
        }
    }
    return out;
}

FieldCoefficients interpolate_temperature(const GalerkinSystem& sys, const ScalarSampler& field) {
    FieldCoefficients out = sys.zero_field(Space::temperature);
    for (int a = 0; a < sys.n_temp(); ++a) {
        out.values[a] = field(sys.mesh().nodes[static_cast<std::size_t>(a)]);
    }
    return out;
}

FieldCoefficients strain(const GalerkinSystem& sys, const FieldCoefficients& disp) {
    sys.require(disp, Space::displacement);
    Eigen::VectorXd s = sys.strain_operator() * disp.values;
    return {Space::stress, s.cwiseQuotient(sys.stress_gram())};
}

Eigen::Vector3d eval_displacement(const GalerkinSystem& sys, const FieldCoefficients& disp, const Point& p) {
    sys.require(disp, Space::displacement);
    const Mesh& m = sys.mesh();
    const auto loc = m.locate(p);
    const auto& conn = m.cell_nodes[static_cast<std::size_t>(loc.cell)];
    Eigen::Vector3d u = Eigen::Vector3d::Zero();
    for (int a = 0; a < m.corners_per_cell(); ++a) {
        const double n = shape_value(m.dim, a, loc.local);
        for (int q = 0; q < m.dim; ++q) {
            const int i = sys.disp_dof(conn[static_cast<std::size_t>(a)], q);
            if (i >= 0) {
                u[q] += n * disp.values[i];
            }
        }
    }
    return u;
}

SymTensor stress_in_cell(const GalerkinSystem& sys, const FieldCoefficients& stress, int cell) {
    const int mc = sys.stress_components();
    const int active = sys.active_stress_in_cell(cell);
    return from_mandel(std::span<const double>(stress.values.data() + static_cast<std::ptrdiff_t>(cell) * mc,
                                               static_cast<std::size_t>(active)),
                       sys.dim());
}

SymTensor eval_stress(const GalerkinSystem& sys, const FieldCoefficients& stress, const Point& p) {
    sys.require(stress, Space::stress);
    return stress_in_cell(sys, stress, sys.mesh().locate(p).cell);
}

double eval_temperature(const GalerkinSystem& sys, const FieldCoefficients& theta, const Point& p) {
    sys.require(theta, Space::temperature);
    const Mesh& m = sys.mesh();
    const auto loc = m.locate(p);
    const auto& conn = m.cell_nodes[static_cast<std::size_t>(loc.cell)];
    double v = 0.0;
    for (int a = 0; a < m.corners_per_cell(); ++a) {
        v += shape_value(m.dim, a, loc.local) * theta.values[conn[static_cast<std::size_t>(a)]];
    }
    return v;
}

double temperature_at_center(const GalerkinSystem& sys, const Eigen::VectorXd& theta, int cell) {
    const Mesh& m = sys.mesh();
    const auto& conn = m.cell_nodes[static_cast<std::size_t>(cell)];
    double v = 0.0;
    for (int a = 0; a < m.corners_per_cell(); ++a) {
        v += theta[conn[static_cast<std::size_t>(a)]];
    }
    return v / m.corners_per_cell();
}

namespace {

template <class Rule>
Eigen::VectorXd divergence_at(const GalerkinSystem& sys, const Eigen::VectorXd& disp, const Rule& points) {
    const Mesh& m = sys.mesh();
    const auto h = spacings(m);
    const auto np = static_cast<int>(points.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.cell_count()) * np);
    for (int c = 0; c < m.cell_count(); ++c) {
        const auto& conn = m.cell_nodes[static_cast<std::size_t>(c)];
        for (int p = 0; p < np; ++p) {
            double div = 0.0;
            for (int a = 0; a < m.corners_per_cell(); ++a) {
                const Eigen::Vector3d g = shape_gradient(m.dim, a, points[static_cast<std::size_t>(p)], h);
                for (int q = 0; q < m.dim; ++q) {
                    const int i = sys.disp_dof(conn[static_cast<std::size_t>(a)], q);
                    if (i >= 0) {
                        div += disp[i] * g[q];
                    }
                }
            }
            out[static_cast<Eigen::Index>(c) * np + p] = div;
        }
    }
    return out;
}

}  // namespace

Eigen::VectorXd divergence_at_gauss(const GalerkinSystem& sys, const Eigen::VectorXd& disp) {
    std::vector<Point> pts;
    for (const auto& qp : gauss_rule(sys.dim(), 2)) {
        pts.push_back(qp.local);
    }
    return divergence_at(sys, disp, pts);
}

double divergence_sup(const GalerkinSystem& sys, const Eigen::VectorXd& disp) {
    std::vector<Point> corners;
    for (int b = 0; b < sys.mesh().corners_per_cell(); ++b) {
        corners.push_back({static_cast<double>(b & 1), static_cast<double>((b >> 1) & 1),
                           static_cast<double>((b >> 2) & 1)});
    }
    const Eigen::VectorXd d = divergence_at(sys, disp, corners);
    return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

double divergence_integral(const GalerkinSystem& sys, const Eigen::VectorXd& disp) {
    return sys.temp_weights().size() ? (sys.div_coupling() * disp).sum() : 0.0;
}

namespace {

template <class Diff>
double l2_accumulate(const GalerkinSystem& sys, const Diff& sq_diff) {
    const Mesh& m = sys.mesh();
    const auto rule = gauss_rule(m.dim, 3);
    double acc = 0.0;
    for (int c = 0; c < m.cell_count(); ++c) {
        const double vol = m.cell_volume(c);
        for (const auto& qp : rule) {
            acc += qp.weight * vol * sq_diff(c, physical(m, c, qp.local));
        }
    }
    return std::sqrt(acc);
}

}  // namespace

double l2_distance(const GalerkinSystem& sys, const FieldCoefficients& disp, const VectorSampler& ref) {
    sys.require(disp, Space::displacement);
    return l2_accumulate(sys, [&](int, const Point& p) {
        return (eval_displacement(sys, disp, p) - ref(p)).squaredNorm();
    });
}

double l2_distance(const GalerkinSystem& sys, const FieldCoefficients& stress, const TensorSampler& ref) {
    sys.require(stress, Space::stress);
    return l2_accumulate(sys, [&](int c, const Point& p) {
        const SymTensor d = stress_in_cell(sys, stress, c) - ref(p);
        return d.dot(d);
    });
}

double l2_distance(const GalerkinSystem& sys, const FieldCoefficients& theta, const ScalarSampler& ref) {
    sys.require(theta, Space::temperature);
    return l2_accumulate(sys, [&](int, const Point& p) {
        const double d = eval_temperature(sys, theta, p) - ref(p);
        return d * d;
    });
}

}  // namespace thermovisco
