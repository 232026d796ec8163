#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "thermovisco/mesh.hpp"
#include "thermovisco/sym_tensor.hpp"

namespace thermovisco {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarSampler = std::function<double(const Point&)>;
using VectorSampler = std::function<Eigen::Vector3d(const Point&)>;
using TensorSampler = std::function<SymTensor(const Point&)>;

enum class Space { displacement, stress, temperature };

std::string to_string(Space space);

/// Coefficients of a discrete field with respect to the basis of its space.
struct FieldCoefficients {
    Space space = Space::temperature;
    Eigen::VectorXd values;
};

/// Tensor-product Gauss rule on the reference cell [0,1]^dim.
struct QuadraturePoint {
    Point local;
    double weight;
};
std::vector<QuadraturePoint> gauss_rule(int dim, int points_per_axis);

/// Multilinear shape function of corner `corner` at reference point `local`.
double shape_value(int dim, int corner, const Point& local);
/// Physical gradient of the same shape function on a cell with spacings `h`.
Eigen::Vector3d shape_gradient(int dim, int corner, const Point& local, const std::array<double, 3>& h);

/// Discrete spaces and assembled operators.
///
///  - displacement: vector multilinear "hat" functions on interior nodes
///    (zero on the boundary); full ordering is node-major, component-minor and
///    the level-n space keeps the first n of them.
///  - stress: cellwise constant tensors N_c E_j, E_j the orthonormal basis of
///    the symmetric d x d matrices; cell-major ordering, first k kept.
///  - temperature: multilinear functions on all nodes (no boundary rows
///    removed, so the stiffness has the constants in its kernel).
///
/// Every operator is integrated exactly by the 2-point Gauss rule per axis.
/// Immutable after build_spaces(); safe to share read-only.
class GalerkinSystem {
public:
    [[nodiscard]] const Mesh& mesh() const { return mesh_; }
    [[nodiscard]] int dim() const { return mesh_.dim; }
    [[nodiscard]] int n_disp() const { return n_disp_; }
    [[nodiscard]] int k_stress() const { return k_stress_; }
    [[nodiscard]] int n_temp() const { return mesh_.node_count(); }
    [[nodiscard]] int stress_components() const { return stress_components_; }
    [[nodiscard]] int dof_count(Space space) const;

    /// M_u, n x n.
    [[nodiscard]] const SparseMatrix& disp_mass() const { return disp_mass_; }
    /// M_theta, consistent mass of the temperature space.
    [[nodiscard]] const SparseMatrix& temp_mass() const { return temp_mass_; }
    /// K_theta, Laplacian stiffness with homogeneous Neumann data.
    [[nodiscard]] const SparseMatrix& temp_stiffness() const { return temp_stiffness_; }
    /// B, k x n: B(i, j) = int eps(phi_j) : psi_i.
    [[nodiscard]] const SparseMatrix& strain_operator() const { return strain_op_; }
    /// D, n_temp x n: D(a, j) = int N_a div(phi_j).
    [[nodiscard]] const SparseMatrix& div_coupling() const { return div_coupling_; }
    /// Diagonal of the stress Gram matrix, int psi_i : psi_i = |cell|.
    [[nodiscard]] const Eigen::VectorXd& stress_gram() const { return stress_gram_; }
    /// int N_a over the domain (row sums of M_theta).
    [[nodiscard]] const Eigen::VectorXd& temp_weights() const { return temp_weights_; }

    [[nodiscard]] int disp_node(int dof) const { return disp_node_[static_cast<std::size_t>(dof)]; }
    [[nodiscard]] int disp_component(int dof) const { return dof % mesh_.dim; }
    /// Displacement dof of (node, component), or -1 if not in the active space.
    [[nodiscard]] int disp_dof(int node, int component) const;
    [[nodiscard]] int stress_cell(int dof) const { return dof / stress_components_; }
    [[nodiscard]] int stress_component(int dof) const { return dof % stress_components_; }
    /// Number of active stress dofs living on `cell` (0 .. stress_components()).
    [[nodiscard]] int active_stress_in_cell(int cell) const;

    /// Solves M_u x = rhs with the stored factorization.
    [[nodiscard]] Eigen::VectorXd solve_disp_mass(const Eigen::VectorXd& rhs) const;

    [[nodiscard]] FieldCoefficients zero_field(Space space) const;
    /// Throws std::invalid_argument on tag or size mismatch.
    void require(const FieldCoefficients& field, Space space) const;

private:
    friend GalerkinSystem build_spaces(Mesh mesh, int n_disp_level, int k_stress_level);

    Mesh mesh_;
    int n_disp_ = 0;
    int k_stress_ = 0;
    int stress_components_ = 1;
    std::vector<int> disp_node_;
    std::vector<int> node_first_dof_;
    SparseMatrix disp_mass_;
    SparseMatrix temp_mass_;
    SparseMatrix temp_stiffness_;
    SparseMatrix strain_op_;
    SparseMatrix div_coupling_;
    Eigen::VectorXd stress_gram_;
    Eigen::VectorXd temp_weights_;
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> disp_mass_solver_;
};

[[nodiscard]] int full_displacement_dofs(const Mesh& mesh);
[[nodiscard]] int full_stress_dofs(const Mesh& mesh);

/// Throws std::invalid_argument if a level is < 1 or exceeds the dofs the
/// mesh provides, std::runtime_error if M_u cannot be factorized.
GalerkinSystem build_spaces(Mesh mesh, int n_disp_level, int k_stress_level);

/// b_i = int f . phi_i (3-point Gauss per axis).
Eigen::VectorXd displacement_load(const GalerkinSystem& sys, const VectorSampler& f);

/// L2-orthogonal projection onto the displacement space.
FieldCoefficients project_displacement(const GalerkinSystem& sys, const VectorSampler& field);
/// L2-orthogonal projection onto the stress space (cell means per component).
FieldCoefficients project_stress(const GalerkinSystem& sys, const TensorSampler& field);
/// Nodal interpolation into the temperature space.
FieldCoefficients interpolate_temperature(const GalerkinSystem& sys, const ScalarSampler& field);
/// Stress-space coefficients of eps(u), i.e. the L2 projection of the strain.
FieldCoefficients strain(const GalerkinSystem& sys, const FieldCoefficients& disp);

Eigen::Vector3d eval_displacement(const GalerkinSystem& sys, const FieldCoefficients& disp, const Point& p);
SymTensor eval_stress(const GalerkinSystem& sys, const FieldCoefficients& stress, const Point& p);
SymTensor stress_in_cell(const GalerkinSystem& sys, const FieldCoefficients& stress, int cell);
double eval_temperature(const GalerkinSystem& sys, const FieldCoefficients& theta, const Point& p);
/// Temperature at the cell midpoint (mean of the corner values).
double temperature_at_center(const GalerkinSystem& sys, const Eigen::VectorXd& theta, int cell);

/// Divergence of a displacement-space field at the 2-point Gauss points of
/// every cell, laid out cell-major.
Eigen::VectorXd divergence_at_gauss(const GalerkinSystem& sys, const Eigen::VectorXd& disp);
/// max |div u| over the domain (attained at cell corners for multilinear u).
double divergence_sup(const GalerkinSystem& sys, const Eigen::VectorXd& disp);
/// int div u over the domain.
double divergence_integral(const GalerkinSystem& sys, const Eigen::VectorXd& disp);

/// L2 distances between a discrete field and a reference sampler.
double l2_distance(const GalerkinSystem& sys, const FieldCoefficients& disp, const VectorSampler& ref);
double l2_distance(const GalerkinSystem& sys, const FieldCoefficients& stress, const TensorSampler& ref);
double l2_distance(const GalerkinSystem& sys, const FieldCoefficients& theta, const ScalarSampler& ref);

}  // namespace thermovisco
