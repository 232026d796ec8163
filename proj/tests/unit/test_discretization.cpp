#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "thermovisco/galerkin.hpp"
#include "thermovisco/mesh.hpp"

using namespace thermovisco;

namespace {

Mesh mesh1d(int cells, double length = 1.0) {
    const std::vector<double> e{length};
    const std::vector<int> c{cells};
    return build_mesh(1, e, c);
}

Mesh mesh2d(int nx, int ny, double lx = 1.0, double ly = 1.0) {
    const std::vector<double> e{lx, ly};
    const std::vector<int> c{nx, ny};
    return build_mesh(2, e, c);
}

GalerkinSystem full_system(Mesh m) {
    const int n = full_displacement_dofs(m);
    const int k = full_stress_dofs(m);
    return build_spaces(std::move(m), n, k);
}

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

double min_eigenvalue(const SparseMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(a));
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(Mesh, UniformInterval) {
    const Mesh m = mesh1d(4);
    ASSERT_EQ(m.node_count(), 5);
    ASSERT_EQ(m.cell_count(), 4);
    for (int i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(m.nodes[static_cast<std::size_t>(i)][0], 0.25 * i);
    }
    EXPECT_DOUBLE_EQ(m.spacing(0), 0.25);
}

TEST(Mesh, RectangleCounts) {
    const Mesh m = mesh2d(2, 4, 1.0, 2.0);
    EXPECT_EQ(m.nodes_along(0), 3);
    EXPECT_EQ(m.nodes_along(1), 5);
    EXPECT_EQ(m.node_count(), 15);
    EXPECT_EQ(m.cell_count(), 8);
    EXPECT_DOUBLE_EQ(m.domain_volume(), 2.0);
    for (int c = 0; c < m.cell_count(); ++c) {
        EXPECT_DOUBLE_EQ(m.cell_volume(c), 0.25);
    }
}

TEST(Mesh, BrickCounts) {
    const std::vector<double> e{1.0, 1.0, 1.0};
    const std::vector<int> c{2, 3, 4};
    const Mesh m = build_mesh(3, e, c);
    EXPECT_EQ(m.node_count(), 3 * 4 * 5);
    EXPECT_EQ(m.cell_count(), 24);
}

TEST(Mesh, RejectsBadInput) {
    EXPECT_THROW(mesh1d(1), std::invalid_argument);
    EXPECT_THROW(mesh1d(4, 0.0), std::invalid_argument);
    EXPECT_THROW(mesh1d(4, -1.0), std::invalid_argument);
    const std::vector<double> e{1.0};
    const std::vector<int> c{4};
    EXPECT_THROW(build_mesh(4, e, c), std::invalid_argument);
    EXPECT_THROW(build_mesh(2, e, c), std::invalid_argument);
}

TEST(Mesh, LocateSendsFacesUpward) {
    const Mesh m = mesh1d(4);
    EXPECT_EQ(m.locate({0.25, 0.0, 0.0}).cell, 1);
    EXPECT_EQ(m.locate({1.0, 0.0, 0.0}).cell, 3);
    EXPECT_NEAR(m.locate({0.3, 0.0, 0.0}).local[0], 0.2, 1e-14);
    EXPECT_THROW((void)m.locate({1.5, 0.0, 0.0}), std::out_of_range);
}

TEST(Galerkin, HatMassMatrixEntries) {
    const GalerkinSystem sys = build_spaces(mesh1d(4), 3, 4);
    const double h = 0.25;
    const Eigen::MatrixXd m = dense(sys.disp_mass());
    ASSERT_EQ(m.rows(), 3);
    // Closed form of int phi_i phi_j for hats: h/6 (1, 4, 1).
    Eigen::Matrix3d expected;
    expected << 4, 1, 0, 1, 4, 1, 0, 1, 4;
    expected *= h / 6.0;
    EXPECT_LT((m - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Galerkin, DisplacementBasisVanishesOnBoundary) {
    const GalerkinSystem sys = full_system(mesh2d(3, 4));
    for (int dof = 0; dof < sys.n_disp(); ++dof) {
        EXPECT_FALSE(sys.mesh().is_boundary_node(sys.disp_node(dof)));
    }
    FieldCoefficients u = sys.zero_field(Space::displacement);
    u.values.setOnes();
    for (double x : {0.0, 0.37, 1.0}) {
        EXPECT_EQ(eval_displacement(sys, u, {x, 0.0, 0.0}).norm(), 0.0);
        EXPECT_EQ(eval_displacement(sys, u, {x, 1.0, 0.0}).norm(), 0.0);
        EXPECT_EQ(eval_displacement(sys, u, {0.0, x, 0.0}).norm(), 0.0);
        EXPECT_EQ(eval_displacement(sys, u, {1.0, x, 0.0}).norm(), 0.0);
    }
}

TEST(Galerkin, NeumannStiffnessKernel) {
    for (const Mesh& m : {mesh1d(7), mesh2d(3, 5)}) {
        const GalerkinSystem sys = full_system(m);
        const Eigen::VectorXd c = Eigen::VectorXd::Constant(sys.n_temp(), 3.7);
        EXPECT_LT((sys.temp_stiffness() * c).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Galerkin, OperatorDefiniteness) {
    for (const Mesh& m : {mesh1d(6), mesh2d(3, 4)}) {
        const GalerkinSystem sys = full_system(m);
        EXPECT_LT((dense(sys.disp_mass()) - dense(sys.disp_mass()).transpose()).norm(), 1e-15);
        EXPECT_LT((dense(sys.temp_mass()) - dense(sys.temp_mass()).transpose()).norm(), 1e-15);
        EXPECT_LT((dense(sys.temp_stiffness()) - dense(sys.temp_stiffness()).transpose()).norm(), 1e-13);
        EXPECT_GT(min_eigenvalue(sys.disp_mass()), 0.0);
        EXPECT_GT(min_eigenvalue(sys.temp_mass()), 0.0);
        EXPECT_GT(min_eigenvalue(sys.temp_stiffness()), -1e-12);
        EXPECT_NEAR(sys.temp_weights().sum(), sys.mesh().domain_volume(), 1e-13);
        for (int i = 0; i < sys.k_stress(); ++i) {
            EXPECT_DOUBLE_EQ(sys.stress_gram()[i], sys.mesh().cell_volume(sys.stress_cell(i)));
        }
    }
}

TEST(Galerkin, SpacesNest) {
    const GalerkinSystem coarse = build_spaces(mesh2d(4, 4), 2, 5);
    const GalerkinSystem fine = build_spaces(mesh2d(4, 4), 3, 9);
    const Eigen::MatrixXd mc = dense(coarse.disp_mass());
    const Eigen::MatrixXd mf = dense(fine.disp_mass());
    EXPECT_EQ((mf.topLeftCorner(2, 2) - mc).norm(), 0.0);
    EXPECT_EQ((dense(fine.strain_operator()).topLeftCorner(5, 2) - dense(coarse.strain_operator())).norm(), 0.0);
    EXPECT_EQ((dense(fine.div_coupling()).leftCols(2) - dense(coarse.div_coupling())).norm(), 0.0);
    for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(coarse.disp_node(i), fine.disp_node(i));
    }
}

TEST(Galerkin, RejectsLevelsBeyondMesh) {
    const Mesh m = mesh1d(4);
    EXPECT_THROW(build_spaces(m, 4, 4), std::invalid_argument);
    EXPECT_THROW(build_spaces(m, 3, 5), std::invalid_argument);
    EXPECT_THROW(build_spaces(m, 0, 4), std::invalid_argument);
    EXPECT_NO_THROW(build_spaces(m, 3, 4));
}

TEST(Galerkin, ProjectionOfParabolaMatchesHandSolvedSystem) {
    const GalerkinSystem sys = build_spaces(mesh1d(4), 3, 4);
    const double h = 0.25;
    // int x(1-x) phi_i = h (x_i - x_i^2 - h^2/6) for a hat centred at x_i.
    Eigen::Matrix3d m;
    m << 4, 1, 0, 1, 4, 1, 0, 1, 4;
    m *= h / 6.0;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) {
        const double xi = h * (i + 1);
        b[i] = h * (xi - xi * xi - h * h / 6.0);
    }
    const Eigen::Vector3d expected = m.fullPivLu().solve(b);
    const FieldCoefficients p =
        project_displacement(sys, [](const Point& x) { return Eigen::Vector3d(x[0] * (1.0 - x[0]), 0.0, 0.0); });
    ASSERT_EQ(p.space, Space::displacement);
    EXPECT_LT((p.values - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Galerkin, ProjectionIsIdempotent) {
    const GalerkinSystem sys = full_system(mesh2d(5, 4));
    const FieldCoefficients p = project_displacement(sys, [](const Point& x) {
        return Eigen::Vector3d(std::sin(M_PI * x[0]) * x[1] * (1 - x[1]), std::exp(x[0]) * std::sin(M_PI * x[1]), 0.0);
    });
    const FieldCoefficients q = project_displacement(sys, [&](const Point& x) { return eval_displacement(sys, p, x); });
    EXPECT_LT((p.values - q.values).cwiseAbs().maxCoeff(), 1e-12);

    const FieldCoefficients s = project_stress(sys, [](const Point& x) { return SymTensor(x[0], x[1] * x[1], 0, 0, 0, x[0] * x[1]); });
    const FieldCoefficients s2 = project_stress(sys, [&](const Point& x) { return eval_stress(sys, s, x); });
    EXPECT_LT((s.values - s2.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Galerkin, LevelFieldReprojectsWithTrailingZeros) {
    const Mesh m = mesh1d(8);
    const GalerkinSystem coarse = build_spaces(m, 4, 8);
    const GalerkinSystem fine = build_spaces(m, 7, 8);
    FieldCoefficients c = coarse.zero_field(Space::displacement);
    c.values << 0.3, -1.2, 0.7, 2.0;
    const FieldCoefficients f = project_displacement(fine, [&](const Point& x) { return eval_displacement(coarse, c, x); });
    EXPECT_LT((f.values.head(4) - c.values).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(f.values.tail(3).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Galerkin, ProjectionErrorNonIncreasingInLevel) {
    const Mesh m = mesh1d(10);
    const VectorSampler u0 = [](const Point& x) { return Eigen::Vector3d(std::sin(3.0 * x[0]) * x[0] * (1 - x[0]), 0, 0); };
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 9; ++n) {
        const GalerkinSystem sys = build_spaces(m, n, 10);
        const double err = l2_distance(sys, project_displacement(sys, u0), u0);
        EXPECT_LE(err, previous * (1.0 + 1e-12)) << "n = " << n;
        previous = err;
    }
}

TEST(Galerkin, StressProjectionExamples) {
    const GalerkinSystem sys = build_spaces(mesh1d(2), 1, 2);
    const FieldCoefficients z = project_stress(sys, [](const Point&) { return SymTensor::zero(); });
    EXPECT_EQ(z.values.cwiseAbs().maxCoeff(), 0.0);

    const FieldCoefficients c = project_stress(sys, [](const Point&) { return SymTensor::diag(-2.5, 0, 0); });
    EXPECT_DOUBLE_EQ(c.values[0], -2.5);
    EXPECT_DOUBLE_EQ(c.values[1], -2.5);

    // Cell means of 1 + 2x over [0, 1/2] and [1/2, 1].
    const FieldCoefficients l = project_stress(sys, [](const Point& x) { return SymTensor::diag(1.0 + 2.0 * x[0], 0, 0); });
    EXPECT_NEAR(l.values[0], 1.5, 1e-14);
    EXPECT_NEAR(l.values[1], 2.5, 1e-14);
}

TEST(Galerkin, StressProjectionTwoDimensionalConstant) {
    const GalerkinSystem sys = full_system(mesh2d(3, 3));
    const SymTensor t(1.0, -2.0, 0.0, 0.0, 0.0, 0.5);
    const FieldCoefficients p = project_stress(sys, [&](const Point&) { return t; });
    for (int c = 0; c < sys.mesh().cell_count(); ++c) {
        const SymTensor got = stress_in_cell(sys, p, c);
        EXPECT_NEAR((got - t).max_abs(), 0.0, 1e-14);
    }
}

TEST(Galerkin, StrainOfSingleHat) {
    const GalerkinSystem sys = build_spaces(mesh1d(2), 1, 2);
    EXPECT_EQ(strain(sys, sys.zero_field(Space::displacement)).values.norm(), 0.0);
    FieldCoefficients u = sys.zero_field(Space::displacement);
    u.values[0] = 1.0;
    const FieldCoefficients e = strain(sys, u);
    ASSERT_EQ(e.space, Space::stress);
    EXPECT_NEAR(stress_in_cell(sys, e, 0)[0], 2.0, 1e-14);
    EXPECT_NEAR(stress_in_cell(sys, e, 1)[0], -2.0, 1e-14);
}

TEST(Galerkin, StrainOfProjectedLinearField) {
    const GalerkinSystem sys = full_system(mesh2d(32, 32));
    const FieldCoefficients u = project_displacement(sys, [](const Point& x) { return Eigen::Vector3d(x[0], -x[1], 0.0); });
    const FieldCoefficients e = strain(sys, u);
    // The field does not vanish on the boundary; compare away from the boundary layer.
    double worst = 0.0;
    for (int c = 0; c < sys.mesh().cell_count(); ++c) {
        const auto lat = sys.mesh().cell_lattice(c);
        if (lat[0] < 10 || lat[0] >= 22 || lat[1] < 10 || lat[1] >= 22) continue;
        const SymTensor got = stress_in_cell(sys, e, c);
        worst = std::max(worst, (got - SymTensor::diag(1.0, -1.0, 0.0)).max_abs());
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(Galerkin, StrainIsLinear) {
    const GalerkinSystem sys = full_system(mesh2d(4, 3));
    FieldCoefficients a = sys.zero_field(Space::displacement);
    FieldCoefficients b = sys.zero_field(Space::displacement);
    a.values = Eigen::VectorXd::LinSpaced(sys.n_disp(), -1.0, 2.0);
    b.values = Eigen::VectorXd::LinSpaced(sys.n_disp(), 0.5, -3.0).array().sin();
    FieldCoefficients combo = sys.zero_field(Space::displacement);
    combo.values = 2.5 * a.values - 0.75 * b.values;
    const Eigen::VectorXd lhs = strain(sys, combo).values;
    const Eigen::VectorXd rhs = 2.5 * strain(sys, a).values - 0.75 * strain(sys, b).values;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Galerkin, TagMismatchRejected) {
    const GalerkinSystem sys = build_spaces(mesh1d(4), 3, 4);
    EXPECT_THROW((void)strain(sys, sys.zero_field(Space::temperature)), std::invalid_argument);
    FieldCoefficients wrong = sys.zero_field(Space::displacement);
    wrong.values.resize(2);
    EXPECT_THROW(sys.require(wrong, Space::displacement), std::invalid_argument);
}

TEST(Galerkin, DivergenceCouplingMatchesAnalyticIntegral) {
    const GalerkinSystem sys = full_system(mesh1d(6));
    const FieldCoefficients u =
        project_displacement(sys, [](const Point& x) { return Eigen::Vector3d(std::sin(M_PI * x[0]), 0, 0); });
    // Sum over the temperature partition of unity gives int div u = u(1) - u(0) = 0.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n_temp());
    EXPECT_NEAR(ones.dot(sys.div_coupling() * u.values), 0.0, 1e-14);
    EXPECT_NEAR(divergence_integral(sys, u.values), 0.0, 1e-14);
}
