#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

namespace thermovisco {

/// Symmetric 3x3 tensor stored by its six independent entries in the order
/// (xx, yy, zz, yz, xz, xy).
///
/// The entries are the actual tensor components (not engineering strains), so
/// the Frobenius product weights the three off-diagonal slots by two. Lower
/// dimensional problems embed their d x d tensors in the upper-left block.
class SymTensor {
public:
    static constexpr int kSize = 6;

    SymTensor() = default;
    SymTensor(double xx, double yy, double zz, double yz, double xz, double xy)
        : c_{xx, yy, zz, yz, xz, xy} {}

    static SymTensor zero() { return {}; }
    static SymTensor diag(double xx, double yy, double zz) { return {xx, yy, zz, 0.0, 0.0, 0.0}; }
    /// Identity of the leading `dim` x `dim` block.
    static SymTensor identity(int dim = 3);
    /// Throws std::invalid_argument if `m` is not symmetric to 1e-12 (relative).
    static SymTensor from_matrix(const Eigen::Matrix3d& m);

    [[nodiscard]] Eigen::Matrix3d to_matrix() const;

    double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    /// Full-index access, i,j in [0,3).
    [[nodiscard]] double operator()(int i, int j) const;

    [[nodiscard]] double trace() const { return c_[0] + c_[1] + c_[2]; }
    /// Frobenius product A:B.
    [[nodiscard]] double dot(const SymTensor& other) const;
    [[nodiscard]] double norm() const;
    [[nodiscard]] double max_abs() const;

    SymTensor& operator+=(const SymTensor& o);
    SymTensor& operator-=(const SymTensor& o);
    SymTensor& operator*=(double s);

    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
    friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
    friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
    friend SymTensor operator-(SymTensor a) { return a *= -1.0; }

    [[nodiscard]] const std::array<double, kSize>& components() const { return c_; }

private:
    std::array<double, kSize> c_{};
};

/// Number of independent symmetric components in dimension `dim` (1, 3 or 6).
int sym_components(int dim);

// Orthonormal ("Mandel") coordinates of the d x d block: diagonal entries as is,
// off-diagonal entries scaled by sqrt(2). In these coordinates the Frobenius
// product is the Euclidean dot product. Ordering per dim:
//   1: xx   2: xx, yy, xy   3: xx, yy, zz, yz, xz, xy
Eigen::VectorXd to_mandel(const SymTensor& t, int dim);
SymTensor from_mandel(std::span<const double> coords, int dim);
/// Voigt slot in SymTensor holding Mandel coordinate `j` for dimension `dim`.
int mandel_slot(int dim, int j);

}  // namespace thermovisco
