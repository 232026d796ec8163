#include "thermovisco/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace thermovisco {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// (row, col) of each Voigt slot.
constexpr std::array<std::array<int, 2>, 6> kSlotIndex{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

constexpr std::array<int, 1> kMandel1{0};
constexpr std::array<int, 3> kMandel2{0, 1, 5};
constexpr std::array<int, 6> kMandel3{0, 1, 2, 3, 4, 5};

int slot_of(int i, int j) {
    if (i == j) {
        return i;
    }
    const int s = i + j;  // (1,2) -> 3, (0,2) -> 2, (0,1) -> 1
    return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

void check_dim(int dim) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("dimension must be 1, 2 or 3, got " + std::to_string(dim));
    }
}

}  // namespace

SymTensor SymTensor::identity(int dim) {
    check_dim(dim);
    SymTensor t;
    for (int i = 0; i < dim; ++i) {
        t[i] = 1.0;
    }
    return t;
}

SymTensor SymTensor::from_matrix(const Eigen::Matrix3d& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("matrix is not symmetric");
    }
    return {m(0, 0), m(1, 1), m(2, 2), 0.5 * (m(1, 2) + m(2, 1)), 0.5 * (m(0, 2) + m(2, 0)),
            0.5 * (m(0, 1) + m(1, 0))};
}

Eigen::Matrix3d SymTensor::to_matrix() const {
    Eigen::Matrix3d m;
    for (int s = 0; s < kSize; ++s) {
        const auto [i, j] = kSlotIndex[static_cast<std::size_t>(s)];
        m(i, j) = c_[static_cast<std::size_t>(s)];
        m(j, i) = c_[static_cast<std::size_t>(s)];
    }
    return m;
}

double SymTensor::operator()(int i, int j) const { return (*this)[slot_of(i, j)]; }

double SymTensor::dot(const SymTensor& o) const {
    return c_[0] * o.c_[0] + c_[1] * o.c_[1] + c_[2] * o.c_[2] +
           2.0 * (c_[3] * o.c_[3] + c_[4] * o.c_[4] + c_[5] * o.c_[5]);
}

double SymTensor::norm() const { return std::sqrt(dot(*this)); }

double SymTensor::max_abs() const {
    double m = 0.0;
    for (double v : c_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) {
        c_[i] += o.c_[i];
    }
    return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) {
        c_[i] -= o.c_[i];
    }
    return *this;
}

SymTensor& SymTensor::operator*=(double s) {
    for (double& v : c_) {
        v *= s;
    }
    return *this;
}

int sym_components(int dim) {
    check_dim(dim);
    return dim * (dim + 1) / 2;
}

int mandel_slot(int dim, int j) {
    check_dim(dim);
    switch (dim) {
        case 1: return kMandel1.at(static_cast<std::size_t>(j));
        case 2: return kMandel2.at(static_cast<std::size_t>(j));
        default: return kMandel3.at(static_cast<std::size_t>(j));
    }
}

Eigen::VectorXd to_mandel(const SymTensor& t, int dim) {
    const int m = sym_components(dim);
    Eigen::VectorXd out(m);
    for (int j = 0; j < m; ++j) {
        const int s = mandel_slot(dim, j);
        out[j] = s < 3 ? t[s] : kSqrt2 * t[s];
    }
    return out;
}

SymTensor from_mandel(std::span<const double> coords, int dim) {
    const int m = sym_components(dim);
    if (static_cast<int>(coords.size()) > m) {
        throw std::invalid_argument("too many Mandel coordinates for dimension");
    }
    SymTensor t;
    for (int j = 0; j < static_cast<int>(coords.size()); ++j) {
        const int s = mandel_slot(dim, j);
        t[s] = s < 3 ? coords[static_cast<std::size_t>(j)] : coords[static_cast<std::size_t>(j)] / kSqrt2;
    }
    return t;
}

}  // namespace thermovisco
