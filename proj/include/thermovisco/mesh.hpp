#pragma once

#include <array>
#include <span>
#include <vector>

namespace thermovisco {

using Point = std::array<double, 3>;

/// Uniform tensor-product mesh of the box [0, L_0] x ... x [0, L_{dim-1}].
///
/// Cells are intervals, rectangles or bricks with 2^dim corner nodes. Corner
/// `b` of a cell (bit a of b set => upper face along axis a) is stored at
/// position b of the connectivity entry.
struct Mesh {
    int dim = 1;
    std::array<double, 3> extents{1.0, 1.0, 1.0};
    std::array<int, 3> cells{1, 1, 1};
    std::vector<Point> nodes;
    std::vector<std::array<int, 8>> cell_nodes;

    [[nodiscard]] int node_count() const { return static_cast<int>(nodes.size()); }
    [[nodiscard]] int cell_count() const { return static_cast<int>(cell_nodes.size()); }
    [[nodiscard]] int corners_per_cell() const { return 1 << dim; }
    [[nodiscard]] int nodes_along(int axis) const { return axis < dim ? cells[static_cast<std::size_t>(axis)] + 1 : 1; }
    [[nodiscard]] double spacing(int axis) const;
    [[nodiscard]] double cell_volume(int cell) const;
    [[nodiscard]] double domain_volume() const;

    [[nodiscard]] int node_index(int i, int j = 0, int k = 0) const;
    [[nodiscard]] int cell_index(int i, int j = 0, int k = 0) const;
    /// Lattice position of a node along each axis.
    [[nodiscard]] std::array<int, 3> node_lattice(int node) const;
    [[nodiscard]] std::array<int, 3> cell_lattice(int cell) const;
    [[nodiscard]] bool is_boundary_node(int node) const;
    [[nodiscard]] Point cell_origin(int cell) const;
    [[nodiscard]] Point cell_center(int cell) const;

    struct Location {
        int cell;
        Point local;  ///< reference coordinates in [0, 1]^dim
    };
    /// Cell containing `p` (points on shared faces go to the upper cell, the
    /// domain's upper face to the last cell). Throws if `p` lies outside.
    [[nodiscard]] Location locate(const Point& p) const;
};

/// Throws std::invalid_argument for dim outside {1,2,3}, mismatched list
/// lengths, non-positive extents or fewer than 2 cells along an axis.
Mesh build_mesh(int dim, std::span<const double> extents, std::span<const int> cells);

}  // namespace thermovisco
