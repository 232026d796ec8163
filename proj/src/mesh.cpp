#include "thermovisco/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace thermovisco {

double Mesh::spacing(int axis) const {
    const auto a = static_cast<std::size_t>(axis);
    return extents[a] / cells[a];
}

double Mesh::cell_volume(int /*cell*/) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
        v *= spacing(a);
    }
    return v;
}

double Mesh::domain_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
        v *= extents[static_cast<std::size_t>(a)];
    }
    return v;
}

int Mesh::node_index(int i, int j, int k) const { return i + nodes_along(0) * (j + nodes_along(1) * k); }

int Mesh::cell_index(int i, int j, int k) const {
    const int cx = cells[0];
    const int cy = dim > 1 ? cells[1] : 1;
    return i + cx * (j + cy * k);
}

std::array<int, 3> Mesh::node_lattice(int node) const {
    const int nx = nodes_along(0);
    const int ny = nodes_along(1);
    return {node % nx, (node / nx) % ny, node / (nx * ny)};
}

std::array<int, 3> Mesh::cell_lattice(int cell) const {
    const int cx = cells[0];
    const int cy = dim > 1 ? cells[1] : 1;
    return {cell % cx, (cell / cx) % cy, cell / (cx * cy)};
}

bool Mesh::is_boundary_node(int node) const {
    const auto lat = node_lattice(node);
    for (int a = 0; a < dim; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        if (lat[aa] == 0 || lat[aa] == cells[aa]) {
            return true;
        }
    }
    return false;
}

Point Mesh::cell_origin(int cell) const {
    const auto lat = cell_lattice(cell);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        p[aa] = lat[aa] * spacing(a);
    }
    return p;
}

Point Mesh::cell_center(int cell) const {
    Point p = cell_origin(cell);
    for (int a = 0; a < dim; ++a) {
        p[static_cast<std::size_t>(a)] += 0.5 * spacing(a);
    }
    return p;
}

Mesh::Location Mesh::locate(const Point& p) const {
    std::array<int, 3> lat{0, 0, 0};
    Point local{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        const double h = spacing(a);
        const double slack = 1e-12 * extents[aa];
        if (p[aa] < -slack || p[aa] > extents[aa] + slack) {
            throw std::out_of_range("point outside the mesh domain");
        }
        int i = static_cast<int>(std::floor(p[aa] / h));
        i = std::clamp(i, 0, cells[aa] - 1);
        lat[aa] = i;
        local[aa] = std::clamp(p[aa] / h - i, 0.0, 1.0);
    }
    return {cell_index(lat[0], lat[1], lat[2]), local};
}

Mesh build_mesh(int dim, std::span<const double> extents, std::span<const int> cells) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("mesh: dim must be 1, 2 or 3");
    }
    if (static_cast<int>(extents.size()) != dim || static_cast<int>(cells.size()) != dim) {
        throw std::invalid_argument("mesh: need one extent and one cell count per axis");
    }
    Mesh m;
    m.dim = dim;
    for (int a = 0; a < dim; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        if (!(extents[aa] > 0.0)) {
            throw std::invalid_argument("mesh: extent along axis " + std::to_string(a) + " must be > 0");
        }
        if (cells[aa] < 2) {
            throw std::invalid_argument("mesh: need at least 2 cells along axis " + std::to_string(a));
        }
        m.extents[aa] = extents[aa];
        m.cells[aa] = cells[aa];
    }

    const int nx = m.nodes_along(0);
    const int ny = m.nodes_along(1);
    const int nz = m.nodes_along(2);
    m.nodes.reserve(static_cast<std::size_t>(nx * ny * nz));
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                m.nodes.push_back({i * m.spacing(0), dim > 1 ? j * m.spacing(1) : 0.0,
                                   dim > 2 ? k * m.spacing(2) : 0.0});
            }
        }
    }

    const int cx = m.cells[0];
    const int cy = dim > 1 ? m.cells[1] : 1;
    const int cz = dim > 2 ? m.cells[2] : 1;
    m.cell_nodes.reserve(static_cast<std::size_t>(cx * cy * cz));
    for (int k = 0; k < cz; ++k) {
        for (int j = 0; j < cy; ++j) {
            for (int i = 0; i < cx; ++i) {
                std::array<int, 8> conn{};
                conn.fill(-1);
                for (int b = 0; b < m.corners_per_cell(); ++b) {
                    conn[static_cast<std::size_t>(b)] = m.node_index(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
                }
                m.cell_nodes.push_back(conn);
            }
        }
    }
    return m;
}

}  // namespace thermovisco
