#include "thermovisco/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace thermovisco {

namespace {

void put(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
}

}  // namespace

void write_snapshot(std::ostream& os, const GalerkinSystem& sys, const SimState& state) {
    const Mesh& mesh = sys.mesh();
    os << "thermovisco-snapshot " << kSnapshotVersion << '\n';
    os << "step " << state.step << '\n';
    os << "t";
    put(os, state.t);
    os << '\n';
    os << "dim " << mesh.dim << '\n';
    os << "nodes " << mesh.node_count() << '\n';
    os << "# x y z u_x u_y u_z v_x v_y v_z theta\n";
    for (int node = 0; node < mesh.node_count(); ++node) {
        const Point& p = mesh.nodes[static_cast<std::size_t>(node)];
        for (double c : p) {
            put(os, c);
        }
        for (const auto* field : {&state.u, &state.v}) {
            for (int comp = 0; comp < 3; ++comp) {
                const int dof = comp < mesh.dim ? sys.disp_dof(node, comp) : -1;
                put(os, dof >= 0 ? (*field)[dof] : 0.0);
            }
        }
        put(os, state.theta[node]);
        os << '\n';
    }
    os << "cells " << mesh.cell_count() << '\n';
    os << "# cx cy cz s_xx s_yy s_zz s_yz s_xz s_xy\n";
    const FieldCoefficients stress{Space::stress, state.stress};
    for (int cell = 0; cell < mesh.cell_count(); ++cell) {
        for (double c : mesh.cell_center(cell)) {
            put(os, c);
        }
        const SymTensor s = stress_in_cell(sys, stress, cell);
        for (int i = 0; i < SymTensor::kSize; ++i) {
            put(os, s[i]);
        }
        os << '\n';
    }
}

void write_snapshot_file(const std::string& path, const GalerkinSystem& sys, const SimState& state) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write snapshot " + path);
    }
    write_snapshot(os, sys, state);
}

}  // namespace thermovisco
