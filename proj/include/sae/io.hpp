#pragma once

#include "sae/assembly.hpp"
#include "sae/boundary_basis.hpp"
#include "sae/mesh.hpp"

#include "json.hpp"

#include <fstream>
#include <string>

namespace sae {

// Matrix Market coordinate, complex general, 1-based indices.
inline void write_matrix_market(const CSpMat& K, const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << "%%MatrixMarket matrix coordinate complex general\n";
    f << K.rows() << ' ' << K.cols() << ' ' << K.nonZeros() << '\n';
    for (int c = 0; c < K.outerSize(); ++c)
        for (CSpMat::InnerIterator it(K, c); it; ++it)
            f << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value().real()) << ' '
              << format_double(it.value().imag()) << '\n';
}

inline CSpMat read_matrix_market(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::string line;
    std::getline(f, line);
    if (line.rfind("%%MatrixMarket matrix coordinate complex general", 0) != 0)
        throw ConfigError("unsupported Matrix Market header in " + path);
    while (f.peek() == '%') std::getline(f, line);
    long rows = 0, cols = 0, nnz = 0;
    f >> rows >> cols >> nnz;
    std::vector<Eigen::Triplet<cplx>> t;
    for (long k = 0; k < nnz; ++k) {
        long r, c;
        double re, im;
        if (!(f >> r >> c >> re >> im)) throw ConfigError("truncated Matrix Market file " + path);
        t.emplace_back(r - 1, c - 1, cplx(re, im));
    }
    CSpMat K(rows, cols);
    K.setFromTriplets(t.begin(), t.end());
    return K;
}

// Debug dump; indices are 1-based.
inline nlohmann::json mesh_to_json(const Mesh& m)
{
    using nlohmann::json;
    json j;
    j["n"] = m.n;
    j["h"] = m.h;
    j["N_B"] = m.N_B;
    j["N_S"] = m.N_S;
    json nodes = json::array();
    for (int k = 0; k < m.N_B; ++k)
        nodes.push_back({{"index", k + 1}, {"x", m.bulk_nodes[k].x()}, {"y", m.bulk_nodes[k].y()},
                         {"star", (m.bulk_lattice[k][0] + m.bulk_lattice[k][1]) % 2 == 0}});
    j["bulk_nodes"] = nodes;
    json tris = json::array();
    for (auto& t : m.triangles)
        tris.push_back({{"vertices", {t.vertex_indices[0] + 1, t.vertex_indices[1] + 1, t.vertex_indices[2] + 1}},
                        {"jacobian", t.jacobian}});
    j["triangles"] = tris;
    json rim = json::array();
    for (int e = 0; e < m.N_S; ++e) {
        const auto& r = m.rim_elements[e];
        rim.push_back({{"interval", e + 1},
                       {"boundary", {{r.boundary_pts[0].x(), r.boundary_pts[0].y()}, {r.boundary_pts[1].x(), r.boundary_pts[1].y()}}},
                       {"interface", {{r.interface_pts[0].x(), r.interface_pts[0].y()}, {r.interface_pts[1].x(), r.interface_pts[1].y()}}},
                       {"interface_nodes", {m.row_interface[e] + 1, m.row_interface[(e + 1) % m.N_S] + 1}},
                       {"corner", r.corner}});
    }
    j["rim_elements"] = rim;
    return j;
}

// One line per (basis function, rim element) with node values and coefficients.
inline void write_basis_csv(const Mesh& m, const BoundaryBasis& B, const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << "function,family,element,part";
    for (const char* s : {"a_k", "a_k1", "b_k1", "c_k1", "d_k1", "d_k", "c_k", "b_k"}) f << ',' << s;
    for (int p = 1; p <= 8; ++p) f << ",p" << p;
    f << '\n';
    RawLayout L(m);
    for (int col = B.n_bulk; col < B.N(); ++col) {
        CVec raw = CVec::Zero(L.size());
        for (CSpMat::InnerIterator it(B.T, col); it; ++it) raw[it.row()] = it.value();
        const char* fam = col < B.family2_offset() ? "1" : "2";
        for (int e = 0; e < m.N_S; ++e) {
            const int k = (e + 1) % m.N_S;
            std::array<cplx, 8> v{raw[L.a(e)], raw[L.a(k)], raw[L.b(k)], raw[L.c(k)], raw[m.row_interface[k]],
                                  raw[m.row_interface[e]], raw[L.c(e)], raw[L.b(e)]};
            bool any = false;
            for (auto& z : v) any |= z != cplx(0.0);
            if (!any) continue;
            for (int part = 0; part < 2; ++part) {
                Poly8 nv;
                for (int s = 0; s < 8; ++s) nv[s] = part ? v[s].imag() : v[s].real();
                Poly8 p = V_matrix() * nv;
                f << col + 1 << ',' << fam << ',' << e + 1 << ',' << (part ? "im" : "re");
                for (int s = 0; s < 8; ++s) f << ',' << format_double(nv[s]);
                for (int s = 0; s < 8; ++s) f << ',' << format_double(p[s]);
                f << '\n';
            }
        }
    }
}

}  // namespace sae
