#pragma once

#include "sae/core.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace sae {

using Pt = Eigen::Vector2d;

struct Triangle {
    std::array<int, 3> vertex_indices{};  // bulk node indices, counterclockwise
    std::array<Pt, 3> vertices;
    double jacobian = 0.0;
};

struct TriangleMap {
    double eta_x, eta_y, xi_x, xi_y, J;
};

// Affine map (eta,xi) -> x1 + eta (x2-x1) + xi (x3-x1) and its inverse derivatives.
inline TriangleMap reference_triangle_map(const std::array<Pt, 3>& v)
{
    const double x21 = v[1].x() - v[0].x(), y21 = v[1].y() - v[0].y();
    const double x31 = v[2].x() - v[0].x(), y31 = v[2].y() - v[0].y();
    const double det = x21 * y31 - x31 * y21;
    if (std::abs(det) < 1e-14) throw GeometryError("degenerate triangle");
    return {y31 / det, -x31 / det, -y21 / det, x21 / det, std::abs(det)};
}

inline TriangleMap reference_triangle_map(const Triangle& t) { return reference_triangle_map(t.vertices); }

// Logical boundary element attached to boundary interval j (nodes j, j+1).
// Rows: row 0 belongs to node j, row 1 to node j+1. Each row runs from its
// boundary node (xi=0) to its bulk-interface node (xi=1).
struct RimElement {
    int interval = 0;
    std::array<Pt, 2> boundary_pts;   // a-nodes
    std::array<Pt, 2> interface_pts;  // d-nodes
    bool corner = false;              // lives on a physical corner square
    int orientation = +1;             // counterclockwise traversal of the boundary edge

    Pt map(double eta, double xi) const
    {
        Pt r0 = boundary_pts[0] + xi * (interface_pts[0] - boundary_pts[0]);
        Pt r1 = boundary_pts[1] + xi * (interface_pts[1] - boundary_pts[1]);
        return (1.0 - eta) * r0 + eta * r1;
    }

    // Columns: d/d eta, d/d xi.
    Eigen::Matrix2d jacobian(double eta, double xi) const
    {
        Pt r0 = boundary_pts[0] + xi * (interface_pts[0] - boundary_pts[0]);
        Pt r1 = boundary_pts[1] + xi * (interface_pts[1] - boundary_pts[1]);
        Pt d0 = interface_pts[0] - boundary_pts[0];
        Pt d1 = interface_pts[1] - boundary_pts[1];
        Eigen::Matrix2d J;
        J.col(0) = r1 - r0;
        J.col(1) = (1.0 - eta) * d0 + eta * d1;
        return J;
    }

    double boundary_length() const { return (boundary_pts[1] - boundary_pts[0]).norm(); }
};

struct Mesh {
    int n = 0;
    double h = 0.0;
    int N_B = 0;
    int N_S = 0;

    std::vector<Pt> bulk_nodes;
    std::vector<std::array<int, 2>> bulk_lattice;  // (i,j) lattice coordinates
    std::vector<int> lattice_to_bulk;              // n*n, -1 outside the bulk
    std::vector<Triangle> triangles;

    std::vector<Pt> boundary_nodes;  // N_S, counterclockwise from (0,0)
    std::vector<int> row_interface;  // bulk node carrying the d-value of row j
    std::vector<RimElement> rim_elements;

    int bulk_index(int i, int j) const { return lattice_to_bulk[static_cast<size_t>(j) * n + i]; }
    int side_length() const { return n - 1; }
    bool is_corner_node(int j) const { return j % (n - 1) == 0; }
    // Bulk nodes with fewer than 8 or 4 incident triangles (interface ring).
    bool is_interface_node(int m) const
    {
        auto [i, j] = bulk_lattice[m];
        return i == 1 || j == 1 || i == n - 2 || j == n - 2;
    }
};

namespace detail {

// Concentric rings, counterclockwise, each ring starting at its bottom-left node.
inline std::vector<std::array<int, 2>> ring_order(int n)
{
    std::vector<std::array<int, 2>> out;
    for (int l = 1; l <= (n - 1) / 2; ++l) {
        int lo = l, hi = n - 1 - l;
        if (lo == hi) {
            out.push_back({lo, lo});
            break;
        }
        for (int i = lo; i < hi; ++i) out.push_back({i, lo});
        for (int j = lo; j < hi; ++j) out.push_back({hi, j});
        for (int i = hi; i > lo; --i) out.push_back({i, hi});
        for (int j = hi; j > lo; --j) out.push_back({lo, j});
    }
    return out;
}

}  // namespace detail

inline Mesh build_mesh(int n)
{
    if (n < 5 || n % 2 == 0) throw ConfigError("n must be odd and >= 5 (got " + std::to_string(n) + ")");
    Mesh m;
    m.n = n;
    m.h = 1.0 / (n - 1);
    m.N_B = (n - 2) * (n - 2);
    m.N_S = 4 * (n - 1);
    const double h = m.h;

    m.bulk_lattice = detail::ring_order(n);
    m.lattice_to_bulk.assign(static_cast<size_t>(n) * n, -1);
    for (int k = 0; k < m.N_B; ++k) {
        auto [i, j] = m.bulk_lattice[k];
        m.lattice_to_bulk[static_cast<size_t>(j) * n + i] = k;
        m.bulk_nodes.emplace_back(i * h, j * h);
    }

    auto tri = [&](std::array<int, 2> p, std::array<int, 2> q, std::array<int, 2> r) {
        Triangle t;
        t.vertex_indices = {m.bulk_index(p[0], p[1]), m.bulk_index(q[0], q[1]), m.bulk_index(r[0], r[1])};
        for (int k = 0; k < 3; ++k) t.vertices[k] = m.bulk_nodes[t.vertex_indices[k]];
        t.jacobian = reference_triangle_map(t.vertices).J;
        m.triangles.push_back(t);
    };
    for (int j = 1; j <= n - 3; ++j) {
        for (int i = 1; i <= n - 3; ++i) {
            if ((i + j) % 2 == 0) {
                tri({i, j}, {i + 1, j}, {i + 1, j + 1});
                tri({i, j}, {i + 1, j + 1}, {i, j + 1});
            } else {
                tri({i, j}, {i + 1, j}, {i, j + 1});
                tri({i + 1, j}, {i + 1, j + 1}, {i, j + 1});
            }
        }
    }

    const int L = n - 1;
    m.boundary_nodes.resize(m.N_S);
    m.row_interface.resize(m.N_S);
    for (int j = 0; j < m.N_S; ++j) {
        int s = j / L, t = j % L;
        std::array<int, 2> a{}, d{};
        switch (s) {
        case 0: a = {t, 0}; d = {t, 1}; break;
        case 1: a = {L, t}; d = {n - 2, t}; break;
        case 2: a = {L - t, L}; d = {L - t, n - 2}; break;
        default: a = {0, L - t}; d = {1, L - t}; break;
        }
        // Corner rows run along the diagonal to the bulk corner.
        d[0] = std::clamp(d[0], 1, n - 2);
        d[1] = std::clamp(d[1], 1, n - 2);
        m.boundary_nodes[j] = Pt(a[0] * h, a[1] * h);
        m.row_interface[j] = m.bulk_index(d[0], d[1]);
    }

    for (int j = 0; j < m.N_S; ++j) {
        int k = (j + 1) % m.N_S;
        RimElement e;
        e.interval = j;
        e.boundary_pts = {m.boundary_nodes[j], m.boundary_nodes[k]};
        e.interface_pts = {m.bulk_nodes[m.row_interface[j]], m.bulk_nodes[m.row_interface[k]]};
        e.corner = m.is_corner_node(j) || m.is_corner_node(k);
        m.rim_elements.push_back(e);
    }
    return m;
}

}  // namespace sae
