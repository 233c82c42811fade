#pragma once

#include "sae/boundary_basis.hpp"
#include "sae/core.hpp"
#include "sae/mesh.hpp"
#include "sae/quadrature.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace sae {

// phi = alpha + beta x + gamma y on a triangle.
struct LinearCoeffs {
    double alpha = 0, beta = 0, gamma = 0;
};

struct ElementPair {
    double M = 0, B = 0;
};

inline ElementPair bulk_element_matrices(const Triangle& t, const LinearCoeffs& fi, const LinearCoeffs& fj)
{
    const double J = reference_triangle_map(t).J;
    auto val = [&](const LinearCoeffs& f, int k) { return f.alpha + f.beta * t.vertices[k].x() + f.gamma * t.vertices[k].y(); };
    double si = 0, sj = 0, sij = 0;
    for (int k = 0; k < 3; ++k) {
        si += val(fi, k);
        sj += val(fj, k);
        sij += val(fi, k) * val(fj, k);
    }
    ElementPair out;
    out.M = 0.5 * J * (fi.beta * fj.beta + fi.gamma * fj.gamma);
    out.B = J / 24.0 * (si * sj + sij);
    return out;
}

// Linear function equal to 1 at vertex k and 0 at the others.
inline LinearCoeffs hat_coefficients(const Triangle& t, int k)
{
    auto mp = reference_triangle_map(t);
    LinearCoeffs c;
    if (k == 0) {
        c.beta = -(mp.eta_x + mp.xi_x);
        c.gamma = -(mp.eta_y + mp.xi_y);
    } else if (k == 1) {
        c.beta = mp.eta_x;
        c.gamma = mp.eta_y;
    } else {
        c.beta = mp.xi_x;
        c.gamma = mp.xi_y;
    }
    c.alpha = 1.0 - c.beta * t.vertices[k].x() - c.gamma * t.vertices[k].y();
    return c;
}

struct RimPair {
    double M = 0, B = 0, F = 0;
};

struct RimQuadrature {
    int n_eta = 4, n_xi = 6;
};

// M and B by tensor Gauss-Legendre on the reference square pulled through the
// element map; F along xi = 0 with the model derivative in the normal row
// direction, times `sign` (+1 row derivative, -1 outward).
inline RimPair rim_element_matrices(const RimElement& e, const Poly8& pi_, const Poly8& pj, double sign = -1.0,
                                    RimQuadrature q = {})
{
    const Rule1D ge = gauss_legendre(q.n_eta), gx = gauss_legendre(q.n_xi);
    RimPair out;
    for (int a = 0; a < q.n_eta; ++a) {
        for (int b = 0; b < q.n_xi; ++b) {
            const double eta = ge.x[a], xi = gx.x[b], w = ge.w[a] * gx.w[b];
            const Eigen::Matrix2d J = e.jacobian(eta, xi);
            const double det = J.determinant();
            if (!(det > 0)) throw GeometryError("rim element map is not orientation preserving");
            const Eigen::Matrix2d Jinv = J.inverse();
            auto gi = poly_gradient(pi_, eta, xi), gj = poly_gradient(pj, eta, xi);
            Eigen::Vector2d Gi = Jinv.transpose() * Eigen::Vector2d(gi[0], gi[1]);
            Eigen::Vector2d Gj = Jinv.transpose() * Eigen::Vector2d(gj[0], gj[1]);
            out.M += w * det * Gi.dot(Gj);
            out.B += w * det * poly_value(pi_, eta, xi) * poly_value(pj, eta, xi);
        }
    }
    // The node-row derivative is (1/h) d/dxi with h the boundary edge length.
    const double len = e.boundary_length();
    const Rule1D g3 = gauss_legendre(3);
    for (int a = 0; a < 3; ++a) {
        const double eta = g3.x[a];
        const double dphi = poly_gradient(pi_, eta, 0.0)[1] / len;
        out.F += g3.w[a] * len * sign * dphi * poly_value(pj, eta, 0.0);
    }
    return out;
}

struct AssembledSystem {
    CSpMat M, B, F;
    int N = 0;
    std::string label;
    double hermitian_defect = 0.0;
    CSpMat A() const { return M - F; }
};

struct RawMatrices {
    SpMat M, B;  // symmetric, raw unknowns
    SpMat G;     // boundary chain mass matrix on a-values
    SpMat trace, deriv;  // raw -> a, raw -> row derivative
};

namespace detail {

// Local raw unknowns of a rim element with their node-slot vectors; the two
// d-slots of a corner element share one unknown.
inline std::vector<std::pair<int, Poly8>> rim_local_functions(const Mesh& m, int j)
{
    RawLayout L(m);
    const int k = (j + 1) % m.N_S;
    std::array<int, 8> slot{L.a(j), L.a(k), L.b(k), L.c(k), L.u(m.row_interface[k]), L.u(m.row_interface[j]), L.c(j), L.b(j)};
    std::map<int, Poly8> acc;
    for (int s = 0; s < 8; ++s) {
        auto it = acc.find(slot[s]);
        if (it == acc.end()) it = acc.emplace(slot[s], Poly8::Zero()).first;
        it->second[s] += 1.0;
    }
    std::vector<std::pair<int, Poly8>> out;
    for (auto& [idx, nodes] : acc) out.emplace_back(idx, V_matrix() * nodes);
    return out;
}

}  // namespace detail

inline RawMatrices assemble_raw(const Mesh& m, RimQuadrature q = {})
{
    RawLayout L(m);
    std::vector<Eigen::Triplet<double>> tm, tb;
    for (const auto& t : m.triangles) {
        std::array<LinearCoeffs, 3> c{hat_coefficients(t, 0), hat_coefficients(t, 1), hat_coefficients(t, 2)};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                auto e = bulk_element_matrices(t, c[a], c[b]);
                tm.emplace_back(L.u(t.vertex_indices[a]), L.u(t.vertex_indices[b]), e.M);
                tb.emplace_back(L.u(t.vertex_indices[a]), L.u(t.vertex_indices[b]), e.B);
            }
    }
    for (int j = 0; j < m.N_S; ++j) {
        auto loc = detail::rim_local_functions(m, j);
        for (auto& [ia, pa] : loc)
            for (auto& [ib, pb] : loc) {
                auto e = rim_element_matrices(m.rim_elements[j], pa, pb, 1.0, q);
                tm.emplace_back(ia, ib, e.M);
                tb.emplace_back(ia, ib, e.B);
            }
    }
    RawMatrices R;
    R.M.resize(L.size(), L.size());
    R.B.resize(L.size(), L.size());
    R.M.setFromTriplets(tm.begin(), tm.end());
    R.B.setFromTriplets(tb.begin(), tb.end());

    std::vector<Eigen::Triplet<double>> tg;
    for (int j = 0; j < m.N_S; ++j) {
        int k = (j + 1) % m.N_S;
        tg.emplace_back(j, j, m.h / 3);
        tg.emplace_back(k, k, m.h / 3);
        tg.emplace_back(j, k, m.h / 6);
        tg.emplace_back(k, j, m.h / 6);
    }
    R.G.resize(m.N_S, m.N_S);
    R.G.setFromTriplets(tg.begin(), tg.end());
    R.trace = detail::trace_map(m);
    R.deriv = detail::row_derivative_map(m);
    return R;
}

namespace detail {

// Upper triangle of K with the lower triangle filled by conjugation.
inline CSpMat hermitian_fill(const CSpMat& K)
{
    CSpMat up = K.triangularView<Eigen::Upper>();
    CSpMat lo = CSpMat(K.triangularView<Eigen::StrictlyUpper>()).adjoint();
    return up + lo;
}

inline double max_abs(const CSpMat& K)
{
    double v = 0;
    for (int c = 0; c < K.outerSize(); ++c)
        for (CSpMat::InnerIterator it(K, c); it; ++it) v = std::max(v, std::abs(it.value()));
    return v;
}

inline void check_hermitian(const CSpMat& K, const char* name, double rel_tol, double& defect, double scale)
{
    CSpMat D = K - CSpMat(K.adjoint());
    scale = std::max({scale, max_abs(K), 1e-300});
    const double d = max_abs(D) / scale;
    defect = std::max(defect, d);
    if (d > rel_tol) throw SolverError(std::string("assembled ") + name + " is not Hermitian (relative defect " + format_double(d) + ")");
}

}  // namespace detail

// Boundary form <phi_i, phidot_j> on raw unknowns with the convention of the basis.
inline SpMat boundary_form_raw(const RawMatrices& R, NormalConvention conv)
{
    SpMat F = R.trace.transpose() * R.G * R.deriv;
    return detail::convention_sign(conv) * F;
}

inline AssembledSystem project(const RawMatrices& R, const SpMat& F_raw, const BoundaryBasis& basis, const std::string& label,
                               double herm_tol = 1e-8)
{
    const CSpMat& T = basis.T;
    const CSpMat Th = T.adjoint();
    AssembledSystem S;
    S.N = basis.N();
    S.label = label;
    CSpMat M = Th * R.M.cast<cplx>() * T;
    CSpMat B = Th * R.B.cast<cplx>() * T;
    CSpMat F = Th * F_raw.cast<cplx>() * T;
    // F is measured against the stiffness scale; it can vanish identically.
    const double mscale = detail::max_abs(M);
    detail::check_hermitian(M, "M", herm_tol, S.hermitian_defect, 0.0);
    detail::check_hermitian(B, "B", herm_tol, S.hermitian_defect, 0.0);
    detail::check_hermitian(F, "F", herm_tol, S.hermitian_defect, mscale);
    S.M = detail::hermitian_fill(M);
    S.B = detail::hermitian_fill(B);
    S.F = detail::hermitian_fill(F);
    S.M.prune(cplx(0.0), 0.0);
    S.B.prune(cplx(0.0), 0.0);
    S.F.prune(cplx(0.0), 0.0);
    return S;
}

inline AssembledSystem assemble(const Mesh& m, const BoundaryBasis& basis, RimQuadrature q = {})
{
    auto R = assemble_raw(m, q);
    return project(R, boundary_form_raw(R, basis.convention), basis, basis.label);
}

// Natural-condition variant: F = <phi, Lambda phi> on the boundary with Lambda
// interpolated linearly between the per-node values.
inline SpMat natural_boundary_form_raw(const Mesh& m, const RawMatrices& R, const std::vector<double>& lambda)
{
    if (static_cast<int>(lambda.size()) != m.N_S) throw ConfigError("natural form needs one Lambda per boundary node");
    std::vector<Eigen::Triplet<double>> tg;
    const Rule1D g = gauss_legendre(3);
    for (int j = 0; j < m.N_S; ++j) {
        int k = (j + 1) % m.N_S;
        double w00 = 0, w01 = 0, w11 = 0;
        for (int q = 0; q < 3; ++q) {
            double t = g.x[q], lam = (1 - t) * lambda[j] + t * lambda[k];
            w00 += g.w[q] * lam * (1 - t) * (1 - t);
            w01 += g.w[q] * lam * (1 - t) * t;
            w11 += g.w[q] * lam * t * t;
        }
        tg.emplace_back(j, j, m.h * w00);
        tg.emplace_back(j, k, m.h * w01);
        tg.emplace_back(k, j, m.h * w01);
        tg.emplace_back(k, k, m.h * w11);
    }
    SpMat G(m.N_S, m.N_S);
    G.setFromTriplets(tg.begin(), tg.end());
    return R.trace.transpose() * G * R.trace;
}

inline AssembledSystem assemble_natural(const Mesh& m, const BoundaryBasis& neumann_basis, const std::vector<double>& lambda,
                                        RimQuadrature q = {})
{
    auto R = assemble_raw(m, q);
    return project(R, natural_boundary_form_raw(m, R, lambda), neumann_basis, "natural");
}

}  // namespace sae
