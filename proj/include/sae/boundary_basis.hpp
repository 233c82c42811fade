#pragma once

#include "sae/boundary_conditions.hpp"
#include "sae/core.hpp"
#include "sae/mesh.hpp"

#include <Eigen/SVD>

#include <array>
#include <vector>

namespace sae {

// Derivative along the node row at the boundary node, from the cubic through
// rows at xi = 0, 1/3, 2/3, 1 (row length h). Points into the domain.
inline double normal_derivative(double a, double b, double c, double d, double h)
{
    return (-5.5 * a + 9.0 * b - 4.5 * c + d) / h;
}

struct LegendrePair {
    double xi0, xi1, zeta0, zeta1;
};

inline LegendrePair legendre_coefficients(double a0, double a1, double n0, double n1, double h)
{
    const double s = std::sqrt(h), r3 = std::sqrt(3.0);
    return {s * (a1 + a0) / 2, s * (a1 - a0) / (2 * r3), s * (n1 + n0) / 2, s * (n1 - n0) / (2 * r3)};
}

// Node slots: [a_k, a_{k+1}, b_{k+1}, c_{k+1}, d_{k+1}, d_k, c_k, b_k].
inline const Eigen::Matrix<double, 8, 8>& V_matrix()
{
    static const Eigen::Matrix<double, 8, 8> V = [] {
        Eigen::Matrix<double, 8, 8> v;
        v << 9, -9, 27, -27, 9, -9, 27, -27,
            -9, 0, 0, 0, 0, 9, -27, 27,
            -18, 18, -45, 36, -9, 9, -36, 45,
            18, 0, 0, 0, 0, -9, 36, -45,
            11, -11, 18, -9, 2, -2, 9, -18,
            -11, 0, 0, 0, 0, 2, -9, 18,
            -2, 2, 0, 0, 0, 0, 0, 0,
            2, 0, 0, 0, 0, 0, 0, 0;
        return Eigen::Matrix<double, 8, 8>(0.5 * v);
    }();
    return V;
}

using Poly8 = Eigen::Matrix<double, 8, 1>;

// Reference position (x = tangential eta, y = normal xi) of each node slot.
inline const std::array<std::array<double, 2>, 8>& node_slot_positions()
{
    static const std::array<std::array<double, 2>, 8> p{{{0, 0}, {1, 0}, {1, 1.0 / 3}, {1, 2.0 / 3},
                                                          {1, 1}, {0, 1}, {0, 2.0 / 3}, {0, 1.0 / 3}}};
    return p;
}

inline Poly8 node_values_to_polynomials(double ak, double ak1, double bk, double bk1, double ck, double ck1,
                                        double dk, double dk1)
{
    Poly8 v;
    v << ak, ak1, bk1, ck1, dk1, dk, ck, bk;
    return V_matrix() * v;
}

inline double poly_value(const Poly8& p, double x, double y)
{
    return ((p[0] * x + p[1]) * y + p[2] * x + p[3]) * y * y + (p[4] * x + p[5]) * y + p[6] * x + p[7];
}

// Returns (d/dx, d/dy) on the reference square.
inline std::array<double, 2> poly_gradient(const Poly8& p, double x, double y)
{
    double px = p[0] * y * y * y + p[2] * y * y + p[4] * y + p[6];
    double py = 3 * (p[0] * x + p[1]) * y * y + 2 * (p[2] * x + p[3]) * y + p[4] * x + p[5];
    return {px, py};
}

enum class NormalConvention {
    row_derivative,  // boundary condition uses the node-row derivative as is
    outward,         // boundary condition uses minus the node-row derivative
};

// Raw unknowns: bulk node values, then a, b, c per boundary row. The d-value of
// row j is the value at bulk node mesh.row_interface[j].
struct RawLayout {
    int N_B = 0, N_S = 0;
    explicit RawLayout(const Mesh& m) : N_B(m.N_B), N_S(m.N_S) {}
    int size() const { return N_B + 3 * N_S; }
    int u(int m) const { return m; }
    int a(int j) const { return N_B + j; }
    int b(int j) const { return N_B + N_S + j; }
    int c(int j) const { return N_B + 2 * N_S + j; }
};

struct BoundarySystem {
    CMat F;  // acts on s = [a; b]
    CMat C;  // acts on w = [c; d]
};

namespace detail {

// Stacked Legendre map [order 0; order 1] of node values on the cyclic chain.
inline Mat legendre_map(int N_S, double h)
{
    Mat L = Mat::Zero(2 * N_S, N_S);
    const double s0 = std::sqrt(h) / 2, s1 = std::sqrt(h) / (2 * std::sqrt(3.0));
    for (int j = 0; j < N_S; ++j) {
        int k = (j + 1) % N_S;
        L(j, j) += s0;
        L(j, k) += s0;
        L(N_S + j, k) += s1;
        L(N_S + j, j) -= s1;
    }
    return L;
}

inline double convention_sign(NormalConvention c) { return c == NormalConvention::outward ? -1.0 : 1.0; }

}  // namespace detail

// Residual (xi - i zeta) - U (xi + i zeta) split into the s- and w-parts:
// F s = C w.
inline BoundarySystem assemble_boundary_system(const BoundaryUnitary& U, double h, int N_S,
                                               NormalConvention conv = NormalConvention::row_derivative)
{
    if (U.dim() != 2 * N_S)
        throw ConfigError("unitary dimension " + std::to_string(U.dim()) + " does not match 2 N_S = " +
                          std::to_string(2 * N_S));
    const Mat L = detail::legendre_map(N_S, h);
    const double sg = detail::convention_sign(conv) / h;
    const CMat Id = CMat::Identity(2 * N_S, 2 * N_S);
    const CMat Pm = Id - U.matrix;
    const CMat Pp = -I * sg * (Id + U.matrix);
    BoundarySystem sys;
    sys.F.resize(2 * N_S, 2 * N_S);
    sys.F.leftCols(N_S) = Pm * L - 5.5 * Pp * L;
    sys.F.rightCols(N_S) = 9.0 * Pp * L;
    sys.C.resize(2 * N_S, 2 * N_S);
    sys.C.leftCols(N_S) = 4.5 * Pp * L;
    sys.C.rightCols(N_S) = -1.0 * Pp * L;
    return sys;
}

// Neumann reference: columns [c-type | d-type] of s = [a; b].
inline Mat neumann_reference(int N_S)
{
    Mat X = Mat::Zero(2 * N_S, 2 * N_S);
    for (int j = 0; j < N_S; ++j) {
        X(j, j) = 1.0;
        X(N_S + j, j) = 10.0 / 9.0;
        X(j, N_S + j) = 1.0;
        X(N_S + j, N_S + j) = 0.5;
    }
    return X;
}

// s-part of the trivial family for the canonical w columns (a = 0, b = c/2 - d/9).
inline Mat trivial_family(int N_S)
{
    Mat S = Mat::Zero(2 * N_S, 2 * N_S);
    for (int j = 0; j < N_S; ++j) {
        S(N_S + j, j) = 0.5;
        S(N_S + j, N_S + j) = -1.0 / 9.0;
    }
    return S;
}

struct BoundarySolution {
    CMat S;  // 2N_S x r solution columns
    int rank = 0;
    double tol = 0.0;
    double compatibility_residual = 0.0;
    Vec singular_values;
    CMat V_null;  // null space of F
    double svd_residual = 0.0;
};

inline BoundarySolution solve_boundary_system(const BoundarySystem& sys, int N_S, bool throw_if_incompatible = true)
{
    const int n2 = 2 * N_S;
    Eigen::BDCSVD<CMat> svd(sys.F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    BoundarySolution out;
    out.singular_values = svd.singularValues();
    const double smax = out.singular_values.size() ? out.singular_values[0] : 0.0;
    out.tol = n2 * eps_of(smax);
    int r = 0;
    while (r < n2 && out.singular_values[r] > out.tol) ++r;
    out.rank = r;
    const CMat& W = svd.matrixU();
    const CMat& V = svd.matrixV();
    CMat W_red = W.leftCols(r), W_null = W.rightCols(n2 - r);
    CMat V_red = V.leftCols(r);
    out.V_null = V.rightCols(n2 - r);

    if (n2 - r > 0) {
        CMat P = W_null.adjoint() * sys.C;
        Eigen::JacobiSVD<CMat> s2(P);
        out.compatibility_residual = s2.singularValues()[0];
    }
    {
        CMat R = sys.F * V_red - W_red * out.singular_values.head(r).asDiagonal();
        out.svd_residual = r ? R.cwiseAbs().maxCoeff() : 0.0;
    }
    if (throw_if_incompatible && out.compatibility_residual > out.tol)
        throw IncompatibleSystemError("System is not compatible: residual " + format_double(out.compatibility_residual) +
                                      " > tol " + format_double(out.tol));

    CMat rhs = W_red.adjoint() * sys.C.leftCols(r);
    CMat x = out.singular_values.head(r).cwiseInverse().asDiagonal() * rhs;
    CMat X = neumann_reference(N_S).leftCols(r).cast<cplx>();
    out.S = V_red * x + out.V_null * (out.V_null.adjoint() * X);
    return out;
}

struct BasisOptions {
    NormalConvention convention = NormalConvention::row_derivative;
    double drop_tol = 1e-13;        // relative magnitude below which basis entries are dropped
    double independence_tol = 1e-8;  // relative Gram-Schmidt residual for keeping a solution
    bool throw_if_incompatible = true;
};

// Basis of the discrete space expressed in raw unknowns (see RawLayout).
// Columns: bulk hats (interface hats carry the trivial d-profile b = -d/9 into
// the rim), the c-type trivial family, and the independent boundary solutions
// with the trivial part removed.
struct BoundaryBasis {
    int N_S = 0, N_B = 0;
    double h = 0.0;
    std::string label;
    NormalConvention convention = NormalConvention::row_derivative;
    int rank_r = 0;
    int n_bulk = 0, n_family1 = 0, n_family2 = 0;
    double rank_tol = 0.0;
    double compatibility_residual = 0.0;
    double svd_residual = 0.0;
    double bc_residual = 0.0;
    CMat family2_s;            // raw solution columns of F s = C w, 2N_S x r
    std::vector<int> kept;     // which solution columns contributed a basis function
    CSpMat T;                  // raw -> basis map, raw.size() x N
    int N() const { return static_cast<int>(T.cols()); }
    int family1_offset() const { return n_bulk; }
    int family2_offset() const { return n_bulk + n_family1; }
};

namespace detail {

// Sparse maps from raw unknowns to boundary traces a and node-row derivatives.
inline SpMat trace_map(const Mesh& m)
{
    RawLayout L(m);
    SpMat A(m.N_S, L.size());
    std::vector<Eigen::Triplet<double>> t;
    for (int j = 0; j < m.N_S; ++j) t.emplace_back(j, L.a(j), 1.0);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

inline SpMat row_derivative_map(const Mesh& m)
{
    RawLayout L(m);
    SpMat D(m.N_S, L.size());
    std::vector<Eigen::Triplet<double>> t;
    for (int j = 0; j < m.N_S; ++j) {
        t.emplace_back(j, L.a(j), -5.5 / m.h);
        t.emplace_back(j, L.b(j), 9.0 / m.h);
        t.emplace_back(j, L.c(j), -4.5 / m.h);
        t.emplace_back(j, L.u(m.row_interface[j]), 1.0 / m.h);
    }
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

}  // namespace detail

// Max |(xi - i zeta) - U (xi + i zeta)| over the given raw-space columns.
inline double boundary_condition_residual(const Mesh& m, const BoundaryUnitary& U, const CSpMat& cols,
                                          NormalConvention conv)
{
    if (cols.cols() == 0) return 0.0;
    const Mat L = detail::legendre_map(m.N_S, m.h);
    const CSpMat A = detail::trace_map(m).cast<cplx>();
    const CSpMat D = (detail::convention_sign(conv) * detail::row_derivative_map(m)).cast<cplx>();
    CMat a = A * cols, nd = D * cols;
    CMat xi = L.cast<cplx>() * a, zeta = L.cast<cplx>() * nd;
    CMat R = (xi - I * zeta) - U.matrix * (xi + I * zeta);
    return R.cwiseAbs().maxCoeff();
}

inline BoundaryBasis build_boundary_basis(const Mesh& m, const BoundaryUnitary& U, const BasisOptions& opt = {})
{
    const int NS = m.N_S;
    RawLayout L(m);
    BoundaryBasis B;
    B.N_S = NS;
    B.N_B = m.N_B;
    B.h = m.h;
    B.label = U.label;
    B.convention = opt.convention;

    auto sys = assemble_boundary_system(U, m.h, NS, opt.convention);
    auto sol = solve_boundary_system(sys, NS, opt.throw_if_incompatible);
    B.rank_r = sol.rank;
    B.rank_tol = sol.tol;
    B.compatibility_residual = sol.compatibility_residual;
    B.svd_residual = sol.svd_residual;
    B.family2_s = sol.S;

    // Each solution minus the trivial function with the same w lies in null(F);
    // keep a linearly independent subset of these differences.
    const Mat triv = trivial_family(NS);
    const int null_dim = 2 * NS - sol.rank;
    std::vector<CVec> ortho, kept_cols;
    for (int k = 0; k < sol.rank && static_cast<int>(kept_cols.size()) < null_dim; ++k) {
        CVec dlt = sol.S.col(k) - triv.col(k).cast<cplx>();
        // The Neumann reference has unit entries, so 1 is the natural scale.
        const double nrm = std::max(dlt.norm(), 1.0);
        CVec q = dlt;
        for (int pass = 0; pass < 2; ++pass)
            for (auto& o : ortho) q -= o * o.dot(q);
        if (q.norm() <= opt.independence_tol * nrm) continue;
        ortho.push_back(q / q.norm());
        kept_cols.push_back(dlt);
        B.kept.push_back(k);
    }

    std::vector<Eigen::Triplet<cplx>> t;
    int col = 0;
    std::vector<std::vector<int>> rows_of(m.N_B);
    for (int j = 0; j < NS; ++j) rows_of[m.row_interface[j]].push_back(j);
    for (int q = 0; q < m.N_B; ++q, ++col) {
        t.emplace_back(L.u(q), col, 1.0);
        for (int j : rows_of[q]) t.emplace_back(L.b(j), col, -1.0 / 9.0);
    }
    B.n_bulk = m.N_B;
    for (int j = 0; j < NS; ++j, ++col) {
        t.emplace_back(L.c(j), col, 1.0);
        t.emplace_back(L.b(j), col, 0.5);
    }
    B.n_family1 = NS;
    for (auto& dlt : kept_cols) {
        const double cut = opt.drop_tol * dlt.cwiseAbs().maxCoeff();
        for (int j = 0; j < NS; ++j) {
            if (std::abs(dlt[j]) > cut) t.emplace_back(L.a(j), col, dlt[j]);
            if (std::abs(dlt[NS + j]) > cut) t.emplace_back(L.b(j), col, dlt[NS + j]);
        }
        ++col;
    }
    B.n_family2 = static_cast<int>(kept_cols.size());
    B.T.resize(L.size(), col);
    B.T.setFromTriplets(t.begin(), t.end());

    // Only columns touching the rim can violate the condition.
    std::vector<int> rim_cols;
    for (int q = 0; q < m.N_B; ++q)
        if (!rows_of[q].empty()) rim_cols.push_back(q);
    for (int c = m.N_B; c < col; ++c) rim_cols.push_back(c);
    CSpMat sub(L.size(), static_cast<Eigen::Index>(rim_cols.size()));
    {
        std::vector<Eigen::Triplet<cplx>> ts;
        for (size_t k = 0; k < rim_cols.size(); ++k)
            for (CSpMat::InnerIterator it(B.T, rim_cols[k]); it; ++it) ts.emplace_back(it.row(), k, it.value());
        sub.setFromTriplets(ts.begin(), ts.end());
    }
    B.bc_residual = boundary_condition_residual(m, U, sub, opt.convention);
    return B;
}

// Residual of the boundary condition for every basis function.
inline double verify_boundary_condition(const Mesh& m, const BoundaryBasis& B, const BoundaryUnitary& U)
{
    return boundary_condition_residual(m, U, B.T, B.convention);
}

}  // namespace sae
