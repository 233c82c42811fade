#pragma once

#include "sae/assembly.hpp"
#include "sae/boundary_basis.hpp"
#include "sae/core.hpp"
#include "sae/mesh.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <functional>
#include <random>
#include <sstream>
#include <vector>

namespace sae {

struct SolverOptions {
    int dense_threshold = 1500;
    double tol = 1e-11;       // Ritz residual relative to the Ritz value of the inverse
    int max_basis = 600;      // Krylov basis vectors before giving up
    int block = 0;            // 0: max(k, 4)
    unsigned seed = 12345;
};

struct SpectralSolution {
    Vec eigenvalues;
    CMat eigenvectors;  // N x k, B-orthonormal
    Vec residuals;      // ||A u - lambda B u|| / ||u||
    std::vector<int> degenerate_with_previous;
    std::string path;
    double shift = 0.0;
    int krylov_dim = 0;
};

namespace detail {

inline void fix_phase(CMat& U)
{
    for (Eigen::Index c = 0; c < U.cols(); ++c) {
        Eigen::Index imax = 0;
        U.col(c).cwiseAbs().maxCoeff(&imax);
        cplx v = U(imax, c);
        if (std::abs(v) > 0) U.col(c) *= std::conj(v) / std::abs(v);
    }
}

inline void finish(SpectralSolution& s, const CSpMat& A, const CSpMat& B)
{
    const int k = static_cast<int>(s.eigenvalues.size());
    fix_phase(s.eigenvectors);
    s.residuals.resize(k);
    s.degenerate_with_previous.assign(k, 0);
    for (int i = 0; i < k; ++i) {
        CVec u = s.eigenvectors.col(i);
        CVec r = A * u - s.eigenvalues[i] * (B * u);
        s.residuals[i] = r.norm() / u.norm();
        if (i > 0 && std::abs(s.eigenvalues[i] - s.eigenvalues[i - 1]) <= 1e-6 * (1.0 + std::abs(s.eigenvalues[i])))
            s.degenerate_with_previous[i] = 1;
    }
}

inline SpectralSolution solve_dense(const CSpMat& A, const CSpMat& B, int k)
{
    CMat Ad(A), Bd(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<CMat> es(Ad, Bd, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw SolverError("mass matrix not positive definite (dense generalized solver failed)");
    SpectralSolution s;
    s.eigenvalues = es.eigenvalues().head(k);
    s.eigenvectors = es.eigenvectors().leftCols(k);
    s.path = "dense";
    return s;
}

// Block Krylov method on (A - sigma B)^{-1} B, orthogonal in the B inner product.
inline SpectralSolution solve_shift_invert(const CSpMat& A, const CSpMat& B, int k, const SolverOptions& opt)
{
    const Eigen::Index N = A.rows();
    Eigen::SimplicialLLT<CSpMat> mass(B);
    if (mass.info() != Eigen::Success) throw SolverError("mass matrix not positive definite");

    double sigma = -1.0;
    Eigen::SimplicialLLT<CSpMat> K;
    K.analyzePattern(A - sigma * B);
    for (int tries = 0;; ++tries) {
        K.factorize(A - sigma * B);
        if (K.info() == Eigen::Success) break;
        if (tries > 60) throw SolverError("could not find a shift below the spectrum");
        sigma = 2.0 * sigma - 10.0;
    }

    const int p = std::min<int>(static_cast<int>(N), opt.block > 0 ? opt.block : std::max(k, 4));
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;

    CMat Q(N, 0), BQ(N, 0);
    CMat H;
    auto borth_block = [&](CMat W, CMat& coeffs) -> std::pair<CMat, CMat> {
        // Two passes of block Gram-Schmidt against Q.
        coeffs = CMat::Zero(Q.cols(), W.cols());
        for (int pass = 0; pass < 2; ++pass) {
            if (Q.cols() == 0) break;
            CMat c = BQ.adjoint() * W;
            W -= Q * c;
            coeffs += c;
        }
        CMat BW = B * W;
        CMat G = W.adjoint() * BW;
        G = 0.5 * (G + G.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMat> ge(G);
        // Orthonormalize through the eigen-decomposition of the Gram matrix,
        // dropping directions that have collapsed.
        const double gmax = ge.eigenvalues().cwiseAbs().maxCoeff();
        std::vector<int> keep;
        for (int i = static_cast<int>(G.rows()) - 1; i >= 0; --i)
            if (ge.eigenvalues()[i] > 1e-20 * gmax && ge.eigenvalues()[i] > 0) keep.push_back(i);
        CMat X(W.cols(), keep.size());
        for (size_t c = 0; c < keep.size(); ++c)
            X.col(c) = ge.eigenvectors().col(keep[c]) / std::sqrt(ge.eigenvalues()[keep[c]]);
        CMat Wn = W * X;
        // R such that W = Wn * R.
        CMat R = Wn.adjoint() * BW;
        return {Wn, R};
    };

    CMat W0(N, p);
    for (Eigen::Index i = 0; i < N; ++i)
        for (int c = 0; c < p; ++c) W0(i, c) = cplx(nd(rng), nd(rng));
    CMat dummy;
    {
        auto [Qn, R] = borth_block(W0, dummy);
        Q = Qn;
        BQ = B * Q;
    }
    H = CMat::Zero(0, 0);
    SpectralSolution out;
    out.path = "shift-invert";
    out.shift = sigma;
    Eigen::Index last_start = 0;
    for (;;) {
        const Eigen::Index start = last_start;
        const Eigen::Index cur = Q.cols() - start;
        CMat W(N, cur);
        for (Eigen::Index c = 0; c < cur; ++c) W.col(c) = K.solve(BQ.col(start + c));
        CMat coeffs;
        auto [Qn, R] = borth_block(W, coeffs);
        const Eigen::Index old = Q.cols();
        // Projected operator: columns of the current block.
        CMat Hn = CMat::Zero(old + Qn.cols(), old + Qn.cols());
        Hn.topLeftCorner(H.rows(), H.cols()) = H;
        Hn.block(0, start, old, cur) = coeffs;
        Hn.block(old, start, Qn.cols(), cur) = R;
        H = Hn;

        // Rayleigh-Ritz on the current basis (square part of H).
        CMat Hs = H.topLeftCorner(old, old);
        Hs = 0.5 * (Hs + Hs.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMat> rr(Hs);
        const int have = static_cast<int>(old);
        bool converged = have >= k;
        if (converged) {
            for (int i = 0; i < k; ++i) {
                const int idx = have - 1 - i;
                const double theta = rr.eigenvalues()[idx];
                CVec y = rr.eigenvectors().col(idx);
                double res = (R * y.segment(start, cur)).norm();
                if (!(res <= opt.tol * std::abs(theta))) {
                    converged = false;
                    break;
                }
            }
        }
        if (converged || Qn.cols() == 0 || old + Qn.cols() > opt.max_basis) {
            if (!converged && have < k) throw SolverError("Krylov space exhausted before k eigenpairs were found");
            if (!converged) {
                std::ostringstream os;
                os << "shift-invert iteration did not converge (basis " << old << ", shift " << sigma << ")";
                throw SolverError(os.str());
            }
            out.eigenvalues.resize(k);
            out.eigenvectors.resize(N, k);
            for (int i = 0; i < k; ++i) {
                const int idx = have - 1 - i;
                CVec u = Q.leftCols(old) * rr.eigenvectors().col(idx);
                out.eigenvectors.col(i) = u;
            }
            // Rayleigh-Ritz on A, B over the converged vectors for full accuracy.
            CMat Uk = out.eigenvectors;
            CMat Ak = Uk.adjoint() * (A * Uk), Bk = Uk.adjoint() * (B * Uk);
            Ak = 0.5 * (Ak + Ak.adjoint()).eval();
            Bk = 0.5 * (Bk + Bk.adjoint()).eval();
            Eigen::GeneralizedSelfAdjointEigenSolver<CMat> small(Ak, Bk);
            out.eigenvalues = small.eigenvalues();
            out.eigenvectors = Uk * small.eigenvectors();
            out.krylov_dim = have;
            return out;
        }
        Q.conservativeResize(N, old + Qn.cols());
        Q.rightCols(Qn.cols()) = Qn;
        BQ.conservativeResize(N, old + Qn.cols());
        BQ.rightCols(Qn.cols()) = B * Qn;
        last_start = old;
    }
}

}  // namespace detail

inline SpectralSolution solve_generalized(const AssembledSystem& sys, int k, const SolverOptions& opt = {})
{
    if (k < 1 || k > sys.N) throw ConfigError("k must lie in [1, N]");
    CSpMat A = sys.A();
    SpectralSolution s = sys.N <= opt.dense_threshold ? detail::solve_dense(A, sys.B, k)
                                                      : detail::solve_shift_invert(A, sys.B, k, opt);
    detail::finish(s, A, sys.B);
    for (int i = 0; i < k; ++i)
        if (!(s.residuals[i] <= 1e-7 * (std::abs(s.eigenvalues[i]) + 1.0)))
            throw SolverError("eigenpair " + std::to_string(i + 1) + " fails the residual check: " + format_double(s.residuals[i]));
    return s;
}

// Field sampled on an m x m grid over [0,1]^2; entry (i, j) at (i/(m-1), j/(m-1)).
struct GridField {
    int m = 0;
    CMat values;
};

// Evaluates raw unknowns (see RawLayout) at a point of the closed unit square.
inline cplx evaluate_raw(const Mesh& mesh, const CVec& raw, double x, double y)
{
    const double h = mesh.h, eps = 1e-12;
    const int n = mesh.n;
    if (x >= h - eps && x <= 1 - h + eps && y >= h - eps && y <= 1 - h + eps) {
        int i = std::clamp(static_cast<int>(std::floor(x / h)), 1, n - 3);
        int j = std::clamp(static_cast<int>(std::floor(y / h)), 1, n - 3);
        double s = x / h - i, t = y / h - j;
        auto u = [&](int di, int dj) { return raw[mesh.bulk_index(i + di, j + dj)]; };
        if ((i + j) % 2 == 0) {
            if (t <= s) return u(0, 0) + s * (u(1, 0) - u(0, 0)) + t * (u(1, 1) - u(1, 0));
            return u(0, 0) + t * (u(0, 1) - u(0, 0)) + s * (u(1, 1) - u(0, 1));
        }
        if (s + t <= 1) return u(0, 0) + s * (u(1, 0) - u(0, 0)) + t * (u(0, 1) - u(0, 0));
        return u(1, 1) + (1 - s) * (u(0, 1) - u(1, 1)) + (1 - t) * (u(1, 0) - u(1, 1));
    }
    const Pt p(x, y);
    for (int e = 0; e < mesh.N_S; ++e) {
        const RimElement& el = mesh.rim_elements[e];
        Eigen::AlignedBox2d box;
        for (auto& q : el.boundary_pts) box.extend(q);
        for (auto& q : el.interface_pts) box.extend(q);
        if (!box.contains(p) && box.exteriorDistance(p) > eps) continue;
        double eta = 0.5, xi = 0.5;
        for (int it = 0; it < 50; ++it) {
            Pt r = el.map(eta, xi) - p;
            Eigen::Matrix2d J = el.jacobian(eta, xi);
            if (std::abs(J.determinant()) < 1e-300) break;
            Eigen::Vector2d d = J.inverse() * r;
            eta -= d[0];
            xi -= d[1];
            if (d.norm() < 1e-15) break;
        }
        if ((el.map(eta, xi) - p).norm() > 1e-10) continue;
        if (eta < -1e-9 || eta > 1 + 1e-9 || xi < -1e-9 || xi > 1 + 1e-9) continue;
        cplx v = 0;
        for (auto& [idx, poly] : detail::rim_local_functions(mesh, e)) v += raw[idx] * poly_value(poly, eta, xi);
        return v;
    }
    throw SolverError("point location failed at (" + format_double(x) + ", " + format_double(y) + ")");
}

inline GridField evaluate_eigenfunction(const SpectralSolution& sol, const Mesh& mesh, const BoundaryBasis& basis, int index, int m)
{
    if (index < 0 || index >= sol.eigenvalues.size()) throw ConfigError("eigenfunction index out of range");
    if (m < 2) throw ConfigError("grid must have at least 2 points per axis");
    CVec raw = basis.T * sol.eigenvectors.col(index);
    GridField g;
    g.m = m;
    g.values.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g.values(i, j) = evaluate_raw(mesh, raw, double(i) / (m - 1), double(j) / (m - 1));
    return g;
}

inline GridField sample_function(int m, const std::function<cplx(double, double)>& f)
{
    GridField g;
    g.m = m;
    g.values.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g.values(i, j) = f(double(i) / (m - 1), double(j) / (m - 1));
    return g;
}

// Trapezoid-weighted L2 distance after unit normalization and phase alignment.
inline double l2_error(const GridField& a, const GridField& b)
{
    if (a.m != b.m) throw ConfigError("l2_error: grids differ");
    const int m = a.m;
    const double hh = 1.0 / (m - 1);
    Mat w(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) w(i, j) = hh * hh * ((i == 0 || i == m - 1) ? 0.5 : 1.0) * ((j == 0 || j == m - 1) ? 0.5 : 1.0);
    auto inner = [&](const CMat& x, const CMat& y) { return (w.cast<cplx>().cwiseProduct(x.conjugate().cwiseProduct(y))).sum(); };
    const double na = std::sqrt(inner(a.values, a.values).real()), nb = std::sqrt(inner(b.values, b.values).real());
    if (na == 0 || nb == 0) throw ConfigError("l2_error: zero-norm field");
    CMat A = a.values / na, B = b.values / nb;
    cplx ab = inner(A, B);
    cplx ph = std::abs(ab) > 0 ? ab / std::abs(ab) : cplx(1.0);
    CMat D = ph * A - B;
    return std::sqrt(std::max(0.0, inner(D, D).real()));
}

}  // namespace sae
