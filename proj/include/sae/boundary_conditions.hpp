#pragma once

#include "sae/core.hpp"

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sae {

// Unitary acting on Legendre boundary data: order-0 slots first, order-1 second.
struct BoundaryUnitary {
    CMat matrix;
    std::string label;

    int dim() const { return static_cast<int>(matrix.rows()); }
    int N_S() const { return dim() / 2; }
    auto block(int r, int c) const { return matrix.block(r * N_S(), c * N_S(), N_S(), N_S()); }
};

inline double unitarity_defect(const CMat& U)
{
    return (U.adjoint() * U - CMat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

inline void require_ns(int N_S)
{
    if (N_S < 8 || N_S % 4 != 0) throw ConfigError("N_S must be a multiple of 4 and >= 8");
}

inline int side_from_n(int n)
{
    if (n < 2) throw ConfigError("periodic conditions need n >= 2");
    return n - 1;
}

// Order-0 block of the side identification; phase multiplies the I1 <- I3 block.
inline CMat side_pairing(int side, cplx phase)
{
    const int ns = 4 * side;
    CMat U0 = CMat::Zero(ns, ns);
    auto put = [&](int rs, int cs, cplx v) {
        for (int t = 0; t < side; ++t) U0(rs * side + t, cs * side + side - 1 - t) = v;
    };
    put(0, 2, phase);
    put(2, 0, std::conj(phase));
    put(1, 3, 1.0);
    put(3, 1, 1.0);
    return U0;
}

}  // namespace detail

inline BoundaryUnitary dirichlet(int N_S)
{
    detail::require_ns(N_S);
    return {-CMat::Identity(2 * N_S, 2 * N_S), "dirichlet"};
}

inline BoundaryUnitary neumann(int N_S)
{
    detail::require_ns(N_S);
    return {CMat::Identity(2 * N_S, 2 * N_S), "neumann"};
}

inline BoundaryUnitary robin(double alpha, int N_S)
{
    detail::require_ns(N_S);
    if (!(alpha > -pi && alpha < pi)) throw ConfigError("robin: alpha must lie in (-pi, pi); |alpha| = pi is Dirichlet");
    std::ostringstream os;
    os.precision(17);
    os << "robin(" << alpha << ")";
    return {std::polar(1.0, alpha) * CMat::Identity(2 * N_S, 2 * N_S), os.str()};
}

inline BoundaryUnitary quasiperiodic(int n, double alpha)
{
    const int side = detail::side_from_n(n);
    const int ns = 4 * side;
    CMat U0 = detail::side_pairing(side, std::polar(1.0, alpha));
    CMat U = CMat::Zero(2 * ns, 2 * ns);
    U.topLeftCorner(ns, ns) = U0;
    U.bottomRightCorner(ns, ns) = -U0;
    std::ostringstream os;
    os.precision(17);
    os << "quasiperiodic(" << alpha << ")";
    return {U, os.str()};
}

inline BoundaryUnitary periodic(int n)
{
    auto U = quasiperiodic(n, 0.0);
    U.label = "periodic";
    return U;
}

inline BoundaryUnitary piecewise_robin(const std::vector<double>& alphas)
{
    const int N_S = static_cast<int>(alphas.size());
    detail::require_ns(N_S);
    CMat U = CMat::Zero(2 * N_S, 2 * N_S);
    for (int j = 0; j < N_S; ++j) {
        if (!(alphas[j] > -pi && alphas[j] <= pi)) throw ConfigError("piecewise_robin: alpha_j must lie in (-pi, pi]");
        U(j, j) = U(j + N_S, j + N_S) = std::polar(1.0, alphas[j]);
    }
    return {U, "piecewise_robin"};
}

// Robin parameter Lambda on the lower half of the boundary chain and on the
// upper half; the jumps sit at the midpoints of the right and left sides.
inline std::vector<double> half_split_alphas(int n, double lambda_lower, double lambda_upper)
{
    const int side = n - 1, half = side / 2;
    std::vector<double> a(4 * side);
    for (int j = 0; j < 4 * side; ++j) {
        int s = j / side, t = j % side;
        bool lower = s == 0 || (s == 1 && t < half) || (s == 3 && t >= half);
        a[j] = -2.0 * std::atan(lower ? lambda_lower : lambda_upper);
    }
    return a;
}

inline BoundaryUnitary validate_unitary(CMat U, const std::string& label, double tol = 1e-8)
{
    if (U.rows() != U.cols() || U.rows() % 2 != 0 || U.rows() == 0)
        throw ConfigError("unitary must be square with even dimension");
    double dev = unitarity_defect(U);
    if (!(dev <= tol)) {
        std::ostringstream os;
        os << "matrix is not unitary: max |U^H U - I| = " << dev;
        throw ValidationError(os.str());
    }
    return {std::move(U), label};
}

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void save_unitary(const BoundaryUnitary& U, const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << "SAE-U v1 dim=" << U.dim() << "\n";
    for (int r = 0; r < U.dim(); ++r) {
        for (int c = 0; c < U.dim(); ++c) {
            if (c) f << ' ';
            f << format_double(U.matrix(r, c).real()) << ',' << format_double(U.matrix(r, c).imag());
        }
        f << '\n';
    }
}

inline BoundaryUnitary load_unitary(const std::string& path, int expected_N_S = -1)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open unitary file " + path);
    std::string header;
    std::getline(f, header);
    int dim = 0;
    if (std::sscanf(header.c_str(), "SAE-U v1 dim=%d", &dim) != 1 || dim <= 0)
        throw ConfigError("bad unitary file header in " + path);
    if (expected_N_S > 0 && dim != 2 * expected_N_S)
        throw ConfigError("unitary dimension " + std::to_string(dim) + " does not match mesh (expected " +
                          std::to_string(2 * expected_N_S) + ")");
    CMat U(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            std::string tok;
            if (!(f >> tok)) throw ConfigError("unitary file truncated at row " + std::to_string(r));
            auto comma = tok.find(',');
            if (comma == std::string::npos) throw ConfigError("entry without 're,im' form: " + tok);
            char* end = nullptr;
            double re = std::strtod(tok.c_str(), &end);
            double im = std::strtod(tok.c_str() + comma + 1, &end);
            U(r, c) = cplx(re, im);
        }
    }
    return validate_unitary(std::move(U), "file");
}

struct GapReport {
    CVec eigenvalues;
    Vec distance_to_minus_one;
    double gap = std::numeric_limits<double>::infinity();
    int dim_relevant_subspace = 0;
    bool usable = true;
};

namespace detail {

struct UnitarySpectrum {
    CMat Q;
    CVec lambda;
};

// Schur form of a normal matrix is diagonal; Q holds orthonormal eigenvectors.
inline UnitarySpectrum unitary_spectrum(const CMat& U)
{
    Eigen::ComplexSchur<CMat> schur(U);
    if (schur.info() != Eigen::Success) throw SolverError("Schur decomposition of U failed");
    return {schur.matrixU(), schur.matrixT().diagonal()};
}

inline double arc_to_minus_one(cplx z) { return pi - std::abs(std::arg(z)); }

}  // namespace detail

inline GapReport spectral_gap_check(const BoundaryUnitary& U, double tol = 1e-8)
{
    auto sp = detail::unitary_spectrum(U.matrix);
    GapReport g;
    g.eigenvalues = sp.lambda;
    g.distance_to_minus_one.resize(sp.lambda.size());
    for (Eigen::Index k = 0; k < sp.lambda.size(); ++k) {
        double d = detail::arc_to_minus_one(sp.lambda[k]);
        g.distance_to_minus_one[k] = d;
        if (d <= tol)
            ++g.dim_relevant_subspace;
        else
            g.gap = std::min(g.gap, d);
    }
    // An eigenvalue this close to -1 but outside the tolerance makes the Cayley
    // transform blow up.
    g.usable = g.gap >= 100.0 * tol;
    return g;
}

inline CMat partial_cayley(const BoundaryUnitary& U, double tol = 1e-8)
{
    auto g = spectral_gap_check(U, tol);
    if (!g.usable) throw ConfigError("partial_cayley: U has no usable spectral gap at -1 (gap = " + format_double(g.gap) + ")");
    auto sp = detail::unitary_spectrum(U.matrix);
    CVec f(sp.lambda.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        cplx z = sp.lambda[k];
        f[k] = detail::arc_to_minus_one(z) <= tol ? cplx(0.0) : I * (z - 1.0) / (z + 1.0);
    }
    return sp.Q * f.asDiagonal() * sp.Q.adjoint();
}

}  // namespace sae
