#pragma once

#include "sae/assembly.hpp"
#include "sae/boundary_basis.hpp"
#include "sae/boundary_conditions.hpp"
#include "sae/eigensolver.hpp"
#include "sae/mesh.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace sae {

struct BCSpec {
    std::string name = "dirichlet";  // dirichlet|neumann|robin|periodic|quasiperiodic|piecewise-robin|file
    double alpha = 0.0;
    double lambda_lower = 1.0, lambda_upper = -1.0;  // piecewise-robin halves
    std::string file;
};

inline const std::vector<std::string>& bc_names()
{
    static const std::vector<std::string> v{"dirichlet", "neumann", "robin", "periodic", "quasiperiodic", "piecewise-robin", "file"};
    return v;
}

inline BoundaryUnitary make_unitary(const BCSpec& bc, const Mesh& m)
{
    if (bc.name == "dirichlet") return dirichlet(m.N_S);
    if (bc.name == "neumann") return neumann(m.N_S);
    if (bc.name == "robin") return robin(bc.alpha, m.N_S);
    if (bc.name == "periodic") return periodic(m.n);
    if (bc.name == "quasiperiodic") return quasiperiodic(m.n, bc.alpha);
    if (bc.name == "piecewise-robin") return piecewise_robin(half_split_alphas(m.n, bc.lambda_lower, bc.lambda_upper));
    if (bc.name == "file") return load_unitary(bc.file, m.N_S);
    throw ConfigError("unknown boundary condition '" + bc.name + "'");
}

// Per-node Lambda for the natural scheme: a node at a jump takes the value of
// the interval following it counterclockwise.
inline std::vector<double> half_split_node_lambdas(int n, double lambda_lower, double lambda_upper)
{
    const int side = n - 1, half = side / 2;
    std::vector<double> lam(4 * side);
    for (int j = 0; j < 4 * side; ++j) {
        int s = j / side, t = j % side;
        bool lower = s == 0 || (s == 1 && t < half) || (s == 3 && t >= half);
        lam[j] = lower ? lambda_lower : lambda_upper;
    }
    return lam;
}

struct RunResult {
    Mesh mesh;
    BoundaryUnitary U;
    BoundaryBasis basis;
    AssembledSystem system;
    SpectralSolution solution;
};

inline RunResult run_unitary(int n, const BCSpec& bc, int k, const BasisOptions& bopt = {}, const SolverOptions& sopt = {})
{
    RunResult r;
    r.mesh = build_mesh(n);
    r.U = make_unitary(bc, r.mesh);
    r.basis = build_boundary_basis(r.mesh, r.U, bopt);
    r.system = assemble(r.mesh, r.basis);
    r.solution = solve_generalized(r.system, std::min(k, r.system.N), sopt);
    return r;
}

inline RunResult run_natural(int n, const std::vector<double>& node_lambda, int k, const SolverOptions& sopt = {})
{
    RunResult r;
    r.mesh = build_mesh(n);
    r.U = neumann(r.mesh.N_S);
    r.basis = build_boundary_basis(r.mesh, r.U);
    r.system = assemble_natural(r.mesh, r.basis, node_lambda);
    r.solution = solve_generalized(r.system, std::min(k, r.system.N), sopt);
    return r;
}

// Exact references on the unit square.
inline bool has_reference(const std::string& bc)
{
    return bc == "dirichlet" || bc == "neumann" || bc == "periodic" || bc == "quasiperiodic";
}

inline std::vector<double> exact_eigenvalues(const std::string& bc, double alpha, int k)
{
    std::vector<double> v;
    const int R = k + 4;
    if (bc == "dirichlet") {
        for (int p = 1; p <= R; ++p)
            for (int q = 1; q <= R; ++q) v.push_back(pi * pi * (p * p + q * q));
    } else if (bc == "neumann") {
        for (int p = 0; p <= R; ++p)
            for (int q = 0; q <= R; ++q) v.push_back(pi * pi * (p * p + q * q));
    } else if (bc == "periodic" || bc == "quasiperiodic") {
        const double a = bc == "periodic" ? 0.0 : alpha;
        for (int p = -R; p <= R; ++p)
            for (int q = -R; q <= R; ++q) {
                double ky = 2 * pi * q - a;
                v.push_back(4 * pi * pi * p * p + ky * ky);
            }
    } else {
        throw ConfigError("no analytic reference for '" + bc + "'; use sweep instead");
    }
    std::sort(v.begin(), v.end());
    v.resize(k);
    return v;
}

// Ground state matching the orientation of the builders in boundary_conditions.
inline std::function<cplx(double, double)> exact_ground_state(const std::string& bc, double alpha)
{
    if (bc == "dirichlet") return [](double x, double y) { return cplx(std::sin(pi * x) * std::sin(pi * y)); };
    if (bc == "neumann" || bc == "periodic") return [](double, double) { return cplx(1.0); };
    if (bc == "quasiperiodic") return [alpha](double, double y) { return std::polar(1.0, -alpha * y); };
    throw ConfigError("no analytic reference for '" + bc + "'; use sweep instead");
}

// Least-squares slope of log(err) against log(n).
inline double loglog_slope(const std::vector<double>& n, const std::vector<double>& err)
{
    if (n.size() < 2) throw ConfigError("need at least two discretisation sizes to fit a slope");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double N = static_cast<double>(n.size());
    for (size_t i = 0; i < n.size(); ++i) {
        double x = std::log(n[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (N * sxy - sx * sy) / (N * sxx - sx * sx);
}

}  // namespace sae
