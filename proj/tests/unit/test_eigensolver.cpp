#include "sae/sae.hpp"

#include <gtest/gtest.h>

using namespace sae;

namespace {

AssembledSystem small_system()
{
    AssembledSystem s;
    s.N = 2;
    s.M.resize(2, 2);
    s.M.insert(0, 0) = 1.0;
    s.M.insert(1, 1) = 2.0;
    s.B.resize(2, 2);
    s.B.insert(0, 0) = 1.0;
    s.B.insert(1, 1) = 1.0;
    s.F.resize(2, 2);
    return s;
}

const RunResult& dirichlet21()
{
    static const RunResult r = run_unitary(21, {"dirichlet"}, 6);
    return r;
}

}  // namespace

TEST(Solver, TwoByTwo)
{
    auto s = solve_generalized(small_system(), 2);
    EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-14);
    EXPECT_NEAR(s.eigenvalues[1], 2.0, 1e-14);
    EXPECT_EQ(s.path, "dense");
}

TEST(Solver, RejectsBadK)
{
    EXPECT_THROW(solve_generalized(small_system(), 0), ConfigError);
    EXPECT_THROW(solve_generalized(small_system(), 3), ConfigError);
}

TEST(Solver, ContractOnDirichlet)
{
    const auto& r = dirichlet21();
    const auto& s = r.solution;
    for (int i = 0; i < 6; ++i) {
        EXPECT_LE(s.residuals[i], 1e-7 * (std::abs(s.eigenvalues[i]) + 1));
        if (i) EXPECT_LE(s.eigenvalues[i - 1], s.eigenvalues[i]);
    }
    CMat G = s.eigenvectors.adjoint() * r.system.B * s.eigenvectors;
    EXPECT_LT((G - CMat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(s.degenerate_with_previous[2], 1);
    EXPECT_EQ(s.degenerate_with_previous[1], 0);
}

TEST(Solver, IterativePathAgreesWithDense)
{
    const auto& r = dirichlet21();
    SolverOptions o;
    o.dense_threshold = 10;
    auto it = solve_generalized(r.system, 6, o);
    EXPECT_EQ(it.path, "shift-invert");
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(it.eigenvalues[i], r.solution.eigenvalues[i], 1e-7 * r.solution.eigenvalues[i]);
    CMat G = it.eigenvectors.adjoint() * r.system.B * it.eigenvectors;
    EXPECT_LT((G - CMat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Solver, IterativePathHandlesNegativeAndZeroEigenvalues)
{
    SolverOptions o;
    o.dense_threshold = 10;
    for (BCSpec s : {BCSpec{"neumann"}, BCSpec{"robin", -0.9 * pi}}) {
        auto r = run_unitary(13, s, 4);
        auto it = solve_generalized(r.system, 4, o);
        for (int i = 0; i < 4; ++i)
            EXPECT_NEAR(it.eigenvalues[i], r.solution.eigenvalues[i], 1e-7 * (1 + std::abs(r.solution.eigenvalues[i]))) << s.name;
    }
}

TEST(Spectra, DirichletDominatesNeumann)
{
    auto d = run_unitary(15, {"dirichlet"}, 6), n = run_unitary(15, {"neumann"}, 6);
    for (int i = 0; i < 6; ++i) EXPECT_GE(d.solution.eigenvalues[i], n.solution.eigenvalues[i]);
}

TEST(Spectra, RobinSignFollowsAlpha)
{
    EXPECT_GT(run_unitary(15, {"robin", 0.5}, 1).solution.eigenvalues[0], 0.0);
    EXPECT_LT(run_unitary(15, {"robin", -0.9 * pi}, 1).solution.eigenvalues[0], 0.0);
}

TEST(Spectra, QuasiperiodicSymmetricInAlpha)
{
    auto p = run_unitary(15, {"quasiperiodic", pi / 4}, 6), q = run_unitary(15, {"quasiperiodic", -pi / 4}, 6);
    for (int i = 0; i < 6; ++i)
        EXPECT_NEAR(p.solution.eigenvalues[i], q.solution.eigenvalues[i], 1e-8 * (1 + p.solution.eigenvalues[i]));
}

TEST(Spectra, NeumannGroundStateIsZero)
{
    EXPECT_NEAR(run_unitary(15, {"neumann"}, 1).solution.eigenvalues[0], 0.0, 1e-9);
}

TEST(Eigenfunctions, NeumannGroundStateIsConstant)
{
    auto r = run_unitary(11, {"neumann"}, 1);
    auto g = evaluate_eigenfunction(r.solution, r.mesh, r.basis, 0, 21);
    Mat a = g.values.cwiseAbs();
    EXPECT_LE(a.maxCoeff() - a.minCoeff(), 1e-6 * a.maxCoeff());
    EXPECT_LT(g.values.imag().cwiseAbs().maxCoeff(), 1e-6 * a.maxCoeff());
}

TEST(Eigenfunctions, DirichletGroundStateVanishesOnTheBoundary)
{
    const auto& r = dirichlet21();
    const int m = 41;
    auto g = evaluate_eigenfunction(r.solution, r.mesh, r.basis, 0, m);
    const double mx = g.values.cwiseAbs().maxCoeff();
    for (int i = 0; i < m; ++i) {
        EXPECT_LE(std::abs(g.values(i, 0)), 1e-6 * mx);
        EXPECT_LE(std::abs(g.values(i, m - 1)), 1e-6 * mx);
        EXPECT_LE(std::abs(g.values(0, i)), 1e-6 * mx);
        EXPECT_LE(std::abs(g.values(m - 1, i)), 1e-6 * mx);
    }
    auto ref = sample_function(m, exact_ground_state("dirichlet", 0));
    EXPECT_LT(l2_error(g, ref), 5e-3);
}

TEST(Eigenfunctions, EvaluationReproducesNodeValues)
{
    const auto& r = dirichlet21();
    CVec raw = r.basis.T * r.solution.eigenvectors.col(0);
    for (int k = 0; k < r.mesh.N_B; k += 7) {
        const Pt& p = r.mesh.bulk_nodes[k];
        EXPECT_NEAR(std::abs(evaluate_raw(r.mesh, raw, p.x(), p.y()) - raw[k]), 0.0, 1e-12);
    }
    RawLayout L(r.mesh);
    for (int j = 0; j < r.mesh.N_S; j += 5) {
        const Pt& p = r.mesh.boundary_nodes[j];
        EXPECT_NEAR(std::abs(evaluate_raw(r.mesh, raw, p.x(), p.y()) - raw[L.a(j)]), 0.0, 1e-12);
    }
}

TEST(L2Error, TrivialCases)
{
    auto f = sample_function(11, [](double x, double y) { return cplx(x * x + y, x - y); });
    EXPECT_NEAR(l2_error(f, f), 0.0, 1e-14);
    auto g = f;
    g.values *= std::polar(3.0, 1.234);
    EXPECT_NEAR(l2_error(g, f), 0.0, 1e-14);
    auto h = sample_function(11, [](double, double) { return cplx(1.0); });
    EXPECT_GT(l2_error(f, h), 0.01);
    auto z = sample_function(11, [](double, double) { return cplx(0.0); });
    EXPECT_THROW(l2_error(z, f), ConfigError);
}
