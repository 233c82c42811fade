#include "sae/quadrature.hpp"

#include <gtest/gtest.h>

using namespace sae;

TEST(GaussLegendre, IntegratesPolynomialsExactly)
{
    for (int n = 1; n <= 10; ++n) {
        auto r = gauss_legendre(n);
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0;
            for (int k = 0; k < n; ++k) s += r.w[k] * std::pow(r.x[k], p);
            EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14) << "n=" << n << " p=" << p;
        }
    }
}

TEST(TriangleRule, DegreeFive)
{
    auto r = triangle_rule7();
    double wsum = 0;
    for (auto w : r.w) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-13);
    // integral of x^a y^b over the unit triangle is a! b! / (a+b+2)!
    auto fact = [](int k) { double f = 1; for (int i = 2; i <= k; ++i) f *= i; return f; };
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b) {
            double s = 0;
            for (size_t k = 0; k < r.w.size(); ++k) s += r.w[k] * 0.5 * std::pow(r.l2[k], a) * std::pow(r.l3[k], b);
            EXPECT_NEAR(s, fact(a) * fact(b) / fact(a + b + 2), 1e-13);
        }
}
