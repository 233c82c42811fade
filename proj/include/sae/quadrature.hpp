#pragma once

#include "sae/core.hpp"

#include <vector>

namespace sae {

struct Rule1D {
    std::vector<double> x;  // nodes on [0,1]
    std::vector<double> w;
};

// Gauss-Legendre rule on [0,1] by Newton iteration on P_n.
inline Rule1D gauss_legendre(int n)
{
    if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = z;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.x[i] = 0.5 * (1.0 - z);
        r.x[n - 1 - i] = 0.5 * (1.0 + z);
        r.w[i] = r.w[n - 1 - i] = 0.5 * w;
    }
    return r;
}

struct TriRule {
    std::vector<double> l1, l2, l3;  // barycentric coordinates
    std::vector<double> w;           // weights summing to 1
};

// Symmetric 7-point rule (Strang-Fix / Dunavant degree 5).
inline TriRule triangle_rule7()
{
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    TriRule r;
    auto add = [&](double x, double y, double z, double w) {
        r.l1.push_back(x);
        r.l2.push_back(y);
        r.l3.push_back(z);
        r.w.push_back(w);
    };
    add(1.0 / 3, 1.0 / 3, 1.0 / 3, w0);
    add(a1, b1, b1, w1);
    add(b1, a1, b1, w1);
    add(b1, b1, a1, w1);
    add(a2, b2, b2, w2);
    add(b2, a2, b2, w2);
    add(b2, b2, a2, w2);
    return r;
}

}  // namespace sae
