// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wgcd/mesh.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wgcd {

/// Data of -div(eps grad u) + div(b u) + a u = f in the domain, u = g on its boundary.
struct ProblemData {
    double eps = 1.0;
    VectorField b = [](const Vec2&) { return Vec2::Zero().eval(); };
    ScalarField a = [](const Vec2&) { return 0.0; };
    ScalarField f = [](const Vec2&) { return 0.0; };
    ScalarField g = [](const Vec2&) { return 0.0; };
    /// lower bound of div(b)/2 + a; 0 selects the c0-free estimator weights
    double c0 = 0.0;
    /// div(b); central differences of b are used when empty
    ScalarField div_b;
};

inline double divergence_of_b(const ProblemData& p, const Vec2& x)
{
    if (p.div_b)
        return p.div_b(x);
    const double h = 1e-6;
    return (p.b(x + Vec2(h, 0.0)).x() - p.b(x - Vec2(h, 0.0)).x()) / (2.0 * h) +
           (p.b(x + Vec2(0.0, h)).y() - p.b(x - Vec2(0.0, h)).y()) / (2.0 * h);
}

/// Checks eps > 0, c0 >= 0 and, when c0 > 0, div(b)/2 + a >= c0 at the cell quadrature points.
inline void validate(const ProblemData& p, const Mesh& mesh, int k)
{
    if (!(p.eps > 0.0))
        throw InvalidArgument("ProblemData: eps must be positive");
    if (!(p.c0 >= 0.0))
        throw InvalidArgument("ProblemData: c0 must be nonnegative");
    if (!p.b || !p.a || !p.f || !p.g)
        throw InvalidArgument("ProblemData: coefficient functions must be set");
    if (p.c0 == 0.0)
        return;
    for (int id : mesh.leaves()) {
        const QuadRule rule = cell_quadrature(data_quadrature_order(k), mesh.cell(id).box);
        for (const Vec2& x : rule.points) {
            const double lower = 0.5 * divergence_of_b(p, x) + p.a(x);
            if (lower < p.c0 - 1e-12) {
                std::ostringstream msg;
                msg << "ProblemData: div(b)/2 + a = " << lower << " < c0 = " << p.c0 << " at (" << x.x() << ", "
                    << x.y() << ")";
                throw InvalidArgument(msg.str());
            }
        }
    }
}

/// max over cell and facet quadrature points of max(|b_x|, |b_y|).
inline double b_sup_norm(const ProblemData& p, const Mesh& mesh, int k)
{
    double m = 0.0;
    const int order = data_quadrature_order(k);
    for (int id : mesh.leaves())
        for (const Vec2& x : cell_quadrature(order, mesh.cell(id).box).points)
            m = std::max(m, p.b(x).cwiseAbs().maxCoeff());
    for (const Facet& f : mesh.facets())
        for (const Vec2& x : facet_quadrature(order, f.seg).points)
            m = std::max(m, p.b(x).cwiseAbs().maxCoeff());
    return m;
}

} // namespace wgcd
