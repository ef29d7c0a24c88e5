// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"
#include "wgcd/bench.hpp"
#include "wgcd/dofmap.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace wgcd;

namespace {

/// Least-squares fit of g by a degree-k polynomial in arc length on a segment, evaluated at t in [0, 1].
double oracle_facet_projection(const ScalarField& g, const Segment& s, int k, double t)
{
    const int n = k + 1;
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    auto mono = [&](int i, const Vec2& p) { return std::pow((p - s.a).norm() / s.length(), i); };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            M(i, j) = oracle::integrate_segment([&](const Vec2& p) { return mono(i, p) * mono(j, p); }, s.a, s.b, 16);
        r[i] = oracle::integrate_segment([&](const Vec2& p) { return g(p) * mono(i, p); }, s.a, s.b, 16);
    }
    const Eigen::VectorXd c = M.fullPivLu().solve(r);
    double v = 0.0;
    for (int i = 0; i < n; ++i)
        v += c[i] * std::pow(t, i);
    return v;
}

} // namespace

TEST(DofMap, SingleCellLinear)
{
    const Mesh m = uniform_grid(1);
    const auto d = build_dofmap(m, 1);
    EXPECT_EQ(d->n_dofs(), 11);
    EXPECT_EQ(static_cast<int>(d->constrained_dofs().size()), 8);
    EXPECT_EQ(d->n_free(), 3);
}

TEST(DofMap, SixteenBySixteenQuadratic)
{
    const Mesh m = uniform_grid(16);
    const auto d = build_dofmap(m, 2);
    EXPECT_EQ(m.num_facets(), 544);
    EXPECT_EQ(d->n_dofs(), 256 * 6 + 544 * 3);
    EXPECT_EQ(d->n_dofs(), 3168);
}

TEST(DofMap, CountsIncreaseWithDegree)
{
    const Mesh m = refine(uniform_grid(3), std::vector<int>{4});
    int prev = 0;
    for (int k = 1; k <= 5; ++k) {
        const auto d = build_dofmap(m, k);
        EXPECT_GT(d->n_dofs(), prev);
        EXPECT_EQ(d->n_dofs(), m.num_leaves() * (k + 1) * (k + 2) / 2 + m.num_facets() * (k + 1));
        prev = d->n_dofs();
    }
}

TEST(DofMap, DegreeZeroRejected)
{
    EXPECT_THROW(build_dofmap(uniform_grid(2), 0), UnsupportedDegree);
}

TEST(DofMap, ConstrainedDofsAreExactlyBoundaryFacetDofs)
{
    const Mesh m = refine(refine(uniform_grid(2), std::vector<int>{0}), std::vector<int>{4, 5});
    const auto d = build_dofmap(m, 2);
    std::set<int> expect;
    for (const Facet& f : m.facets())
        if (f.boundary)
            for (int j = 0; j < 3; ++j)
                expect.insert(d->facet_offset(f.id) + j);
    const std::set<int> got(d->constrained_dofs().begin(), d->constrained_dofs().end());
    EXPECT_EQ(got, expect);
    int free = 0;
    std::set<int> seen;
    for (int dof = 0; dof < d->n_dofs(); ++dof) {
        EXPECT_EQ(d->is_constrained(dof), expect.count(dof) == 1);
        if (!d->is_constrained(dof)) {
            ++free;
            EXPECT_TRUE(seen.insert(d->free_index(dof)).second);
        }
    }
    EXPECT_EQ(free, d->n_free());
    EXPECT_EQ(*seen.rbegin(), d->n_free() - 1);
}

TEST(DofMap, LocalDofsShareFacetBlocks)
{
    const Mesh m = uniform_grid(2);
    const auto d = build_dofmap(m, 1);
    const auto a = d->local_dofs(CellLayout::from_mesh(m, 0, 1), 0);
    const auto b = d->local_dofs(CellLayout::from_mesh(m, 1, 1), 1);
    std::set<int> sa(a.begin(), a.end());
    int shared = 0;
    for (int x : b)
        shared += static_cast<int>(sa.count(x));
    EXPECT_EQ(shared, 2); // one facet, k + 1 dofs
}

TEST(ApplyDirichlet, ZeroData)
{
    const Mesh m = uniform_grid(4);
    const auto d = build_dofmap(m, 2);
    EXPECT_EQ(apply_dirichlet(*d, m, [](const Vec2&) { return 0.0; }).norm(), 0.0);
}

TEST(ApplyDirichlet, UnitDataRepresentsConstant)
{
    const Mesh m = refine(uniform_grid(2), std::vector<int>{3});
    const auto d = build_dofmap(m, 3);
    const Eigen::VectorXd v = apply_dirichlet(*d, m, [](const Vec2&) { return 1.0; });
    for (const Facet& f : m.facets()) {
        const Eigen::VectorXd c = v.segment(d->facet_offset(f.id), d->per_facet());
        if (!f.boundary) {
            EXPECT_EQ(c.norm(), 0.0);
            continue;
        }
        const FacetBasis fb(f.seg, 3);
        for (double t : {0.0, 0.3, 0.77, 1.0})
            EXPECT_NEAR(fb.value(c, f.seg.a + t * (f.seg.b - f.seg.a)), 1.0, 1e-13);
    }
}

TEST(ApplyDirichlet, BoundaryLayerDataAtMidpoints)
{
    const Benchmark bm = boundary_layer(0.1);
    const Mesh m = uniform_grid(16);
    const auto d = build_dofmap(m, 2);
    const Eigen::VectorXd v = apply_dirichlet(*d, m, bm.problem.g);
    for (const Facet& f : m.facets()) {
        if (!f.boundary)
            continue;
        const FacetBasis fb(f.seg, 2);
        const double lib = fb.value(v.segment(d->facet_offset(f.id), 3), f.seg.midpoint());
        EXPECT_NEAR(lib, oracle_facet_projection(bm.exact, f.seg, 2, 0.5), 1e-10);
        EXPECT_NEAR(lib, bm.exact(f.seg.midpoint()), 2e-3);
    }
}

TEST(WgFunction, ProjectionRoundTripOfContinuousPolynomial)
{
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Mesh m = refine(refine(uniform_grid(2), std::vector<int>{1}), std::vector<int>{7});
    for (int k = 1; k <= 3; ++k) {
        oracle::Poly P;
        P.k = k;
        P.c.resize(static_cast<Eigen::Index>(oracle::exponents(k).size()));
        for (auto& c : P.c)
            c = u(gen);
        const auto d = build_dofmap(m, k);
        const WgFunction w = project_to_wg(d, m, [&](const Vec2& p) { return P(p); });
        for (int l = 0; l < m.num_leaves(); ++l) {
            const Rect& box = m.leaf(l).box;
            const CellBasis cb(box, k);
            for (const Vec2& p : cell_quadrature(2 * k, box).points)
                EXPECT_NEAR(cb.value(w.interior(l), p), P(p), 1e-12);
        }
        for (const Facet& f : m.facets()) {
            const FacetBasis fb(f.seg, k);
            for (const Vec2& p : facet_quadrature(2 * k, f.seg).points)
                EXPECT_NEAR(fb.value(w.facet(f.id), p), P(p), 1e-12);
        }
    }
}

TEST(WgFunction, LocalVectorFollowsLayoutOrder)
{
    const Mesh m = refine(uniform_grid(2), std::vector<int>{0});
    const auto d = build_dofmap(m, 1);
    WgFunction w(d);
    for (int i = 0; i < d->n_dofs(); ++i)
        w.coeffs()[i] = i;
    for (int l = 0; l < m.num_leaves(); ++l) {
        const CellLayout L = CellLayout::from_mesh(m, l, 1);
        const Eigen::VectorXd v = w.local(L, l);
        const auto dofs = d->local_dofs(L, l);
        ASSERT_EQ(static_cast<int>(dofs.size()), v.size());
        for (std::size_t i = 0; i < dofs.size(); ++i)
            EXPECT_EQ(v[static_cast<Eigen::Index>(i)], dofs[i]);
    }
}

TEST(WgFunction, WriteReadRoundTrip)
{
    std::mt19937 gen(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Mesh m = refine(uniform_grid(3), std::vector<int>{0, 8});
    const auto d = build_dofmap(m, 2);
    WgFunction w(d);
    for (auto& c : w.coeffs())
        c = u(gen);
    std::stringstream ss;
    write_wg_function(ss, m, w);
    const WgFunction back = read_wg_function(ss, m, d);
    EXPECT_EQ((back.coeffs() - w.coeffs()).norm(), 0.0);
}

TEST(WgFunction, ReadRejectsMismatchedDump)
{
    const Mesh m = uniform_grid(2);
    const auto d1 = build_dofmap(m, 1);
    const auto d2 = build_dofmap(m, 2);
    std::stringstream ss;
    write_wg_function(ss, m, WgFunction(d1));
    EXPECT_THROW(read_wg_function(ss, m, d2), InvalidArgument);
    std::stringstream bad("nonsense");
    EXPECT_THROW(read_wg_function(bad, m, d1), InvalidArgument);
}
