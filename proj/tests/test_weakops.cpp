// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"
#include "wgcd/weakops.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wgcd;

namespace {

struct RandomWg {
    Eigen::VectorXd dofs;
    std::function<double(const Vec2&)> v0;
    std::vector<oracle::Edge> edges;
};

RandomWg random_wg(const CellLayout& L, std::mt19937& gen)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RandomWg r;
    r.dofs.resize(L.n_dofs());
    for (auto& v : r.dofs)
        v = u(gen);
    const CellBasis cb(L.box(), L.degree());
    const Eigen::VectorXd c0 = r.dofs.head(L.n_interior());
    r.v0 = [cb, c0](const Vec2& p) { return cb.value(c0, p); };
    for (int f = 0; f < L.num_facets(); ++f) {
        const LayoutFacet& lf = L.facets()[static_cast<std::size_t>(f)];
        const FacetBasis fb(lf.seg, L.degree());
        const Eigen::VectorXd cf = r.dofs.segment(L.facet_offset(f), L.n_facet_dofs());
        r.edges.push_back({lf.seg.a, lf.seg.b, lf.outward, [fb, cf](const Vec2& p) { return fb.value(cf, p); }});
    }
    return r;
}

/// Embeds a polynomial as {u, trace u}.
Eigen::VectorXd embed(const CellLayout& L, const ScalarField& u)
{
    Eigen::VectorXd v(L.n_dofs());
    v.head(L.n_interior()) = l2_project_cell(u, L.box(), L.degree());
    for (int f = 0; f < L.num_facets(); ++f)
        v.segment(L.facet_offset(f), L.n_facet_dofs()) =
            l2_project_facet(u, L.facets()[static_cast<std::size_t>(f)].seg, L.degree());
    return v;
}

std::vector<Vec2> sample_points(const Rect& box)
{
    std::vector<Vec2> pts;
    for (double s : {0.1, 0.45, 0.9})
        for (double t : {0.2, 0.6, 0.95})
            pts.emplace_back(box.x0 + s * box.w, box.y0 + t * box.h);
    return pts;
}

} // namespace

TEST(WeakGradient, ConstantHasZeroGradient)
{
    for (int k = 1; k <= 4; ++k) {
        const CellLayout L = CellLayout::from_rect(Rect{0.1, 0.2, 0.3, 0.15}, k, {1, 2, 1, 2});
        const Eigen::VectorXd v = embed(L, [](const Vec2&) { return 1.0; });
        EXPECT_LT((weak_gradient(L) * v).norm(), 1e-12) << k;
    }
}

TEST(WeakGradient, ScaledLinearFunction)
{
    const Rect box{0.5, 0.25, 0.25, 0.125};
    const double hx = 0.5 * box.w; // CellBasis scales by the half-width
    const Vec2 c = box.center();
    for (int k = 1; k <= 3; ++k) {
        const CellLayout L = CellLayout::from_rect(box, k);
        const Eigen::VectorXd g = weak_gradient(L) * embed(L, [&](const Vec2& p) { return (p.x() - c.x()) / hx; });
        const CellBasis gb(box, k - 1);
        for (const Vec2& p : sample_points(box)) {
            const Vec2 v = eval_weak_gradient(gb, g, p);
            EXPECT_NEAR(v.x(), 1.0 / hx, 1e-11);
            EXPECT_NEAR(v.y(), 0.0, 1e-11);
        }
    }
}

TEST(WeakGradient, SingleUnitFacetAgainstOracle)
{
    const Rect box = unit_square();
    for (int k = 1; k <= 3; ++k) {
        const CellLayout L = CellLayout::from_rect(box, k);
        for (int f = 0; f < L.num_facets(); ++f) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(L.n_dofs());
            v.segment(L.facet_offset(f), L.n_facet_dofs()) =
                l2_project_facet([](const Vec2&) { return 1.0; }, L.facets()[static_cast<std::size_t>(f)].seg, k);
            std::vector<oracle::Edge> edges;
            for (int e = 0; e < L.num_facets(); ++e) {
                const LayoutFacet& lf = L.facets()[static_cast<std::size_t>(e)];
                const double val = e == f ? 1.0 : 0.0;
                edges.push_back({lf.seg.a, lf.seg.b, lf.outward, [val](const Vec2&) { return val; }});
            }
            const auto [gx, gy] = oracle::weak_gradient(box, k, [](const Vec2&) { return 0.0; }, edges);
            const Eigen::VectorXd g = weak_gradient(L) * v;
            const CellBasis gb(box, k - 1);
            for (const Vec2& p : sample_points(box)) {
                const Vec2 lib = eval_weak_gradient(gb, g, p);
                EXPECT_NEAR(lib.x(), gx(p), 1e-12 * (1.0 + std::abs(gx(p))));
                EXPECT_NEAR(lib.y(), gy(p), 1e-12 * (1.0 + std::abs(gy(p))));
            }
        }
    }
}

TEST(WeakGradient, RandomHangingCellAgainstOracle)
{
    std::mt19937 gen(3);
    const Rect box{0.25, 0.5, 0.125, 0.125};
    for (int k = 1; k <= 3; ++k) {
        const CellLayout L = CellLayout::from_rect(box, k, {2, 1, 1, 2});
        const RandomWg v = random_wg(L, gen);
        const auto [gx, gy] = oracle::weak_gradient(box, k, v.v0, v.edges);
        const Eigen::VectorXd g = weak_gradient(L) * v.dofs;
        const CellBasis gb(box, k - 1);
        double scale = 0.0;
        for (const Vec2& p : sample_points(box))
            scale = std::max(scale, std::hypot(gx(p), gy(p)));
        for (const Vec2& p : sample_points(box)) {
            const Vec2 lib = eval_weak_gradient(gb, g, p);
            EXPECT_NEAR(lib.x(), gx(p), 1e-12 * scale);
            EXPECT_NEAR(lib.y(), gy(p), 1e-12 * scale);
        }
    }
}

TEST(WeakGradient, PolynomialConsistencyWithHangingFacets)
{
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 1; k <= 4; ++k) {
        oracle::Poly P;
        P.k = k;
        P.c.resize(static_cast<Eigen::Index>(oracle::exponents(k).size()));
        for (auto& c : P.c)
            c = u(gen);
        const Rect box{0.3, 0.4, 0.2, 0.1};
        const CellLayout L = CellLayout::from_rect(box, k, {2, 2, 1, 2});
        const Eigen::VectorXd g = weak_gradient(L) * embed(L, [&](const Vec2& p) { return P(p); });
        const CellBasis gb(box, k - 1);
        for (const Vec2& p : sample_points(box)) {
            const Vec2 d = eval_weak_gradient(gb, g, p) - P.grad(p);
            EXPECT_LT(d.norm(), 1e-11 * (1.0 + P.grad(p).norm())) << k;
        }
    }
}

TEST(WeakGradient, DegreeZeroIsUnsupported)
{
    EXPECT_THROW(weak_gradient(CellLayout::from_rect(unit_square(), 0)), UnsupportedDegree);
    EXPECT_THROW(weak_divergence(CellLayout::from_rect(unit_square(), 0), [](const Vec2&) { return Vec2(1, 1); }),
                 UnsupportedDegree);
}

TEST(WeakDivergence, ZeroFieldGivesZero)
{
    const CellLayout L = CellLayout::from_rect(Rect{0, 0, 0.5, 0.5}, 2, {1, 2, 2, 1});
    const Eigen::MatrixXd D = weak_divergence(L, [](const Vec2&) { return Vec2(0.0, 0.0); });
    EXPECT_EQ(D.norm(), 0.0);
}

TEST(WeakDivergence, ConstantFieldOnScaledLinear)
{
    const Rect box{0.5, 0.25, 0.25, 0.125};
    const double hx = 0.5 * box.w;
    const Vec2 c = box.center();
    for (int k = 1; k <= 3; ++k) {
        const CellLayout L = CellLayout::from_rect(box, k);
        const Eigen::VectorXd d = weak_divergence(L, [](const Vec2&) { return Vec2(1.0, 1.0); }) *
                                  embed(L, [&](const Vec2& p) { return (p.x() - c.x()) / hx; });
        const CellBasis cb(box, k);
        for (const Vec2& p : sample_points(box))
            EXPECT_NEAR(cb.value(d, p), 1.0 / hx, 1e-11);
    }
}

TEST(WeakDivergence, VariableFieldRandomFunctionAgainstOracle)
{
    std::mt19937 gen(8);
    auto b = [](const Vec2& p) { return Vec2(p.y(), p.x()); };
    const Rect box{0.125, 0.75, 0.25, 0.125};
    for (int k = 1; k <= 3; ++k) {
        const CellLayout L = CellLayout::from_rect(box, k, {1, 2, 2, 1});
        const RandomWg v = random_wg(L, gen);
        const oracle::Poly ref = oracle::weak_divergence(box, k, b, v.v0, v.edges);
        const Eigen::VectorXd d = weak_divergence(L, b) * v.dofs;
        const CellBasis cb(box, k);
        double scale = 0.0;
        for (const Vec2& p : sample_points(box))
            scale = std::max(scale, std::abs(ref(p)));
        for (const Vec2& p : sample_points(box))
            EXPECT_NEAR(cb.value(d, p), ref(p), 1e-12 * scale) << k;
    }
}

TEST(WeakDivergence, ConstantFieldConsistencyIsProjectionOfDivergence)
{
    std::mt19937 gen(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec2 bc(0.7, -1.3);
    for (int k = 1; k <= 3; ++k) {
        oracle::Poly P;
        P.k = k;
        P.c.resize(static_cast<Eigen::Index>(oracle::exponents(k).size()));
        for (auto& c : P.c)
            c = u(gen);
        const Rect box{0.2, 0.3, 0.25, 0.25};
        const CellLayout L = CellLayout::from_rect(box, k, {2, 1, 2, 1});
        const Eigen::VectorXd d =
            weak_divergence(L, [&](const Vec2&) { return bc; }) * embed(L, [&](const Vec2& p) { return P(p); });
        const oracle::Poly ref = oracle::project([&](const Vec2& p) { return bc.dot(P.grad(p)); }, box, k);
        const CellBasis cb(box, k);
        for (const Vec2& p : sample_points(box))
            EXPECT_NEAR(cb.value(d, p), ref(p), 1e-11 * (1.0 + std::abs(ref(p))));
    }
}

TEST(WeakDivergence, MomentsEqualMassTimesOperator)
{
    const CellLayout L = CellLayout::from_rect(Rect{0, 0, 0.25, 0.5}, 2, {1, 1, 2, 2});
    auto b = [](const Vec2& p) { return Vec2(1.0 + p.x(), p.y() * p.y()); };
    const Eigen::MatrixXd D = weak_divergence(L, b);
    const Eigen::MatrixXd C = weak_divergence_moments(L, b);
    EXPECT_LT((CellBasis(L.box(), 2).mass() * D - C).norm(), 1e-13 * C.norm());
    const LocalWeakOps ops = local_weak_ops(L, b);
    EXPECT_LT((ops.div - D).norm(), 1e-13 * D.norm());
    EXPECT_LT((ops.grad - weak_gradient(L)).norm(), 1e-13 * ops.grad.norm());
}

TEST(WeakOperators, Linearity)
{
    std::mt19937 gen(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const CellLayout L = CellLayout::from_rect(Rect{0, 0, 0.5, 0.25}, 3, {2, 2, 2, 2});
    auto b = [](const Vec2& p) { return Vec2(std::sin(p.y()), 1.0); };
    const Eigen::MatrixXd G = weak_gradient(L);
    const Eigen::MatrixXd D = weak_divergence(L, b);
    const Eigen::VectorXd x = random_wg(L, gen).dofs;
    const Eigen::VectorXd y = random_wg(L, gen).dofs;
    const double a = u(gen);
    const double c = u(gen);
    EXPECT_LT((G * (a * x + c * y) - (a * (G * x) + c * (G * y))).norm(), 1e-12);
    EXPECT_LT((D * (a * x + c * y) - (a * (D * x) + c * (D * y))).norm(), 1e-12);
}

TEST(WeakOperators, DimensionsFollowFacetCount)
{
    const CellLayout L = CellLayout::from_rect(unit_square(), 2, {2, 1, 2, 1});
    EXPECT_EQ(L.num_facets(), 6);
    EXPECT_EQ(weak_gradient(L).rows(), 2 * 3);
    EXPECT_EQ(weak_gradient(L).cols(), 6 + 6 * 3);
    EXPECT_EQ(weak_divergence(L, [](const Vec2&) { return Vec2(1, 0); }).rows(), 6);
}

TEST(WeakOperators, GradientMassConditioningIndependentOfLevel)
{
    for (int k = 1; k <= 4; ++k) {
        double first = 0.0;
        for (int level = 0; level <= 10; ++level) {
            const double h = std::ldexp(1.0, -level);
            const Eigen::MatrixXd M = CellBasis(Rect{0.0, 0.0, h, h}, k - 1).mass();
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
            const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
            if (level == 0)
                first = cond;
            EXPECT_NEAR(cond, first, 1e-8 * first) << "k=" << k << " level=" << level;
        }
    }
}

TEST(WeakOperators, MeshLayoutMatchesStandaloneHangingLayout)
{
    const Mesh m = refine(uniform_grid(2), std::vector<int>{0});
    const int coarse = m.leaf_index(1); // right neighbour of the refined cell, left side split in two
    const CellLayout Lm = CellLayout::from_mesh(m, coarse, 2);
    const CellLayout Ls = CellLayout::from_rect(m.cell(1).box, 2, {2, 1, 1, 1});
    ASSERT_EQ(Lm.num_facets(), Ls.num_facets());
    // identical facet geometry in the same order gives identical operators
    for (int f = 0; f < Lm.num_facets(); ++f) {
        const auto& a = Lm.facets()[static_cast<std::size_t>(f)];
        const auto& b = Ls.facets()[static_cast<std::size_t>(f)];
        EXPECT_LT((a.seg.a - b.seg.a).norm() + (a.seg.b - b.seg.b).norm(), 1e-15);
        EXPECT_LT((a.outward - b.outward).norm(), 1e-15);
    }
    EXPECT_LT((weak_gradient(Lm) - weak_gradient(Ls)).norm(), 1e-12);
}
