// SPDX-License-Identifier: Apache-2.0
#pragma once

// Local discrete weak gradient (into P_{k-1}(T)^2) and weak divergence of b*v
// (into P_k(T)) acting on the weak Galerkin dofs of one rectangular cell.
//
// Local dof layout: the dim P_k interior coefficients first, then k+1
// coefficients per boundary facet in the order of CellLayout::facets().

#include "wgcd/mesh.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace wgcd {

struct LayoutFacet {
    int facet = -1; // global facet id, -1 for standalone layouts
    Segment seg;
    Vec2 outward = Vec2::Zero();
};

class CellLayout {
public:
    CellLayout(const Rect& box, int degree, std::vector<LayoutFacet> facets)
        : box_(box), degree_(degree), facets_(std::move(facets))
    {
    }

    static CellLayout from_mesh(const Mesh& mesh, int leaf_index, int degree)
    {
        std::vector<LayoutFacet> fs;
        for (const CellFacet& cf : mesh.cell_facets(leaf_index))
            fs.push_back({cf.facet, mesh.facet(cf.facet).seg, cf.outward});
        return CellLayout(mesh.leaf(leaf_index).box, degree, std::move(fs));
    }

    /// Standalone cell whose side s is cut into splits[s] equal facets.
    static CellLayout from_rect(const Rect& box, int degree, std::array<int, 4> splits = {1, 1, 1, 1})
    {
        std::vector<LayoutFacet> fs;
        for (int si = 0; si < 4; ++si) {
            const auto s = static_cast<Side>(si);
            const Segment full = side_segment(box, s);
            const int m = splits[static_cast<std::size_t>(si)];
            for (int p = 0; p < m; ++p) {
                const Vec2 a = full.a + (full.b - full.a) * (static_cast<double>(p) / m);
                const Vec2 b = full.a + (full.b - full.a) * (static_cast<double>(p + 1) / m);
                fs.push_back({-1, Segment{a, b}, side_normal(s)});
            }
        }
        return CellLayout(box, degree, std::move(fs));
    }

    [[nodiscard]] const Rect& box() const { return box_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] const std::vector<LayoutFacet>& facets() const { return facets_; }
    [[nodiscard]] int num_facets() const { return static_cast<int>(facets_.size()); }
    [[nodiscard]] int n_interior() const { return dim_pk(degree_); }
    [[nodiscard]] int n_facet_dofs() const { return degree_ + 1; }
    [[nodiscard]] int n_dofs() const { return n_interior() + num_facets() * n_facet_dofs(); }
    [[nodiscard]] int facet_offset(int local_facet) const { return n_interior() + local_facet * n_facet_dofs(); }

private:
    Rect box_;
    int degree_;
    std::vector<LayoutFacet> facets_;
};

inline void require_wg_degree(int k)
{
    if (k < 1)
        throw UnsupportedDegree("weak Galerkin degree must be >= 1, got " + std::to_string(k));
}

/// Right-hand side moments of the weak gradient:
/// rows = test functions (phi_m, 0) then (0, phi_m) of P_{k-1}; columns = local dofs.
inline Eigen::MatrixXd weak_gradient_moments(const CellLayout& L)
{
    const int k = L.degree();
    require_wg_degree(k);
    const CellBasis vb(L.box(), k);
    const CellBasis tb(L.box(), k - 1);
    const int nt = tb.size();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * nt, L.n_dofs());

    Eigen::VectorXd phi(vb.size());
    Eigen::VectorXd dx(nt);
    Eigen::VectorXd dy(nt);
    const QuadRule cq = cell_quadrature(2 * k, L.box());
    for (std::size_t q = 0; q < cq.size(); ++q) {
        vb.eval(cq.points[q], phi);
        tb.grad(cq.points[q], dx, dy);
        const double w = cq.weights[q];
        B.block(0, 0, nt, vb.size()).noalias() -= w * dx * phi.transpose();
        B.block(nt, 0, nt, vb.size()).noalias() -= w * dy * phi.transpose();
    }

    Eigen::VectorXd t(nt);
    for (int f = 0; f < L.num_facets(); ++f) {
        const LayoutFacet& lf = L.facets()[static_cast<std::size_t>(f)];
        const FacetBasis fb(lf.seg, k);
        Eigen::VectorXd psi(fb.size());
        const QuadRule fq = facet_quadrature(2 * k, lf.seg);
        const int off = L.facet_offset(f);
        for (std::size_t q = 0; q < fq.size(); ++q) {
            fb.eval(fq.points[q], psi);
            tb.eval(fq.points[q], t);
            const double w = fq.weights[q];
            B.block(0, off, nt, fb.size()).noalias() += (w * lf.outward.x()) * t * psi.transpose();
            B.block(nt, off, nt, fb.size()).noalias() += (w * lf.outward.y()) * t * psi.transpose();
        }
    }
    return B;
}

/// Local weak gradient matrix G: dofs -> coefficients (gx; gy) in P_{k-1}(T)^2.
inline Eigen::MatrixXd weak_gradient(const CellLayout& L)
{
    require_wg_degree(L.degree());
    const Eigen::MatrixXd B = weak_gradient_moments(L);
    const CellBasis tb(L.box(), L.degree() - 1);
    const Eigen::LLT<Eigen::MatrixXd> llt(tb.mass());
    const int nt = tb.size();
    Eigen::MatrixXd G(2 * nt, L.n_dofs());
    G.topRows(nt) = llt.solve(B.topRows(nt));
    G.bottomRows(nt) = llt.solve(B.bottomRows(nt));
    return G;
}

/// Right-hand side moments of the weak divergence of b*v against phi_m in P_k(T).
/// Equals M_k * D and is exactly the convection block (grad_w.(b w), v0) of the bilinear form.
inline Eigen::MatrixXd weak_divergence_moments(const CellLayout& L, const VectorField& b)
{
    const int k = L.degree();
    require_wg_degree(k);
    const CellBasis cb(L.box(), k);
    const int n = cb.size();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, L.n_dofs());
    const int order = 2 * k + 2;

    Eigen::VectorXd phi(n);
    Eigen::VectorXd dx(n);
    Eigen::VectorXd dy(n);
    const QuadRule cq = cell_quadrature(order, L.box());
    for (std::size_t q = 0; q < cq.size(); ++q) {
        cb.eval(cq.points[q], phi);
        cb.grad(cq.points[q], dx, dy);
        const Vec2 bq = b(cq.points[q]);
        C.leftCols(n).noalias() -= cq.weights[q] * (bq.x() * dx + bq.y() * dy) * phi.transpose();
    }

    for (int f = 0; f < L.num_facets(); ++f) {
        const LayoutFacet& lf = L.facets()[static_cast<std::size_t>(f)];
        const FacetBasis fb(lf.seg, k);
        Eigen::VectorXd psi(fb.size());
        const QuadRule fq = facet_quadrature(order, lf.seg);
        const int off = L.facet_offset(f);
        for (std::size_t q = 0; q < fq.size(); ++q) {
            fb.eval(fq.points[q], psi);
            cb.eval(fq.points[q], phi);
            const double bn = b(fq.points[q]).dot(lf.outward);
            C.block(0, off, n, fb.size()).noalias() += (fq.weights[q] * bn) * phi * psi.transpose();
        }
    }
    return C;
}

/// Local weak divergence matrix D: dofs -> coefficients of grad_w.(b v) in P_k(T).
inline Eigen::MatrixXd weak_divergence(const CellLayout& L, const VectorField& b)
{
    const Eigen::MatrixXd C = weak_divergence_moments(L, b);
    const CellBasis cb(L.box(), L.degree());
    return Eigen::LLT<Eigen::MatrixXd>(cb.mass()).solve(C);
}

struct LocalWeakOps {
    Eigen::MatrixXd grad;        // 2 dim P_{k-1} x n_dofs
    Eigen::MatrixXd div;         // dim P_k x n_dofs
    Eigen::MatrixXd div_moments; // M_k * div
};

inline LocalWeakOps local_weak_ops(const CellLayout& L, const VectorField& b)
{
    LocalWeakOps ops;
    ops.grad = weak_gradient(L);
    ops.div_moments = weak_divergence_moments(L, b);
    const CellBasis cb(L.box(), L.degree());
    ops.div = Eigen::LLT<Eigen::MatrixXd>(cb.mass()).solve(ops.div_moments);
    return ops;
}

/// Value of a weak gradient (gx; gy) coefficient vector at p.
inline Vec2 eval_weak_gradient(const CellBasis& grad_basis, const Eigen::Ref<const Eigen::VectorXd>& g, const Vec2& p)
{
    const int nt = grad_basis.size();
    const Eigen::VectorXd t = grad_basis.eval(p);
    return {t.dot(g.head(nt)), t.dot(g.segment(nt, nt))};
}

} // namespace wgcd
