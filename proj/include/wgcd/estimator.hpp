// SPDX-License-Identifier: Apache-2.0
#pragma once

// Residual a posteriori estimator
//   eta_h^2 = sum_T (eta_T1^2 + eta_T2^2) + sum_{E interior} eta_E^2
// with
//   eta_T1 = alpha_T |f_h + div(eps grad_w u_h) - div_w(b u_h) - a_h u_h0|_T
//   eta_T2^2 = <tau (u_h0 - u_hb), u_h0 - u_hb>_{dT}
//   eta_E^2 = alpha_E eps^{-1/2} |[[eps n . grad_w u_h]]|_E^2
// and the data oscillation.

#include "wgcd/assembly.hpp"
#include "wgcd/dofmap.hpp"
#include "wgcd/mesh.hpp"
#include "wgcd/parallel.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/problem.hpp"
#include "wgcd/weakops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace wgcd {

enum class EdgeWeightMode {
    literal, // alpha_E eps^{-1/2} |J|^2
    squared, // alpha_E^2 eps^{-1/2} |J|^2
};

inline EdgeWeightMode parse_edge_weight_mode(const std::string& s)
{
    if (s == "literal")
        return EdgeWeightMode::literal;
    if (s == "squared")
        return EdgeWeightMode::squared;
    throw InvalidArgument("unknown edge weight mode '" + s + "'");
}

inline std::string to_string(EdgeWeightMode m) { return m == EdgeWeightMode::literal ? "literal" : "squared"; }

struct EstimatorOptions {
    EdgeWeightMode edge_weight_mode = EdgeWeightMode::literal;
};

/// min{h eps^{-1/2}, c0^{-1/2}}, with 1 in place of c0^{-1/2} when c0 = 0.
inline double estimator_weight(double h, double eps, double c0)
{
    const double cap = c0 > 0.0 ? 1.0 / std::sqrt(c0) : 1.0;
    return std::min(h / std::sqrt(eps), cap);
}

struct EstimatorReport {
    std::vector<int> cell_ids; // leaf cell ids, leaf order
    std::vector<double> eta_T1;
    std::vector<double> eta_T2;
    std::vector<double> alpha_T;
    std::vector<double> osc_T;
    std::vector<double> eta_E;   // per facet, zero on the boundary
    std::vector<double> alpha_E; // per facet
    std::vector<bool> facet_boundary;
    double eta = 0.0;
    double osc = 0.0;

    std::vector<double> eta_T; // marking indicator per leaf

    [[nodiscard]] bool empty() const { return cell_ids.empty(); }
};

struct CellEstimate {
    double eta_T1 = 0.0;
    double eta_T2 = 0.0;
    double osc = 0.0;
    double alpha = 0.0;
    Eigen::VectorXd weak_grad; // (gx; gy) in P_{k-1}^2
};

/// Rule order for the non-polynomial remainders f - f_h and (a - a_h) u0.
constexpr int oscillation_quadrature_order(int k) { return std::max(data_quadrature_order(k), 12); }

/// alpha_T^2 (|f - f_h|^2 + |(a - a_h) u0|^2) on one cell; valid for any k >= 0.
inline double data_oscillation_sq(const Rect& box, int k, const ScalarField& f, const ScalarField& a,
                                  const Eigen::VectorXd& u0, double alpha)
{
    const int order = oscillation_quadrature_order(k);
    const CellBasis cb(box, k);
    const Eigen::VectorXd fh = l2_project_cell(f, box, k, order);
    const Eigen::VectorXd ah = l2_project_cell(a, box, k, order);
    const QuadRule rule = cell_quadrature(order, box);
    Eigen::VectorXd phi(cb.size());
    double sf = 0.0;
    double sa = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2& x = rule.points[q];
        cb.eval(x, phi);
        const double df = f(x) - phi.dot(fh);
        const double da = (a(x) - phi.dot(ah)) * phi.dot(u0);
        sf += rule.weights[q] * df * df;
        sa += rule.weights[q] * da * da;
    }
    return alpha * alpha * (sf + sa);
}

/// Cell terms of the estimator from the local dof vector of u_h.
inline CellEstimate estimate_cell(const CellLayout& L, const Eigen::VectorXd& u_loc, const ProblemData& p,
                                  const StabilizationParams& stab)
{
    const int k = L.degree();
    const Rect& box = L.box();
    const CellBasis cb(box, k);
    const CellBasis gb(box, k - 1);
    const int n = cb.size();
    const int ng = gb.size();

    CellEstimate out;
    out.alpha = estimator_weight(box.diameter(), p.eps, p.c0);
    out.weak_grad = weak_gradient(L) * u_loc;
    const Eigen::VectorXd conv = weak_divergence(L, p.b) * u_loc;
    const Eigen::VectorXd u0 = u_loc.head(n);

    // div(eps grad_w u_h), embedded in the P_k layout (P_{k-1} monomials are a prefix of P_k)
    Eigen::VectorXd diff = Eigen::VectorXd::Zero(n);
    diff.head(ng) = p.eps * (gb.dx_matrix() * out.weak_grad.head(ng) + gb.dy_matrix() * out.weak_grad.tail(ng));

    const Eigen::VectorXd fh = l2_project_cell(p.f, box, k);
    const Eigen::VectorXd ah = l2_project_cell(p.a, box, k);
    const Eigen::VectorXd poly = fh + diff - conv;

    const QuadRule rule = cell_quadrature(std::max(4 * k, data_quadrature_order(k)), box);
    Eigen::VectorXd phi(n);
    double r2 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        cb.eval(rule.points[q], phi);
        const double r = phi.dot(poly) - phi.dot(ah) * phi.dot(u0);
        r2 += rule.weights[q] * r * r;
    }
    out.eta_T1 = out.alpha * std::sqrt(r2);

    out.eta_T2 = std::sqrt(local_jump_energy(L, p, u_loc, [&](double bn, double hT) { return tau(bn, hT, stab); }));
    out.osc = std::sqrt(data_oscillation_sq(box, k, p.f, p.a, u0, out.alpha));
    return out;
}

/// eta_E from the weak gradients of the two owners; `grad_plus` belongs to owners[0].
inline double edge_indicator(const Facet& f, const Rect& box_plus, const Eigen::VectorXd& grad_plus,
                             const Rect& box_minus, const Eigen::VectorXd& grad_minus, int k, const ProblemData& p,
                             EdgeWeightMode mode)
{
    if (f.boundary)
        return 0.0;
    const CellBasis gp(box_plus, k - 1);
    const CellBasis gm(box_minus, k - 1);
    const QuadRule rule = facet_quadrature(2 * k, f.seg);
    double j2 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2& x = rule.points[q];
        const double jump = p.eps * (eval_weak_gradient(gp, grad_plus, x) - eval_weak_gradient(gm, grad_minus, x)).dot(f.normal);
        j2 += rule.weights[q] * jump * jump;
    }
    const double alpha = estimator_weight(f.length(), p.eps, p.c0);
    const double w = mode == EdgeWeightMode::literal ? alpha : alpha * alpha;
    return std::sqrt(w * j2 / std::sqrt(p.eps));
}

// ---------------------------------------------------------------------------
// Per-entity entry points
// ---------------------------------------------------------------------------

inline double cell_residual(const Mesh& mesh, int leaf, const WgFunction& u, const ProblemData& p, int k)
{
    const CellLayout L = CellLayout::from_mesh(mesh, leaf, k);
    return estimate_cell(L, u.local(L, leaf), p, stabilization_params(mesh, p, k)).eta_T1;
}

inline double stab_indicator(const Mesh& mesh, int leaf, const WgFunction& u, const ProblemData& p, int k)
{
    const CellLayout L = CellLayout::from_mesh(mesh, leaf, k);
    return estimate_cell(L, u.local(L, leaf), p, stabilization_params(mesh, p, k)).eta_T2;
}

inline double oscillation(const Mesh& mesh, int leaf, const WgFunction& u, const ProblemData& p, int k)
{
    const Rect& box = mesh.leaf(leaf).box;
    return std::sqrt(data_oscillation_sq(box, k, p.f, p.a, u.interior(leaf), estimator_weight(box.diameter(), p.eps, p.c0)));
}

inline double edge_jump(const Mesh& mesh, int facet, const WgFunction& u, const ProblemData& p, int k,
                        EdgeWeightMode mode = EdgeWeightMode::literal)
{
    const Facet& f = mesh.facet(facet);
    if (f.boundary)
        return 0.0;
    auto grad_of = [&](int cell_id) {
        const int l = mesh.leaf_index(cell_id);
        const CellLayout L = CellLayout::from_mesh(mesh, l, k);
        return Eigen::VectorXd(weak_gradient(L) * u.local(L, l));
    };
    return edge_indicator(f, mesh.cell(f.owners[0]).box, grad_of(f.owners[0]), mesh.cell(f.owners[1]).box,
                          grad_of(f.owners[1]), k, p, mode);
}

/// All estimator parts for u_h on `mesh`.
inline EstimatorReport global_estimate(const Mesh& mesh, const WgFunction& u, const ProblemData& p, int k,
                                       const EstimatorOptions& opt = {})
{
    require_wg_degree(k);
    const StabilizationParams stab = stabilization_params(mesh, p, k);
    const int n = mesh.num_leaves();
    EstimatorReport rep;
    rep.cell_ids.assign(mesh.leaves().begin(), mesh.leaves().end());
    std::vector<CellEstimate> cells(static_cast<std::size_t>(n));
    parallel_for(n, [&](int l) {
        const CellLayout L = CellLayout::from_mesh(mesh, l, k);
        cells[static_cast<std::size_t>(l)] = estimate_cell(L, u.local(L, l), p, stab);
    });
    rep.eta_T1.resize(static_cast<std::size_t>(n));
    rep.eta_T2.resize(static_cast<std::size_t>(n));
    rep.alpha_T.resize(static_cast<std::size_t>(n));
    rep.osc_T.resize(static_cast<std::size_t>(n));
    double eta2 = 0.0;
    double osc2 = 0.0;
    for (int l = 0; l < n; ++l) {
        const auto i = static_cast<std::size_t>(l);
        rep.eta_T1[i] = cells[i].eta_T1;
        rep.eta_T2[i] = cells[i].eta_T2;
        rep.alpha_T[i] = cells[i].alpha;
        rep.osc_T[i] = cells[i].osc;
        eta2 += cells[i].eta_T1 * cells[i].eta_T1 + cells[i].eta_T2 * cells[i].eta_T2;
        osc2 += cells[i].osc * cells[i].osc;
    }

    const int nf = mesh.num_facets();
    rep.eta_E.assign(static_cast<std::size_t>(nf), 0.0);
    rep.alpha_E.resize(static_cast<std::size_t>(nf));
    rep.facet_boundary.resize(static_cast<std::size_t>(nf));
    parallel_for(nf, [&](int e) {
        const Facet& f = mesh.facet(e);
        const auto i = static_cast<std::size_t>(e);
        rep.alpha_E[i] = estimator_weight(f.length(), p.eps, p.c0);
        if (f.boundary)
            return;
        const auto lp = static_cast<std::size_t>(mesh.leaf_index(f.owners[0]));
        const auto lm = static_cast<std::size_t>(mesh.leaf_index(f.owners[1]));
        rep.eta_E[i] = edge_indicator(f, mesh.cell(f.owners[0]).box, cells[lp].weak_grad, mesh.cell(f.owners[1]).box,
                                      cells[lm].weak_grad, k, p, opt.edge_weight_mode);
    });
    for (int e = 0; e < nf; ++e) {
        rep.facet_boundary[static_cast<std::size_t>(e)] = mesh.facet(e).boundary;
        eta2 += rep.eta_E[static_cast<std::size_t>(e)] * rep.eta_E[static_cast<std::size_t>(e)];
    }
    // eta_T^2 = eta_T1^2 + eta_T2^2 + half of each adjacent interior eta_E^2
    rep.eta_T.resize(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        const auto i = static_cast<std::size_t>(l);
        rep.eta_T[i] = rep.eta_T1[i] * rep.eta_T1[i] + rep.eta_T2[i] * rep.eta_T2[i];
    }
    for (const Facet& f : mesh.facets()) {
        if (f.boundary)
            continue;
        const double half = 0.5 * rep.eta_E[static_cast<std::size_t>(f.id)] * rep.eta_E[static_cast<std::size_t>(f.id)];
        for (int owner : f.owners)
            rep.eta_T[static_cast<std::size_t>(mesh.leaf_index(owner))] += half;
    }
    for (double& v : rep.eta_T)
        v = std::sqrt(v);
    rep.eta = std::sqrt(eta2);
    rep.osc = std::sqrt(osc2);
    return rep;
}

/// Two CSV tables: cells (cell_id,eta_T1,eta_T2,osc,alpha_T) then facets (facet_id,eta_E,alpha_E).
inline void write_estimator_csv(std::ostream& os, const EstimatorReport& rep)
{
    const auto prec = os.precision(17);
    os << "cell_id,eta_T1,eta_T2,osc,alpha_T\n";
    for (std::size_t l = 0; l < rep.cell_ids.size(); ++l)
        os << rep.cell_ids[l] << ',' << rep.eta_T1[l] << ',' << rep.eta_T2[l] << ',' << rep.osc_T[l] << ','
           << rep.alpha_T[l] << '\n';
    os << "facet_id,eta_E,alpha_E\n";
    for (std::size_t e = 0; e < rep.eta_E.size(); ++e)
        os << e << ',' << rep.eta_E[e] << ',' << rep.alpha_E[e] << '\n';
    os.precision(prec);
}

} // namespace wgcd
