// SPDX-License-Identifier: Apache-2.0
#pragma once

// Weak Galerkin bilinear form
//   a_h(w, v) = eps (grad_w w, grad_w v) + (a w0 + div_w(b w), v0) + <tau+ (w0 - wb), v0 - vb>
// local matrices, global assembly with Dirichlet elimination, and the energy norm.

#include "wgcd/dofmap.hpp"
#include "wgcd/mesh.hpp"
#include "wgcd/parallel.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/problem.hpp"
#include "wgcd/weakops.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <memory>
#include <vector>

namespace wgcd {

struct StabilizationParams {
    double eps = 1.0;
    double kappa = 1.0;
    double b_inf = 0.0; // global sup of b, constant per assembly
};

inline StabilizationParams stabilization_params(const Mesh& mesh, const ProblemData& p, int k)
{
    return {p.eps, mesh.kappa(), b_sup_norm(p, mesh, k)};
}

/// tau+ = (b.n) 1[b.n >= 0] + eps/(kappa h_T) + (|b|_inf/eps + 1) h_T + eps/h_T
inline double tau_plus(double b_dot_n, double h_T, const StabilizationParams& s)
{
    const double upwind = b_dot_n >= 0.0 ? b_dot_n : 0.0;
    return upwind + s.eps / (s.kappa * h_T) + (s.b_inf / s.eps + 1.0) * h_T + s.eps / h_T;
}

/// tau = |b.n| + eps/h_T + eps/(kappa h_T) + (|b|_inf/eps + 1) h_T
inline double tau(double b_dot_n, double h_T, const StabilizationParams& s)
{
    return std::abs(b_dot_n) + s.eps / h_T + s.eps / (s.kappa * h_T) + (s.b_inf / s.eps + 1.0) * h_T;
}

constexpr int facet_stab_order(int k) { return 2 * k + 2; }

/// Weighted jump matrix sum_E <w (phi - psi), (phi - psi)>_E with weight w(b.n, h_T).
template <class Weight>
Eigen::MatrixXd local_jump_matrix(const CellLayout& L, const ProblemData& p, Weight&& weight)
{
    const int k = L.degree();
    const int ni = L.n_interior();
    const double hT = L.box().diameter();
    const CellBasis cb(L.box(), k);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(L.n_dofs(), L.n_dofs());
    Eigen::VectorXd z(L.n_dofs());
    Eigen::VectorXd phi(ni);
    Eigen::VectorXd psi(k + 1);
    for (int f = 0; f < L.num_facets(); ++f) {
        const LayoutFacet& lf = L.facets()[static_cast<std::size_t>(f)];
        const FacetBasis fb(lf.seg, k);
        const QuadRule fq = facet_quadrature(facet_stab_order(k), lf.seg);
        const int off = L.facet_offset(f);
        for (std::size_t q = 0; q < fq.size(); ++q) {
            cb.eval(fq.points[q], phi);
            fb.eval(fq.points[q], psi);
            z.setZero();
            z.head(ni) = phi;
            z.segment(off, k + 1) = -psi;
            const double w = fq.weights[q] * weight(p.b(fq.points[q]).dot(lf.outward), hT);
            S.noalias() += w * z * z.transpose();
        }
    }
    return S;
}

/// sum_E <w (v0 - vb), v0 - vb>_E for one local dof vector, summed pointwise.
template <class Weight>
double local_jump_energy(const CellLayout& L, const ProblemData& p, const Eigen::VectorXd& v, Weight&& weight)
{
    const int k = L.degree();
    const int ni = L.n_interior();
    const double hT = L.box().diameter();
    const CellBasis cb(L.box(), k);
    const Eigen::VectorXd v0 = v.head(ni);
    Eigen::VectorXd phi(ni);
    Eigen::VectorXd psi(k + 1);
    double s = 0.0;
    for (int f = 0; f < L.num_facets(); ++f) {
        const LayoutFacet& lf = L.facets()[static_cast<std::size_t>(f)];
        const FacetBasis fb(lf.seg, k);
        const QuadRule fq = facet_quadrature(facet_stab_order(k), lf.seg);
        const auto vb = v.segment(L.facet_offset(f), k + 1);
        for (std::size_t q = 0; q < fq.size(); ++q) {
            cb.eval(fq.points[q], phi);
            fb.eval(fq.points[q], psi);
            const double d = phi.dot(v0) - psi.dot(vb);
            s += fq.weights[q] * weight(p.b(fq.points[q]).dot(lf.outward), hT) * d * d;
        }
    }
    return s;
}

/// Stabilization block s(., .) on one cell.
inline Eigen::MatrixXd local_stabilization(const CellLayout& L, const ProblemData& p, const StabilizationParams& s)
{
    return local_jump_matrix(L, p, [&](double bn, double hT) { return tau_plus(bn, hT, s); });
}

/// Block-diagonal mass matrix of P_{k-1}(T)^2.
inline Eigen::MatrixXd vector_mass(const Rect& box, int k)
{
    const Eigen::MatrixXd m = CellBasis(box, k - 1).mass();
    const auto n = m.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.topLeftCorner(n, n) = m;
    out.bottomRightCorner(n, n) = m;
    return out;
}

/// (a phi_j, phi_i)_T
inline Eigen::MatrixXd local_reaction(const Rect& box, int k, const ScalarField& a)
{
    const CellBasis cb(box, k);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(cb.size(), cb.size());
    Eigen::VectorXd phi(cb.size());
    const QuadRule rule = cell_quadrature(data_quadrature_order(k), box);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        cb.eval(rule.points[q], phi);
        m.noalias() += (rule.weights[q] * a(rule.points[q])) * phi * phi.transpose();
    }
    return m;
}

/// (f, phi_i)_T
inline Eigen::VectorXd local_load(const Rect& box, int k, const ScalarField& f)
{
    const CellBasis cb(box, k);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(cb.size());
    Eigen::VectorXd phi(cb.size());
    const QuadRule rule = cell_quadrature(data_quadrature_order(k), box);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        cb.eval(rule.points[q], phi);
        r += (rule.weights[q] * f(rule.points[q])) * phi;
    }
    return r;
}

/// Local matrix with entry (i, j) = a_h(phi_j, phi_i) over the cell's interior and facet dofs.
inline Eigen::MatrixXd local_matrix(const CellLayout& L, const ProblemData& p, const LocalWeakOps& ops,
                                    const StabilizationParams& s)
{
    const int ni = L.n_interior();
    Eigen::MatrixXd A = p.eps * (ops.grad.transpose() * vector_mass(L.box(), L.degree()) * ops.grad);
    A.topLeftCorner(ni, ni) += local_reaction(L.box(), L.degree(), p.a);
    A.topRows(ni) += ops.div_moments;
    A += local_stabilization(L, p, s);
    return A;
}

inline Eigen::MatrixXd local_matrix(const CellLayout& L, const ProblemData& p, const StabilizationParams& s)
{
    return local_matrix(L, p, local_weak_ops(L, p.b), s);
}

// ---------------------------------------------------------------------------
// Global system
// ---------------------------------------------------------------------------

struct SparseSystem {
    Eigen::SparseMatrix<double> matrix; // over unconstrained dofs
    Eigen::VectorXd rhs;
    std::shared_ptr<const DofMap> dofs;
    Eigen::VectorXd dirichlet; // full-length, nonzero on constrained dofs only
};

/// Assembles a_h(u, v) = (f, v0) over the unconstrained dofs, moving Dirichlet data to the right-hand side.
inline SparseSystem assemble(const Mesh& mesh, const ProblemData& p, int k)
{
    require_wg_degree(k);
    validate(p, mesh, k);
    SparseSystem sys;
    sys.dofs = build_dofmap(mesh, k);
    const DofMap& dm = *sys.dofs;
    sys.dirichlet = apply_dirichlet(dm, mesh, p.g);
    sys.rhs = Eigen::VectorXd::Zero(dm.n_free());
    const StabilizationParams stab = stabilization_params(mesh, p, k);
    const int n = mesh.num_leaves();

    Eigen::VectorXi col_nnz = Eigen::VectorXi::Zero(dm.n_free());
    for (int l = 0; l < n; ++l) {
        const int local = dm.per_cell() + static_cast<int>(mesh.cell_facets(l).size()) * dm.per_facet();
        for (const int d : dm.local_dofs(CellLayout::from_mesh(mesh, l, k), l))
            if (const int c = dm.free_index(d); c >= 0)
                col_nnz[c] += local;
    }
    sys.matrix.resize(dm.n_free(), dm.n_free());
    sys.matrix.reserve(col_nnz);

    constexpr int block = 2048;
    std::vector<Eigen::MatrixXd> mats;
    std::vector<Eigen::VectorXd> loads;
    std::vector<std::vector<int>> maps;
    for (int begin = 0; begin < n; begin += block) {
        const int count = std::min(block, n - begin);
        mats.assign(static_cast<std::size_t>(count), {});
        loads.assign(static_cast<std::size_t>(count), {});
        maps.assign(static_cast<std::size_t>(count), {});
        parallel_for(count, [&](int i) {
            const int l = begin + i;
            const CellLayout L = CellLayout::from_mesh(mesh, l, k);
            mats[static_cast<std::size_t>(i)] = local_matrix(L, p, stab);
            loads[static_cast<std::size_t>(i)] = local_load(L.box(), k, p.f);
            maps[static_cast<std::size_t>(i)] = dm.local_dofs(L, l);
        });
        for (int i = 0; i < count; ++i) {
            const auto& A = mats[static_cast<std::size_t>(i)];
            const auto& map = maps[static_cast<std::size_t>(i)];
            const auto& F = loads[static_cast<std::size_t>(i)];
            const int nl = static_cast<int>(map.size());
            for (int a = 0; a < nl; ++a) {
                const int row = dm.free_index(map[static_cast<std::size_t>(a)]);
                if (row < 0)
                    continue;
                if (a < F.size())
                    sys.rhs[row] += F[a];
                for (int b = 0; b < nl; ++b) {
                    const int gd = map[static_cast<std::size_t>(b)];
                    const int col = dm.free_index(gd);
                    if (col >= 0)
                        sys.matrix.coeffRef(row, col) += A(a, b);
                    else
                        sys.rhs[row] -= A(a, b) * sys.dirichlet[gd];
                }
            }
        }
    }
    sys.matrix.makeCompressed();
    return sys;
}

/// Full weak function from a solution over the unconstrained dofs plus the Dirichlet values.
inline WgFunction expand_solution(const SparseSystem& sys, const Eigen::VectorXd& x)
{
    WgFunction u(sys.dofs, sys.dirichlet);
    const DofMap& dm = *sys.dofs;
    for (int d = 0; d < dm.n_dofs(); ++d)
        if (const int i = dm.free_index(d); i >= 0)
            u.coeffs()[d] = x[i];
    return u;
}

/// Restriction of a full weak function to the unconstrained dofs.
inline Eigen::VectorXd restrict_to_free(const WgFunction& u)
{
    const DofMap& dm = u.dofmap();
    Eigen::VectorXd x(dm.n_free());
    for (int d = 0; d < dm.n_dofs(); ++d)
        if (const int i = dm.free_index(d); i >= 0)
            x[i] = u.coeffs()[d];
    return x;
}

/// a_h(u, v) by cell-wise evaluation, without assembling.
inline double bilinear_apply(const WgFunction& u, const WgFunction& v, const Mesh& mesh, const ProblemData& p, int k)
{
    const StabilizationParams stab = stabilization_params(mesh, p, k);
    std::vector<double> parts(static_cast<std::size_t>(mesh.num_leaves()), 0.0);
    parallel_for(mesh.num_leaves(), [&](int l) {
        const CellLayout L = CellLayout::from_mesh(mesh, l, k);
        parts[static_cast<std::size_t>(l)] = v.local(L, l).dot(local_matrix(L, p, stab) * u.local(L, l));
    });
    double s = 0.0;
    for (double x : parts)
        s += x;
    return s;
}

struct EnergyParts {
    double grad = 0.0; // eps |grad_w v|^2
    double l2 = 0.0;   // |v0|^2
    double jump = 0.0; // <tau (v0 - vb), v0 - vb>
    [[nodiscard]] double total() const { return grad + l2 + jump; }
};

inline EnergyParts energy_parts(const WgFunction& v, const Mesh& mesh, const ProblemData& p, int k)
{
    const StabilizationParams stab = stabilization_params(mesh, p, k);
    std::vector<EnergyParts> parts(static_cast<std::size_t>(mesh.num_leaves()));
    parallel_for(mesh.num_leaves(), [&](int l) {
        const CellLayout L = CellLayout::from_mesh(mesh, l, k);
        const Eigen::VectorXd vl = v.local(L, l);
        const Eigen::VectorXd g = weak_gradient(L) * vl;
        const Eigen::VectorXd v0 = vl.head(L.n_interior());
        EnergyParts& e = parts[static_cast<std::size_t>(l)];
        e.grad = p.eps * g.dot(vector_mass(L.box(), k) * g);
        e.l2 = v0.dot(CellBasis(L.box(), k).mass() * v0);
        e.jump = local_jump_energy(L, p, vl, [&](double bn, double hT) { return tau(bn, hT, stab); });
    });
    EnergyParts total;
    for (const EnergyParts& e : parts) {
        total.grad += e.grad;
        total.l2 += e.l2;
        total.jump += e.jump;
    }
    return total;
}

/// Weak Galerkin energy norm.
inline double energy_norm(const WgFunction& v, const Mesh& mesh, const ProblemData& p, int k)
{
    return std::sqrt(std::max(energy_parts(v, mesh, p, k).total(), 0.0));
}

} // namespace wgcd
