// SPDX-License-Identifier: Apache-2.0
#pragma once

// Global numbering of weak Galerkin unknowns.
//
// Interior blocks (dim P_k per leaf, in leaf order) come first, followed by
// facet blocks (k+1 per facet, in facet order). Boundary facet dofs are
// constrained by Dirichlet data and eliminated from the linear system.

#include "wgcd/mesh.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/weakops.hpp"

#include <Eigen/Dense>

#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace wgcd {

class DofMap {
public:
    DofMap(const Mesh& mesh, int k) : k_(k), n_cells_(mesh.num_leaves()), n_facets_(mesh.num_facets())
    {
        require_wg_degree(k);
        const int total = n_dofs();
        free_index_.assign(static_cast<std::size_t>(total), -1);
        std::vector<char> constrained(static_cast<std::size_t>(total), 0);
        for (const Facet& f : mesh.facets())
            if (f.boundary)
                for (int j = 0; j < per_facet(); ++j) {
                    const int d = facet_offset(f.id) + j;
                    constrained[static_cast<std::size_t>(d)] = 1;
                    constrained_.push_back(d);
                }
        for (int d = 0; d < total; ++d)
            if (!constrained[static_cast<std::size_t>(d)])
                free_index_[static_cast<std::size_t>(d)] = n_free_++;
    }

    [[nodiscard]] int degree() const { return k_; }
    [[nodiscard]] int num_cells() const { return n_cells_; }
    [[nodiscard]] int num_facets() const { return n_facets_; }
    [[nodiscard]] int per_cell() const { return dim_pk(k_); }
    [[nodiscard]] int per_facet() const { return k_ + 1; }
    [[nodiscard]] int n_dofs() const { return n_cells_ * per_cell() + n_facets_ * per_facet(); }
    [[nodiscard]] int cell_offset(int leaf_index) const { return leaf_index * per_cell(); }
    [[nodiscard]] int facet_offset(int facet) const { return n_cells_ * per_cell() + facet * per_facet(); }

    [[nodiscard]] int n_free() const { return n_free_; }
    /// Position among unconstrained dofs, -1 for constrained ones.
    [[nodiscard]] int free_index(int dof) const { return free_index_[static_cast<std::size_t>(dof)]; }
    [[nodiscard]] bool is_constrained(int dof) const { return free_index(dof) < 0; }
    [[nodiscard]] const std::vector<int>& constrained_dofs() const { return constrained_; }

    /// Global indices of a cell's local dofs (layout order).
    [[nodiscard]] std::vector<int> local_dofs(const CellLayout& L, int leaf_index) const
    {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(L.n_dofs()));
        for (int i = 0; i < per_cell(); ++i)
            out.push_back(cell_offset(leaf_index) + i);
        for (const LayoutFacet& lf : L.facets())
            for (int j = 0; j < per_facet(); ++j)
                out.push_back(facet_offset(lf.facet) + j);
        return out;
    }

private:
    int k_;
    int n_cells_;
    int n_facets_;
    int n_free_ = 0;
    std::vector<int> free_index_;
    std::vector<int> constrained_;
};

inline std::shared_ptr<const DofMap> build_dofmap(const Mesh& mesh, int k)
{
    return std::make_shared<const DofMap>(mesh, k);
}

/// A weak function {v0, vb}: P_k on every leaf interior, P_k on every facet.
class WgFunction {
public:
    explicit WgFunction(std::shared_ptr<const DofMap> dofs)
        : dofs_(std::move(dofs)), coeffs_(Eigen::VectorXd::Zero(dofs_->n_dofs()))
    {
    }
    WgFunction(std::shared_ptr<const DofMap> dofs, Eigen::VectorXd coeffs) : dofs_(std::move(dofs)), coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() != dofs_->n_dofs())
            throw InvalidArgument("WgFunction: coefficient vector size does not match the dof map");
    }

    [[nodiscard]] const DofMap& dofmap() const { return *dofs_; }
    [[nodiscard]] const std::shared_ptr<const DofMap>& dofmap_ptr() const { return dofs_; }
    [[nodiscard]] const Eigen::VectorXd& coeffs() const { return coeffs_; }
    [[nodiscard]] Eigen::VectorXd& coeffs() { return coeffs_; }

    [[nodiscard]] auto interior(int leaf_index) const { return coeffs_.segment(dofs_->cell_offset(leaf_index), dofs_->per_cell()); }
    [[nodiscard]] auto interior(int leaf_index) { return coeffs_.segment(dofs_->cell_offset(leaf_index), dofs_->per_cell()); }
    [[nodiscard]] auto facet(int f) const { return coeffs_.segment(dofs_->facet_offset(f), dofs_->per_facet()); }
    [[nodiscard]] auto facet(int f) { return coeffs_.segment(dofs_->facet_offset(f), dofs_->per_facet()); }

    /// Local coefficient vector in CellLayout order.
    [[nodiscard]] Eigen::VectorXd local(const CellLayout& L, int leaf_index) const
    {
        Eigen::VectorXd v(L.n_dofs());
        v.head(L.n_interior()) = interior(leaf_index);
        for (int f = 0; f < L.num_facets(); ++f)
            v.segment(L.facet_offset(f), L.n_facet_dofs()) = facet(L.facets()[static_cast<std::size_t>(f)].facet);
        return v;
    }

    WgFunction& operator*=(double s)
    {
        coeffs_ *= s;
        return *this;
    }

private:
    std::shared_ptr<const DofMap> dofs_;
    Eigen::VectorXd coeffs_;
};

/// Embeds a function as {Pi_k u on every cell, Pi_k u on every facet}.
inline WgFunction project_to_wg(const std::shared_ptr<const DofMap>& dofs, const Mesh& mesh, const ScalarField& u)
{
    WgFunction w(dofs);
    const int k = dofs->degree();
    for (int l = 0; l < mesh.num_leaves(); ++l)
        w.interior(l) = l2_project_cell(u, mesh.leaf(l).box, k);
    for (const Facet& f : mesh.facets())
        w.facet(f.id) = l2_project_facet(u, f.seg, k);
    return w;
}

/// Full-length vector holding the facet-wise L2 projection of g on constrained dofs, zero elsewhere.
inline Eigen::VectorXd apply_dirichlet(const DofMap& dofs, const Mesh& mesh, const ScalarField& g)
{
    Eigen::VectorXd values = Eigen::VectorXd::Zero(dofs.n_dofs());
    for (const Facet& f : mesh.facets())
        if (f.boundary)
            values.segment(dofs.facet_offset(f.id), dofs.per_facet()) = l2_project_facet(g, f.seg, dofs.degree());
    return values;
}

// ---------------------------------------------------------------------------
// Plain-text coefficient dump:
//   wg <k> <n_cells> <n_facets>
//   cell <cell_id> c_0 ... c_{dim P_k - 1}
//   facet <facet_id> c_0 ... c_k
// ---------------------------------------------------------------------------

inline void write_wg_function(std::ostream& os, const Mesh& mesh, const WgFunction& u)
{
    const DofMap& d = u.dofmap();
    const auto prec = os.precision(17);
    os << "wg " << d.degree() << ' ' << d.num_cells() << ' ' << d.num_facets() << '\n';
    for (int l = 0; l < d.num_cells(); ++l) {
        os << "cell " << mesh.leaves()[static_cast<std::size_t>(l)];
        for (double c : u.interior(l))
            os << ' ' << c;
        os << '\n';
    }
    for (int f = 0; f < d.num_facets(); ++f) {
        os << "facet " << f;
        for (double c : u.facet(f))
            os << ' ' << c;
        os << '\n';
    }
    os.precision(prec);
}

inline WgFunction read_wg_function(std::istream& is, const Mesh& mesh, const std::shared_ptr<const DofMap>& dofs)
{
    std::string tag;
    int k = 0;
    int nc = 0;
    int nf = 0;
    if (!(is >> tag >> k >> nc >> nf) || tag != "wg")
        throw InvalidArgument("read_wg_function: missing header");
    if (k != dofs->degree() || nc != dofs->num_cells() || nf != dofs->num_facets())
        throw InvalidArgument("read_wg_function: dump does not match the dof map");
    WgFunction u(dofs);
    for (int r = 0; r < nc + nf; ++r) {
        int id = -1;
        if (!(is >> tag >> id))
            throw InvalidArgument("read_wg_function: truncated dump");
        if (tag == "cell") {
            const int l = mesh.leaf_index(id);
            if (l < 0)
                throw InvalidArgument("read_wg_function: unknown cell " + std::to_string(id));
            for (double& c : u.interior(l))
                is >> c;
        } else if (tag == "facet") {
            if (id < 0 || id >= nf)
                throw InvalidArgument("read_wg_function: unknown facet " + std::to_string(id));
            for (double& c : u.facet(id))
                is >> c;
        } else {
            throw InvalidArgument("read_wg_function: unexpected record '" + tag + "'");
        }
        if (!is)
            throw InvalidArgument("read_wg_function: malformed coefficients");
    }
    return u;
}

} // namespace wgcd
