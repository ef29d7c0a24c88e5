// SPDX-License-Identifier: Apache-2.0
#pragma once

// Quadtree mesh of an axis-aligned rectangle with one-irregular refinement.
//
// All quadtree nodes are kept in `cells()`; ids are stable across refinement
// (children are appended). The active mesh is the set of leaves. Facets are
// stored at the finest subdivision of every mesh edge, so a coarse cell next
// to a refined neighbour owns two facets on that side.

#include "wgcd/types.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace wgcd {

enum class Side : int { left = 0, right = 1, bottom = 2, top = 3 };

struct Cell {
    int id = -1;
    int parent = -1;
    std::array<int, 4> children{-1, -1, -1, -1};
    int level = 0;
    // integer position in the level-`level` lattice of the domain
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    Rect box;

    [[nodiscard]] bool is_leaf() const { return children[0] < 0; }
    [[nodiscard]] double diameter() const { return box.diameter(); }
};

struct Facet {
    int id = -1;
    Segment seg;
    bool boundary = false;
    // owner cell ids; owners[1] == -1 on the boundary; owners[0] < owners[1] otherwise
    std::array<int, 2> owners{-1, -1};
    // points from owners[0] into owners[1]; outward on the boundary
    Vec2 normal = Vec2::Zero();

    [[nodiscard]] double length() const { return seg.length(); }
};

/// Facet as seen from one of its owners.
struct CellFacet {
    int facet = -1;
    Side side = Side::left;
    Vec2 outward = Vec2::Zero();
};

struct FacetSides {
    int plus = -1;  // owners[0]
    int minus = -1; // owners[1], -1 on the boundary
    Vec2 normal = Vec2::Zero();
};

class Mesh {
public:
    Mesh() = default;

    [[nodiscard]] const Rect& domain() const { return domain_; }
    [[nodiscard]] int base_n() const { return base_n_; }

    /// Every quadtree node, indexed by id.
    [[nodiscard]] std::span<const Cell> cells() const { return cells_; }
    [[nodiscard]] const Cell& cell(int id) const { return cells_.at(static_cast<std::size_t>(id)); }

    /// Active (leaf) cell ids in ascending order.
    [[nodiscard]] std::span<const int> leaves() const { return leaves_; }
    [[nodiscard]] int num_leaves() const { return static_cast<int>(leaves_.size()); }
    [[nodiscard]] const Cell& leaf(int leaf_index) const { return cells_[static_cast<std::size_t>(leaves_[static_cast<std::size_t>(leaf_index)])]; }

    /// Position of `cell_id` in leaves(), or -1 for non-leaves.
    [[nodiscard]] int leaf_index(int cell_id) const
    {
        if (cell_id < 0 || cell_id >= static_cast<int>(leaf_pos_.size()))
            return -1;
        return leaf_pos_[static_cast<std::size_t>(cell_id)];
    }

    [[nodiscard]] std::span<const Facet> facets() const { return facets_; }
    [[nodiscard]] const Facet& facet(int id) const { return facets_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] int num_facets() const { return static_cast<int>(facets_.size()); }

    /// Facets on the boundary of a leaf, ordered by side then position along the side.
    [[nodiscard]] std::span<const CellFacet> cell_facets(int leaf_index) const
    {
        const auto b = static_cast<std::size_t>(cell_facet_offsets_[static_cast<std::size_t>(leaf_index)]);
        const auto e = static_cast<std::size_t>(cell_facet_offsets_[static_cast<std::size_t>(leaf_index) + 1]);
        return std::span<const CellFacet>(cell_facet_data_).subspan(b, e - b);
    }

    [[nodiscard]] double kappa() const { return kappa_; }
    [[nodiscard]] int max_level() const
    {
        int m = 0;
        for (int id : leaves_)
            m = std::max(m, cells_[static_cast<std::size_t>(id)].level);
        return m;
    }

    [[nodiscard]] int num_boundary_facets() const
    {
        return static_cast<int>(std::count_if(facets_.begin(), facets_.end(), [](const Facet& f) { return f.boundary; }));
    }
    [[nodiscard]] int num_interior_facets() const { return num_facets() - num_boundary_facets(); }

    /// Leaves adjacent to side `s` of cell `id` (empty on the domain boundary).
    [[nodiscard]] std::vector<int> neighbours(int id, Side s) const;

    friend Mesh uniform_grid(int n, const Rect& domain);
    friend Mesh refine(const Mesh& mesh, std::span<const int> marked);

private:
    using Key = std::uint64_t;

    static Key key(int level, std::int64_t ix, std::int64_t iy)
    {
        return (static_cast<Key>(level) << 56) | (static_cast<Key>(ix) << 28) | static_cast<Key>(iy);
    }

    [[nodiscard]] std::int64_t lattice_size(int level) const { return static_cast<std::int64_t>(base_n_) << level; }

    [[nodiscard]] Rect box_of(int level, std::int64_t ix, std::int64_t iy) const
    {
        const double n = static_cast<double>(lattice_size(level));
        const double x0 = domain_.x0 + domain_.w * (static_cast<double>(ix) / n);
        const double x1 = domain_.x0 + domain_.w * (static_cast<double>(ix + 1) / n);
        const double y0 = domain_.y0 + domain_.h * (static_cast<double>(iy) / n);
        const double y1 = domain_.y0 + domain_.h * (static_cast<double>(iy + 1) / n);
        return Rect{x0, y0, x1 - x0, y1 - y0};
    }

    [[nodiscard]] int find(int level, std::int64_t ix, std::int64_t iy) const
    {
        auto it = lookup_.find(key(level, ix, iy));
        return it == lookup_.end() ? -1 : it->second;
    }

    /// Same-level lattice neighbour position; false outside the domain.
    [[nodiscard]] bool neighbour_position(const Cell& c, Side s, std::int64_t& nx, std::int64_t& ny) const
    {
        nx = c.ix;
        ny = c.iy;
        switch (s) {
        case Side::left: --nx; break;
        case Side::right: ++nx; break;
        case Side::bottom: --ny; break;
        case Side::top: ++ny; break;
        }
        const std::int64_t n = lattice_size(c.level);
        return nx >= 0 && ny >= 0 && nx < n && ny < n;
    }

    void split(int id);
    void collect_side_leaves(int node, Side s, std::vector<int>& out) const;
    [[nodiscard]] bool violates_one_irregularity(const Cell& c) const;
    void finalize();

    Rect domain_;
    int base_n_ = 0;
    std::vector<Cell> cells_;
    std::unordered_map<Key, int> lookup_;
    std::vector<int> leaves_;
    std::vector<int> leaf_pos_;
    std::vector<Facet> facets_;
    std::vector<int> cell_facet_offsets_;
    std::vector<CellFacet> cell_facet_data_;
    double kappa_ = 0.0;
};

// ---------------------------------------------------------------------------

inline Segment side_segment(const Rect& b, Side s)
{
    const double x1 = b.x0 + b.w;
    const double y1 = b.y0 + b.h;
    switch (s) {
    case Side::left: return {{b.x0, b.y0}, {b.x0, y1}};
    case Side::right: return {{x1, b.y0}, {x1, y1}};
    case Side::bottom: return {{b.x0, b.y0}, {x1, b.y0}};
    case Side::top: return {{b.x0, y1}, {x1, y1}};
    }
    return {};
}

inline Vec2 side_normal(Side s)
{
    switch (s) {
    case Side::left: return {-1.0, 0.0};
    case Side::right: return {1.0, 0.0};
    case Side::bottom: return {0.0, -1.0};
    case Side::top: return {0.0, 1.0};
    }
    return Vec2::Zero();
}

inline Side opposite(Side s)
{
    switch (s) {
    case Side::left: return Side::right;
    case Side::right: return Side::left;
    case Side::bottom: return Side::top;
    case Side::top: return Side::bottom;
    }
    return s;
}

/// Children of a quadtree node touching side `s` (children ordered (0,0),(1,0),(0,1),(1,1)).
inline std::array<int, 2> side_children(Side s)
{
    switch (s) {
    case Side::left: return {0, 2};
    case Side::right: return {1, 3};
    case Side::bottom: return {0, 1};
    case Side::top: return {2, 3};
    }
    return {0, 0};
}

inline void Mesh::split(int id)
{
    const Cell parent = cells_[static_cast<std::size_t>(id)];
    for (int c = 0; c < 4; ++c) {
        Cell child;
        child.id = static_cast<int>(cells_.size());
        child.parent = id;
        child.level = parent.level + 1;
        child.ix = 2 * parent.ix + (c & 1);
        child.iy = 2 * parent.iy + (c >> 1);
        child.box = box_of(child.level, child.ix, child.iy);
        cells_[static_cast<std::size_t>(id)].children[static_cast<std::size_t>(c)] = child.id;
        lookup_[key(child.level, child.ix, child.iy)] = child.id;
        cells_.push_back(child);
    }
}

inline void Mesh::collect_side_leaves(int node, Side s, std::vector<int>& out) const
{
    const Cell& c = cells_[static_cast<std::size_t>(node)];
    if (c.is_leaf()) {
        out.push_back(node);
        return;
    }
    for (int ch : side_children(s))
        collect_side_leaves(c.children[static_cast<std::size_t>(ch)], s, out);
}

inline std::vector<int> Mesh::neighbours(int id, Side s) const
{
    const Cell& c = cells_.at(static_cast<std::size_t>(id));
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::vector<int> out;
    if (!neighbour_position(c, s, nx, ny))
        return out;
    const int same = find(c.level, nx, ny);
    if (same >= 0) {
        collect_side_leaves(same, opposite(s), out);
        return out;
    }
    for (int l = c.level - 1; l >= 0; --l) {
        const int shift = c.level - l;
        const int anc = find(l, nx >> shift, ny >> shift);
        if (anc >= 0) {
            out.push_back(anc);
            return out;
        }
    }
    return out;
}

inline bool Mesh::violates_one_irregularity(const Cell& c) const
{
    for (int si = 0; si < 4; ++si) {
        const auto s = static_cast<Side>(si);
        std::int64_t nx = 0;
        std::int64_t ny = 0;
        if (!neighbour_position(c, s, nx, ny))
            continue;
        const int same = find(c.level, nx, ny);
        if (same < 0)
            continue;
        const Cell& n = cells_[static_cast<std::size_t>(same)];
        if (n.is_leaf())
            continue;
        for (int ch : side_children(opposite(s)))
            if (!cells_[static_cast<std::size_t>(n.children[static_cast<std::size_t>(ch)])].is_leaf())
                return true;
    }
    return false;
}

inline void Mesh::finalize()
{
    leaves_.clear();
    leaf_pos_.assign(cells_.size(), -1);
    for (const Cell& c : cells_)
        if (c.is_leaf()) {
            leaf_pos_[static_cast<std::size_t>(c.id)] = static_cast<int>(leaves_.size());
            leaves_.push_back(c.id);
        }

    facets_.clear();
    std::vector<std::vector<CellFacet>> per_leaf(leaves_.size());
    auto add_facet = [&](const Cell& c, Side s, int other) {
        Facet f;
        f.id = static_cast<int>(facets_.size());
        f.seg = side_segment(c.box, s);
        f.boundary = other < 0;
        if (f.boundary) {
            f.owners = {c.id, -1};
            f.normal = side_normal(s);
        } else if (c.id < other) {
            f.owners = {c.id, other};
            f.normal = side_normal(s);
        } else {
            f.owners = {other, c.id};
            f.normal = -side_normal(s);
        }
        per_leaf[static_cast<std::size_t>(leaf_pos_[static_cast<std::size_t>(c.id)])].push_back({f.id, s, side_normal(s)});
        if (other >= 0)
            per_leaf[static_cast<std::size_t>(leaf_pos_[static_cast<std::size_t>(other)])].push_back(
                {f.id, opposite(s), -side_normal(s)});
        facets_.push_back(f);
    };

    for (int id : leaves_) {
        const Cell& c = cells_[static_cast<std::size_t>(id)];
        for (int si = 0; si < 4; ++si) {
            const auto s = static_cast<Side>(si);
            std::int64_t nx = 0;
            std::int64_t ny = 0;
            if (!neighbour_position(c, s, nx, ny)) {
                add_facet(c, s, -1);
                continue;
            }
            const int same = find(c.level, nx, ny);
            if (same >= 0) {
                // same-level leaf: created once from the lower id; refined neighbour: created from the fine side
                if (cells_[static_cast<std::size_t>(same)].is_leaf() && id < same)
                    add_facet(c, s, same);
                continue;
            }
            const auto nb = neighbours(id, s);
            if (nb.size() != 1)
                throw std::logic_error("Mesh: inconsistent quadtree neighbourhood");
            add_facet(c, s, nb.front());
        }
    }

    cell_facet_offsets_.assign(leaves_.size() + 1, 0);
    cell_facet_data_.clear();
    for (std::size_t l = 0; l < per_leaf.size(); ++l) {
        auto& list = per_leaf[l];
        std::sort(list.begin(), list.end(), [&](const CellFacet& a, const CellFacet& b) {
            if (a.side != b.side)
                return static_cast<int>(a.side) < static_cast<int>(b.side);
            const Vec2& pa = facets_[static_cast<std::size_t>(a.facet)].seg.a;
            const Vec2& pb = facets_[static_cast<std::size_t>(b.facet)].seg.a;
            return pa.x() + pa.y() < pb.x() + pb.y();
        });
        cell_facet_data_.insert(cell_facet_data_.end(), list.begin(), list.end());
        cell_facet_offsets_[l + 1] = static_cast<int>(cell_facet_data_.size());
    }

    kappa_ = 0.0;
    for (std::size_t l = 0; l < leaves_.size(); ++l) {
        double min_len = std::numeric_limits<double>::infinity();
        for (const CellFacet& cf : cell_facets(static_cast<int>(l)))
            min_len = std::min(min_len, facets_[static_cast<std::size_t>(cf.facet)].length());
        kappa_ = std::max(kappa_, cells_[static_cast<std::size_t>(leaves_[l])].diameter() / min_len);
    }
}

/// n x n grid of congruent cells on `domain`.
inline Mesh uniform_grid(int n, const Rect& domain = unit_square())
{
    if (n < 1)
        throw InvalidArgument("uniform_grid: n must be >= 1");
    if (!(domain.w > 0.0) || !(domain.h > 0.0))
        throw InvalidArgument("uniform_grid: degenerate domain");
    Mesh m;
    m.domain_ = domain;
    m.base_n_ = n;
    m.cells_.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Cell c;
            c.id = static_cast<int>(m.cells_.size());
            c.level = 0;
            c.ix = i;
            c.iy = j;
            c.box = m.box_of(0, i, j);
            m.lookup_[Mesh::key(0, i, j)] = c.id;
            m.cells_.push_back(c);
        }
    m.finalize();
    return m;
}

/// Split every marked leaf into four, then refine further until the mesh is one-irregular.
inline Mesh refine(const Mesh& mesh, std::span<const int> marked)
{
    std::vector<int> ids(marked.begin(), marked.end());
    for (int id : ids)
        if (mesh.leaf_index(id) < 0)
            throw InvalidArgument("refine: cell " + std::to_string(id) + " is not a leaf of the mesh");
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    Mesh out = mesh;
    if (ids.empty())
        return out;
    for (int id : ids)
        out.split(id);

    bool changed = true;
    while (changed) {
        changed = false;
        const std::size_t n = out.cells_.size();
        for (std::size_t id = 0; id < n; ++id) {
            if (!out.cells_[id].is_leaf())
                continue;
            if (out.violates_one_irregularity(out.cells_[id])) {
                out.split(static_cast<int>(id));
                changed = true;
            }
        }
    }
    out.finalize();
    return out;
}

inline Mesh refine(const Mesh& mesh, const std::vector<int>& marked)
{
    return refine(mesh, std::span<const int>(marked));
}

/// Owners and orientation of a facet.
inline FacetSides facet_sides(const Mesh& mesh, int facet)
{
    const Facet& f = mesh.facet(facet);
    return {f.owners[0], f.owners[1], f.normal};
}

/// One leaf per line: id level x y w h.
inline void write_mesh(std::ostream& os, const Mesh& mesh)
{
    const auto prec = os.precision(17);
    for (int id : mesh.leaves()) {
        const Cell& c = mesh.cell(id);
        os << c.id << ' ' << c.level << ' ' << c.box.x0 << ' ' << c.box.y0 << ' ' << c.box.w << ' ' << c.box.h << '\n';
    }
    os.precision(prec);
}

} // namespace wgcd
