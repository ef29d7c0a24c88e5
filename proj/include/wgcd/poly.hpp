// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scaled monomial bases on rectangles and facets, Gauss-Legendre rules,
// and local L2 projections.

#include "wgcd/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace wgcd {

/// Dimension of P_k in two variables.
constexpr int dim_pk(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// Exponent pair of the monomial xi^i eta^j.
struct MonoExp {
    int i;
    int j;
};

/// Monomials of total degree <= k, ordered by degree, then by increasing eta power:
/// 1, xi, eta, xi^2, xi*eta, eta^2, ...
inline std::vector<MonoExp> monomials(int k)
{
    std::vector<MonoExp> out;
    out.reserve(static_cast<std::size_t>(dim_pk(k)));
    for (int d = 0; d <= k; ++d)
        for (int j = 0; j <= d; ++j)
            out.push_back({d - j, j});
    return out;
}

constexpr int mono_index(int i, int j)
{
    const int d = i + j;
    return d * (d + 1) / 2 + j;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre
// ---------------------------------------------------------------------------

struct GaussRule1D {
    std::vector<double> nodes; // on [-1, 1]
    std::vector<double> weights;
};

namespace detail {

inline GaussRule1D compute_gauss_legendre(int n)
{
    GaussRule1D r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int m = 2; m <= n; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute derivative at converged node
        double p0 = 1.0;
        double p1 = x;
        for (int m = 2; m <= n; ++m) {
            const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[static_cast<std::size_t>(i)] = -x;
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(i)] = w;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1)
        r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], exact for degree 2n-1.
inline const GaussRule1D& gauss_legendre(int n)
{
    constexpr int max_points = 64;
    if (n < 1 || n > max_points)
        throw InvalidArgument("gauss_legendre: point count out of range");
    static const std::vector<GaussRule1D> table = [] {
        std::vector<GaussRule1D> t(max_points + 1);
        t[1] = GaussRule1D{{0.0}, {2.0}};
        for (int m = 2; m <= max_points; ++m)
            t[static_cast<std::size_t>(m)] = detail::compute_gauss_legendre(m);
        return t;
    }();
    return table[static_cast<std::size_t>(n)];
}

/// Number of Gauss points needed to integrate degree `order` exactly.
constexpr int gauss_points_for_order(int order) { return order / 2 + 1; }

// ---------------------------------------------------------------------------
// Quadrature rules on physical cells and facets
// ---------------------------------------------------------------------------

struct QuadRule {
    std::vector<Vec2> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return points.size(); }

    template <class F>
    [[nodiscard]] double integrate(F&& f) const
    {
        double s = 0.0;
        for (std::size_t q = 0; q < points.size(); ++q)
            s += weights[q] * f(points[q]);
        return s;
    }
};

/// Tensor Gauss rule on `box`, exact for Q_order.
inline QuadRule cell_quadrature(int order, const Rect& box)
{
    if (order < 0)
        throw InvalidArgument("cell_quadrature: negative order");
    const auto& g = gauss_legendre(gauss_points_for_order(order));
    const std::size_t n = g.nodes.size();
    QuadRule r;
    r.points.reserve(n * n);
    r.weights.reserve(n * n);
    const double hx = 0.5 * box.w;
    const double hy = 0.5 * box.h;
    const Vec2 c = box.center();
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t a = 0; a < n; ++a) {
            r.points.emplace_back(c.x() + hx * g.nodes[a], c.y() + hy * g.nodes[b]);
            r.weights.push_back(hx * hy * g.weights[a] * g.weights[b]);
        }
    return r;
}

/// Composite tensor Gauss rule: `box` split into sub x sub congruent pieces.
inline QuadRule composite_cell_quadrature(int order, const Rect& box, int sub)
{
    if (sub <= 1)
        return cell_quadrature(order, box);
    QuadRule r;
    const double w = box.w / sub;
    const double h = box.h / sub;
    for (int j = 0; j < sub; ++j)
        for (int i = 0; i < sub; ++i) {
            const QuadRule piece = cell_quadrature(order, Rect{box.x0 + i * w, box.y0 + j * h, w, h});
            r.points.insert(r.points.end(), piece.points.begin(), piece.points.end());
            r.weights.insert(r.weights.end(), piece.weights.begin(), piece.weights.end());
        }
    return r;
}

/// Gauss rule on a straight facet, exact for P_order along the segment.
inline QuadRule facet_quadrature(int order, const Segment& seg)
{
    if (order < 0)
        throw InvalidArgument("facet_quadrature: negative order");
    const auto& g = gauss_legendre(gauss_points_for_order(order));
    QuadRule r;
    const double half = 0.5 * seg.length();
    const Vec2 m = seg.midpoint();
    const Vec2 t = seg.tangent();
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        r.points.push_back(m + half * g.nodes[q] * t);
        r.weights.push_back(half * g.weights[q]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bases
// ---------------------------------------------------------------------------

namespace detail {

/// Integral of t^p over [-1, 1].
constexpr double ref_moment(int p) { return (p % 2 == 1) ? 0.0 : 2.0 / (p + 1); }

} // namespace detail

/// Scaled monomials ((x-xc)/hx)^i ((y-yc)/hy)^j, i+j <= k, with hx, hy the half-widths.
class CellBasis {
public:
    CellBasis(const Rect& box, int degree)
        : box_(box), degree_(degree), center_(box.center()), hx_(0.5 * box.w), hy_(0.5 * box.h),
          exps_(monomials(degree))
    {
        if (degree < 0 || degree > 15)
            throw InvalidArgument("CellBasis: degree out of range");
    }

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int size() const { return static_cast<int>(exps_.size()); }
    [[nodiscard]] const Rect& box() const { return box_; }
    [[nodiscard]] double half_width() const { return hx_; }
    [[nodiscard]] double half_height() const { return hy_; }
    [[nodiscard]] const std::vector<MonoExp>& exponents() const { return exps_; }

    [[nodiscard]] Vec2 to_reference(const Vec2& p) const
    {
        return {(p.x() - center_.x()) / hx_, (p.y() - center_.y()) / hy_};
    }

    void eval(const Vec2& p, Eigen::Ref<Eigen::VectorXd> out) const
    {
        std::array<double, 16> px{};
        std::array<double, 16> py{};
        powers(p, px, py);
        for (std::size_t m = 0; m < exps_.size(); ++m)
            out[static_cast<Eigen::Index>(m)] = px[exps_[m].i] * py[exps_[m].j];
    }

    [[nodiscard]] Eigen::VectorXd eval(const Vec2& p) const
    {
        Eigen::VectorXd v(size());
        eval(p, v);
        return v;
    }

    void grad(const Vec2& p, Eigen::Ref<Eigen::VectorXd> dx, Eigen::Ref<Eigen::VectorXd> dy) const
    {
        std::array<double, 16> px{};
        std::array<double, 16> py{};
        powers(p, px, py);
        for (std::size_t m = 0; m < exps_.size(); ++m) {
            const int i = exps_[m].i;
            const int j = exps_[m].j;
            const auto e = static_cast<Eigen::Index>(m);
            dx[e] = i == 0 ? 0.0 : i * px[i - 1] * py[j] / hx_;
            dy[e] = j == 0 ? 0.0 : j * px[i] * py[j - 1] / hy_;
        }
    }

    [[nodiscard]] double value(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Vec2& p) const
    {
        return eval(p).dot(coeffs);
    }

    /// Exact mass matrix (phi_j, phi_i)_T.
    [[nodiscard]] Eigen::MatrixXd mass() const
    {
        const int n = size();
        Eigen::MatrixXd m(n, n);
        const double scale = hx_ * hy_;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                m(a, b) = scale * detail::ref_moment(exps_[a].i + exps_[b].i) *
                          detail::ref_moment(exps_[a].j + exps_[b].j);
        return m;
    }

    /// Coefficient map of d/dx within P_k (result has degree <= k-1, stored in P_k layout).
    [[nodiscard]] Eigen::MatrixXd dx_matrix() const { return derivative_matrix(true); }
    [[nodiscard]] Eigen::MatrixXd dy_matrix() const { return derivative_matrix(false); }

private:
    void powers(const Vec2& p, std::array<double, 16>& px, std::array<double, 16>& py) const
    {
        const Vec2 r = to_reference(p);
        px[0] = 1.0;
        py[0] = 1.0;
        for (int d = 1; d <= degree_; ++d) {
            px[d] = px[d - 1] * r.x();
            py[d] = py[d - 1] * r.y();
        }
    }

    [[nodiscard]] Eigen::MatrixXd derivative_matrix(bool in_x) const
    {
        const int n = size();
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (int m = 0; m < n; ++m) {
            const int i = exps_[m].i;
            const int j = exps_[m].j;
            if (in_x && i > 0)
                d(mono_index(i - 1, j), m) = i / hx_;
            if (!in_x && j > 0)
                d(mono_index(i, j - 1), m) = j / hy_;
        }
        return d;
    }

    Rect box_;
    int degree_;
    Vec2 center_;
    double hx_;
    double hy_;
    std::vector<MonoExp> exps_;
};

/// Scaled 1D monomials t^m, m <= k, where t in [-1, 1] runs along the facet from a to b.
class FacetBasis {
public:
    FacetBasis(const Segment& seg, int degree) : seg_(seg), degree_(degree), length_(seg.length()), tangent_(seg.tangent())
    {
        if (degree < 0)
            throw InvalidArgument("FacetBasis: negative degree");
    }

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int size() const { return degree_ + 1; }
    [[nodiscard]] const Segment& segment() const { return seg_; }

    [[nodiscard]] double parameter(const Vec2& p) const
    {
        return 2.0 * (p - seg_.a).dot(tangent_) / length_ - 1.0;
    }

    void eval(const Vec2& p, Eigen::Ref<Eigen::VectorXd> out) const
    {
        const double t = parameter(p);
        double v = 1.0;
        for (int m = 0; m <= degree_; ++m) {
            out[m] = v;
            v *= t;
        }
    }

    [[nodiscard]] Eigen::VectorXd eval(const Vec2& p) const
    {
        Eigen::VectorXd v(size());
        eval(p, v);
        return v;
    }

    [[nodiscard]] double value(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Vec2& p) const
    {
        return eval(p).dot(coeffs);
    }

    [[nodiscard]] Eigen::MatrixXd mass() const
    {
        Eigen::MatrixXd m(size(), size());
        for (int a = 0; a < size(); ++a)
            for (int b = 0; b < size(); ++b)
                m(a, b) = 0.5 * length_ * detail::ref_moment(a + b);
        return m;
    }

private:
    Segment seg_;
    int degree_;
    double length_;
    Vec2 tangent_;
};

// ---------------------------------------------------------------------------
// L2 projections
// ---------------------------------------------------------------------------

/// Over-integration order used for data terms with non-polynomial coefficients.
constexpr int data_quadrature_order(int k) { return 2 * k + 4; }

/// Coefficients of the L2(T) projection of f onto P_k(T) in the scaled monomial basis.
inline Eigen::VectorXd l2_project_cell(const ScalarField& f, const Rect& box, int k, int order = -1)
{
    const CellBasis basis(box, k);
    const QuadRule rule = cell_quadrature(order < 0 ? data_quadrature_order(k) : order, box);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
    Eigen::VectorXd phi(basis.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        basis.eval(rule.points[q], phi);
        rhs += rule.weights[q] * f(rule.points[q]) * phi;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(basis.mass());
    if (llt.info() != Eigen::Success)
        throw std::logic_error("l2_project_cell: singular local mass matrix");
    return llt.solve(rhs);
}

/// Coefficients of the L2(E) projection of g onto P_k(E).
inline Eigen::VectorXd l2_project_facet(const ScalarField& g, const Segment& seg, int k, int order = -1)
{
    const FacetBasis basis(seg, k);
    const QuadRule rule = facet_quadrature(order < 0 ? data_quadrature_order(k) : order, seg);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
    Eigen::VectorXd psi(basis.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        basis.eval(rule.points[q], psi);
        rhs += rule.weights[q] * g(rule.points[q]) * psi;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(basis.mass());
    if (llt.info() != Eigen::Success)
        throw std::logic_error("l2_project_facet: singular local mass matrix");
    return llt.solve(rhs);
}

} // namespace wgcd
