// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmark problems and error norms against known exact solutions.

#include "wgcd/assembly.hpp"
#include "wgcd/dofmap.hpp"
#include "wgcd/mesh.hpp"
#include "wgcd/parallel.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace wgcd {

struct Benchmark {
    std::string name;
    std::string description;
    ProblemData problem;
    ScalarField exact;      // empty when no closed form is known
    VectorField exact_grad; // idem
    /// Length scale the exact solution varies on; error quadrature resolves it.
    double layer_width = 1.0;

    [[nodiscard]] bool has_exact() const { return static_cast<bool>(exact) && static_cast<bool>(exact_grad); }
};

namespace detail {

/// exp(t) with exponents below -700 flushed to zero.
inline double clamped_exp(double t) { return t < -700.0 ? 0.0 : std::exp(t); }

} // namespace detail

/// b = (1,1), a = 0, exact solution
///   u = x + y(1-x) + (exp(-1/eps) - exp(-(1-x)(1-y)/eps)) / (1 - exp(-1/eps))
/// with layers of width O(eps) along x = 1 and y = 1.
inline Benchmark boundary_layer(double eps)
{
    if (!(eps > 0.0))
        throw InvalidArgument("boundary_layer: eps must be positive");
    const double e1 = detail::clamped_exp(-1.0 / eps);
    const double scale = 1.0 / (1.0 - e1);
    auto layer = [eps](const Vec2& p) { return detail::clamped_exp(-(1.0 - p.x()) * (1.0 - p.y()) / eps); };

    Benchmark bm;
    bm.name = "boundary_layer";
    bm.description = "boundary layers at x=1 and y=1, b=(1,1), a=0";
    bm.layer_width = eps;
    bm.exact = [=](const Vec2& p) {
        return p.x() + p.y() * (1.0 - p.x()) + (e1 - layer(p)) * scale;
    };
    bm.exact_grad = [=](const Vec2& p) {
        const double ce = scale * layer(p) / eps;
        return Vec2(1.0 - p.y() - ce * (1.0 - p.y()), 1.0 - p.x() - ce * (1.0 - p.x()));
    };
    ProblemData& pd = bm.problem;
    pd.eps = eps;
    pd.b = [](const Vec2&) { return Vec2(1.0, 1.0); };
    pd.div_b = [](const Vec2&) { return 0.0; };
    pd.a = [](const Vec2&) { return 0.0; };
    pd.c0 = 0.0;
    pd.f = [=](const Vec2& p) {
        const double sx = 1.0 - p.x();
        const double sy = 1.0 - p.y();
        const double ce = scale * layer(p) / eps;
        // -eps lap(u) + u_x + u_y
        return ce * (sx * sx + sy * sy) + (sx + sy) * (1.0 - ce);
    };
    pd.g = bm.exact;
    return bm;
}

/// b = (1/2, sqrt(3)/2), a = 0, f = 0; g = 1 on the bottom edge and on {0} x [0, 1/5], else 0.
inline Benchmark internal_layer(double eps)
{
    if (!(eps > 0.0))
        throw InvalidArgument("internal_layer: eps must be positive");
    Benchmark bm;
    bm.name = "internal_layer";
    bm.description = "internal layer from the inflow discontinuity at (0, 1/5)";
    bm.layer_width = eps;
    ProblemData& pd = bm.problem;
    pd.eps = eps;
    pd.b = [](const Vec2&) { return Vec2(0.5, 0.5 * std::numbers::sqrt3); };
    pd.div_b = [](const Vec2&) { return 0.0; };
    pd.a = [](const Vec2&) { return 0.0; };
    pd.f = [](const Vec2&) { return 0.0; };
    pd.c0 = 0.0;
    pd.g = [](const Vec2& p) {
        constexpr double tol = 1e-12;
        if (std::abs(p.y()) <= tol && p.x() >= -tol && p.x() <= 1.0 + tol)
            return 1.0;
        if (std::abs(p.x()) <= tol && p.y() >= -tol && p.y() <= 0.2)
            return 1.0;
        return 0.0;
    };
    return bm;
}

/// Random u in P_k (monomial coefficients uniform in [-1, 1]) with b = (1,1), a = 1, c0 = 1.
inline Benchmark manufactured_poly(int k, unsigned seed = 2024, double eps = 1.0)
{
    if (k < 0)
        throw InvalidArgument("manufactured_poly: negative degree");
    std::mt19937 gen(seed + static_cast<unsigned>(k));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::array<double, 3>> terms; // (coefficient, i, j)
    for (const MonoExp& e : monomials(k))
        terms.push_back({dist(gen), static_cast<double>(e.i), static_cast<double>(e.j)});

    auto value = [terms](const Vec2& p) {
        double s = 0.0;
        for (const auto& t : terms)
            s += t[0] * std::pow(p.x(), t[1]) * std::pow(p.y(), t[2]);
        return s;
    };
    auto grad = [terms](const Vec2& p) {
        Vec2 g = Vec2::Zero();
        for (const auto& t : terms) {
            if (t[1] > 0)
                g.x() += t[0] * t[1] * std::pow(p.x(), t[1] - 1) * std::pow(p.y(), t[2]);
            if (t[2] > 0)
                g.y() += t[0] * t[2] * std::pow(p.x(), t[1]) * std::pow(p.y(), t[2] - 1);
        }
        return g;
    };
    auto laplacian = [terms](const Vec2& p) {
        double s = 0.0;
        for (const auto& t : terms) {
            if (t[1] > 1)
                s += t[0] * t[1] * (t[1] - 1) * std::pow(p.x(), t[1] - 2) * std::pow(p.y(), t[2]);
            if (t[2] > 1)
                s += t[0] * t[2] * (t[2] - 1) * std::pow(p.x(), t[1]) * std::pow(p.y(), t[2] - 2);
        }
        return s;
    };

    Benchmark bm;
    bm.name = "manufactured";
    bm.description = "polynomial exact solution of degree " + std::to_string(k);
    bm.exact = value;
    bm.exact_grad = grad;
    bm.layer_width = 1.0;
    ProblemData& pd = bm.problem;
    pd.eps = eps;
    pd.b = [](const Vec2&) { return Vec2(1.0, 1.0); };
    pd.div_b = [](const Vec2&) { return 0.0; };
    pd.a = [](const Vec2&) { return 1.0; };
    pd.c0 = 1.0;
    pd.f = [=](const Vec2& p) {
        const Vec2 g = grad(p);
        return -eps * laplacian(p) + g.x() + g.y() + value(p);
    };
    pd.g = value;
    return bm;
}

/// Largest relative PDE residual at `samples` random interior points, with the Laplacian
/// taken by central differences of the exact gradient.
inline double pde_residual_check(const Benchmark& bm, int samples = 64, unsigned seed = 7)
{
    if (!bm.has_exact())
        throw UnsupportedOperation("pde_residual_check: benchmark has no exact solution");
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    const ProblemData& p = bm.problem;
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Vec2 x(dist(gen), dist(gen));
        const double h = 1e-5 * std::min(1.0, bm.layer_width * 10.0);
        const double lap = (bm.exact_grad(x + Vec2(h, 0)).x() - bm.exact_grad(x - Vec2(h, 0)).x()) / (2 * h) +
                           (bm.exact_grad(x + Vec2(0, h)).y() - bm.exact_grad(x - Vec2(0, h)).y()) / (2 * h);
        const Vec2 g = bm.exact_grad(x);
        const Vec2 b = p.b(x);
        const double u = bm.exact(x);
        const double div_b = divergence_of_b(p, x);
        const double lhs = -p.eps * lap + b.dot(g) + div_b * u + p.a(x) * u;
        const double scale = 1.0 + std::abs(p.f(x)) + std::abs(p.eps * lap) + std::abs(b.dot(g));
        worst = std::max(worst, std::abs(lhs - p.f(x)) / scale);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Error norms
// ---------------------------------------------------------------------------

struct ExactErrors {
    double grad = 0.0; // eps |grad u - grad_w u_h|^2
    double l2 = 0.0;   // |u - u_h0|^2
    double jump = 0.0; // |tau^{1/2} (u_h0 - u_hb)|^2 over all cell boundaries
    double eps = 1.0;

    [[nodiscard]] double energy() const { return std::sqrt(grad + l2 + jump); }
    [[nodiscard]] double star() const { return std::sqrt(l2) / std::sqrt(eps); }
};

/// Composite rule subdivisions so that every piece is no wider than twice the layer width.
inline int error_subdivisions(const Rect& box, double layer_width, int max_sub = 32)
{
    const double h = std::max(box.w, box.h);
    const int s = static_cast<int>(std::ceil(h / (2.0 * layer_width) - 1e-12));
    return std::clamp(s, 1, max_sub);
}

inline ExactErrors exact_errors(const WgFunction& uh, const Benchmark& bm, const Mesh& mesh, int k)
{
    if (!bm.has_exact())
        throw UnsupportedOperation("benchmark '" + bm.name + "' has no exact solution");
    const ProblemData& p = bm.problem;
    const StabilizationParams stab = stabilization_params(mesh, p, k);
    std::vector<ExactErrors> parts(static_cast<std::size_t>(mesh.num_leaves()));
    parallel_for(mesh.num_leaves(), [&](int l) {
        const CellLayout L = CellLayout::from_mesh(mesh, l, k);
        const Eigen::VectorXd ul = uh.local(L, l);
        const Eigen::VectorXd g = weak_gradient(L) * ul;
        const Eigen::VectorXd u0 = ul.head(L.n_interior());
        const CellBasis cb(L.box(), k);
        const CellBasis gb(L.box(), k - 1);
        const QuadRule rule = composite_cell_quadrature(data_quadrature_order(k), L.box(),
                                                        error_subdivisions(L.box(), bm.layer_width));
        Eigen::VectorXd phi(cb.size());
        ExactErrors& e = parts[static_cast<std::size_t>(l)];
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec2& x = rule.points[q];
            cb.eval(x, phi);
            const double du = bm.exact(x) - phi.dot(u0);
            const Vec2 dg = bm.exact_grad(x) - eval_weak_gradient(gb, g, x);
            e.l2 += rule.weights[q] * du * du;
            e.grad += rule.weights[q] * p.eps * dg.squaredNorm();
        }
        e.jump = local_jump_energy(L, p, ul, [&](double bn, double hT) { return tau(bn, hT, stab); });
    });
    ExactErrors total;
    total.eps = p.eps;
    for (const ExactErrors& e : parts) {
        total.grad += e.grad;
        total.l2 += e.l2;
        total.jump += e.jump;
    }
    return total;
}

/// Energy-norm error of u_h against the exact solution.
inline double energy_error(const WgFunction& uh, const Benchmark& bm, const Mesh& mesh, int k)
{
    return exact_errors(uh, bm, mesh, k).energy();
}

/// eps^{-1/2} |u - u_h0|, the computable bound for the dual convective norm of the error.
inline double star_surrogate(const WgFunction& uh, const Benchmark& bm, const Mesh& mesh, int k)
{
    return exact_errors(uh, bm, mesh, k).star();
}

} // namespace wgcd
