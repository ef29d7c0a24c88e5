// SPDX-License-Identifier: Apache-2.0
#pragma once

// Solve-estimate-mark-refine loop with fixed-fraction marking.

#include "wgcd/assembly.hpp"
#include "wgcd/bench.hpp"
#include "wgcd/dofmap.hpp"
#include "wgcd/estimator.hpp"
#include "wgcd/linsolve.hpp"
#include "wgcd/mesh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wgcd {

/// Ids of the ceil(fraction * N) cells with the largest eta_T, ascending by id.
/// Equal indicators are taken lowest id first.
inline std::vector<int> mark(const EstimatorReport& report, double fraction)
{
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw InvalidArgument("mark: fraction must lie in (0, 1]");
    const std::size_t n = report.cell_ids.size();
    if (n == 0)
        return {};
    if (report.eta_T.size() != n)
        throw InvalidArgument("mark: report has no marking indicators");
    auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    count = std::clamp<std::size_t>(count, 1, n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (report.eta_T[i] != report.eta_T[j])
            return report.eta_T[i] > report.eta_T[j];
        return report.cell_ids[i] < report.cell_ids[j];
    });
    std::vector<int> marked;
    marked.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        marked.push_back(report.cell_ids[order[i]]);
    std::sort(marked.begin(), marked.end());
    return marked;
}

struct ConvergenceRecord {
    int level = 0;
    int dofs = 0; // unconstrained dofs
    int cells = 0;
    double eta = 0.0;
    double osc = 0.0;
    std::optional<double> energy_err;
    std::optional<double> star_err;
    double seconds = 0.0; // wall time of the level

    /// (eta + osc) / (energy error + star surrogate)
    [[nodiscard]] std::optional<double> effectivity() const
    {
        if (!energy_err || !star_err)
            return std::nullopt;
        return (eta + osc) / (*energy_err + *star_err);
    }
};

struct LevelData {
    int level;
    const Mesh& mesh;
    const WgFunction& solution;
    const EstimatorReport& report;
    const ConvergenceRecord& record;
    const SolveReport& solve;
};

struct AdaptOptions {
    int k = 2;
    int levels = 11;
    double fraction = 0.25;
    int n0 = 16;
    bool uniform = false;
    EstimatorOptions estimator;
    SolverOptions solver;
    std::function<void(const LevelData&)> on_level;
};

struct AdaptResult {
    std::vector<ConvergenceRecord> records;
    Mesh mesh; // mesh of the last level
    std::optional<WgFunction> solution;
};

inline AdaptResult adaptive_loop(const Benchmark& bm, const AdaptOptions& opt)
{
    if (opt.levels < 1)
        throw InvalidArgument("adaptive_loop: levels must be at least 1");
    if (!(opt.fraction > 0.0 && opt.fraction <= 1.0))
        throw InvalidArgument("adaptive_loop: fraction must lie in (0, 1]");
    require_wg_degree(opt.k);

    AdaptResult out{{}, uniform_grid(opt.n0), std::nullopt};
    for (int level = 0; level < opt.levels; ++level) {
        const auto start = std::chrono::steady_clock::now();
        const Mesh& mesh = out.mesh;
        const SparseSystem sys = assemble(mesh, bm.problem, opt.k);
        SolveReport sr;
        try {
            sr = solve(sys, opt.solver);
        } catch (const SingularMatrixError& e) {
            throw SingularMatrixError(e.pivot_dof(), "level " + std::to_string(level) + ": " + e.what());
        } catch (const SolverError& e) {
            throw SolverError("level " + std::to_string(level) + ": " + e.what(), e.residual_history());
        }
        WgFunction uh = expand_solution(sys, sr.x);
        const EstimatorReport rep = global_estimate(mesh, uh, bm.problem, opt.k, opt.estimator);

        ConvergenceRecord rec;
        rec.level = level;
        rec.dofs = sys.dofs->n_free();
        rec.cells = mesh.num_leaves();
        rec.eta = rep.eta;
        rec.osc = rep.osc;
        if (bm.has_exact()) {
            const ExactErrors err = exact_errors(uh, bm, mesh, opt.k);
            rec.energy_err = err.energy();
            rec.star_err = err.star();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.records.push_back(rec);
        if (opt.on_level)
            opt.on_level(LevelData{level, mesh, uh, rep, out.records.back(), sr});

        if (level + 1 < opt.levels)
            out.mesh = refine(mesh, mark(rep, opt.uniform ? 1.0 : opt.fraction));
        else
            out.solution = std::move(uh);
    }
    return out;
}

inline const char* convergence_csv_header() { return "level,dofs,eta,energy_err,star_err,osc,effectivity"; }

/// One CSV row; fields without an exact solution are left empty.
inline void write_convergence_row(std::ostream& os, const ConvergenceRecord& r)
{
    auto num = [&os](std::optional<double> v) {
        if (v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12e", *v);
            os << buf;
        }
    };
    os << r.level << ',' << r.dofs << ',';
    num(r.eta);
    os << ',';
    num(r.energy_err);
    os << ',';
    num(r.star_err);
    os << ',';
    num(r.osc);
    os << ',';
    num(r.effectivity());
    os << '\n';
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records)
{
    os << convergence_csv_header() << '\n';
    for (const ConvergenceRecord& r : records)
        write_convergence_row(os, r);
}

} // namespace wgcd
