// SPDX-License-Identifier: Apache-2.0
#pragma once

// Nonsymmetric sparse solve: UMFPACK LU by default, restarted GMRES with an
// ILUT preconditioner when the LU memory estimate exceeds the configured cap.

#include "wgcd/assembly.hpp"

#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>
#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgcd {

using SparseMatrix = Eigen::SparseMatrix<double>;

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(int pivot_dof, const std::string& what) : std::runtime_error(what), pivot_dof_(pivot_dof) {}
    /// Unconstrained dof (matrix column) where a zero pivot appeared.
    [[nodiscard]] int pivot_dof() const { return pivot_dof_; }

private:
    int pivot_dof_;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history))
    {
    }
    [[nodiscard]] const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

struct SolverOptions {
    double tol = 1e-10;
    /// Peak LU memory above which the iterative path is taken.
    double memory_cap_bytes = 3.0e9;
    bool force_iterative = false;
    int gmres_restart = 30;
    int gmres_max_cycles = 200;
    double ilut_drop_tol = 1e-8;
    int ilut_fill_factor = 10;
};

struct SolveReport {
    Eigen::VectorXd x;
    double relative_residual = 0.0;
    std::string method;
    double lu_memory_estimate = 0.0; // bytes
    double rcond = std::numeric_limits<double>::quiet_NaN();
    int refinement_steps = 0;
    int iterations = 0;
    std::vector<double> residual_history;
};

namespace detail {

inline double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
    const double nb = b.norm();
    const double nr = (A * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

/// RAII holder for UMFPACK symbolic and numeric objects.
class Umfpack {
public:
    explicit Umfpack(const SparseMatrix& A) : A_(A)
    {
        umfpack_di_defaults(control_);
        if (!A.isCompressed())
            throw std::logic_error("Umfpack: matrix must be compressed");
    }
    Umfpack(const Umfpack&) = delete;
    Umfpack& operator=(const Umfpack&) = delete;
    ~Umfpack()
    {
        if (numeric_)
            umfpack_di_free_numeric(&numeric_);
        if (symbolic_)
            umfpack_di_free_symbolic(&symbolic_);
    }

    /// Symbolic analysis; returns the estimated peak memory in bytes.
    double analyze()
    {
        const int status = umfpack_di_symbolic(static_cast<int>(A_.rows()), static_cast<int>(A_.cols()),
                                               A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(), &symbolic_,
                                               control_, info_);
        if (status != UMFPACK_OK)
            throw SolverError("UMFPACK symbolic analysis failed with status " + std::to_string(status), {});
        return info_[UMFPACK_PEAK_MEMORY_ESTIMATE] * info_[UMFPACK_SIZE_OF_UNIT];
    }

    void factorize()
    {
        const int status = umfpack_di_numeric(A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(), symbolic_,
                                              &numeric_, control_, info_);
        if (status == UMFPACK_WARNING_singular_matrix) {
            const int dof = zero_pivot_column();
            throw SingularMatrixError(dof, "singular matrix: zero pivot at dof " + std::to_string(dof));
        }
        if (status != UMFPACK_OK)
            throw SolverError("UMFPACK numeric factorization failed with status " + std::to_string(status), {});
    }

    [[nodiscard]] double rcond() const { return info_[UMFPACK_RCOND]; }

    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b)
    {
        Eigen::VectorXd x(b.size());
        const int status = umfpack_di_solve(UMFPACK_A, A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(),
                                            x.data(), b.data(), numeric_, control_, info_);
        if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
            throw SolverError("UMFPACK solve failed with status " + std::to_string(status), {});
        return x;
    }

private:
    [[nodiscard]] int zero_pivot_column()
    {
        const int n = static_cast<int>(A_.cols());
        std::vector<double> udiag(static_cast<std::size_t>(n));
        std::vector<int> q(static_cast<std::size_t>(n));
        umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, q.data(), udiag.data(),
                               nullptr, nullptr, numeric_);
        for (int j = 0; j < n; ++j)
            if (udiag[static_cast<std::size_t>(j)] == 0.0)
                return q[static_cast<std::size_t>(j)];
        return -1;
    }

    const SparseMatrix& A_;
    void* symbolic_ = nullptr;
    void* numeric_ = nullptr;
    double control_[UMFPACK_CONTROL];
    double info_[UMFPACK_INFO];
};

inline SolveReport solve_iterative(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& opt,
                                   double target, SolveReport report)
{
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double>> gmres;
    gmres.preconditioner().setDroptol(opt.ilut_drop_tol);
    gmres.preconditioner().setFillfactor(opt.ilut_fill_factor);
    gmres.set_restart(opt.gmres_restart);
    gmres.setMaxIterations(opt.gmres_restart);
    gmres.setTolerance(target * 0.5);
    gmres.compute(A);
    if (gmres.info() != Eigen::Success)
        throw SolverError("ILUT preconditioner setup failed", {});
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    report.method = "gmres-ilut";
    for (int cycle = 0; cycle < opt.gmres_max_cycles; ++cycle) {
        x = gmres.solveWithGuess(b, x);
        report.iterations += static_cast<int>(gmres.iterations());
        const double r = relative_residual(A, x, b);
        report.residual_history.push_back(r);
        if (r <= target) {
            report.x = std::move(x);
            report.relative_residual = r;
            return report;
        }
    }
    std::ostringstream msg;
    msg << "GMRES did not converge: relative residual " << report.residual_history.back() << " after "
        << report.iterations << " iterations (target " << target << ")";
    throw SolverError(msg.str(), report.residual_history);
}

} // namespace detail

/// Solves A x = b and enforces |Ax - b| <= max(tol, 1e-10) |b|.
inline SolveReport solve(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& opt = {})
{
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw InvalidArgument("solve: dimension mismatch");
    if (!(opt.tol > 0.0))
        throw InvalidArgument("solve: tolerance must be positive");
    const double target = std::max(opt.tol, 1e-10);
    SolveReport report;
    if (b.size() == 0 || b.norm() == 0.0) {
        report.x = Eigen::VectorXd::Zero(b.size());
        report.method = "trivial";
        return report;
    }

    const SparseMatrix* Ap = &A;
    SparseMatrix compressed;
    if (!A.isCompressed()) {
        compressed = A;
        compressed.makeCompressed();
        Ap = &compressed;
    }
    const SparseMatrix& Ac = *Ap;
    if (opt.force_iterative)
        return detail::solve_iterative(Ac, b, opt, target, std::move(report));
    std::optional<detail::Umfpack> lu;
    lu.emplace(Ac);
    report.lu_memory_estimate = lu->analyze();
    if (report.lu_memory_estimate > opt.memory_cap_bytes) {
        lu.reset();
        return detail::solve_iterative(Ac, b, opt, target, std::move(report));
    }

    lu->factorize();
    report.method = "umfpack-lu";
    report.rcond = lu->rcond();
    Eigen::VectorXd x = lu->solve(b);
    double r = detail::relative_residual(Ac, x, b);
    report.residual_history.push_back(r);
    // at most three steps of iterative refinement
    while (r > target && report.refinement_steps < 3) {
        x += lu->solve(b - Ac * x);
        r = detail::relative_residual(Ac, x, b);
        report.residual_history.push_back(r);
        ++report.refinement_steps;
    }
    if (!std::isfinite(r) || r > target) {
        std::ostringstream msg;
        msg << "direct solve missed the residual contract: " << r << " > " << target;
        throw SolverError(msg.str(), report.residual_history);
    }
    report.x = std::move(x);
    report.relative_residual = r;
    return report;
}

inline SolveReport solve(const SparseSystem& sys, const SolverOptions& opt = {})
{
    return solve(sys.matrix, sys.rhs, opt);
}

} // namespace wgcd
