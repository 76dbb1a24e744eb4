#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <string>
#include <utility>

#include <fvgrad/assembly.hpp>

namespace fvgrad {

struct SolveStats
{
    int iterations = 0;
    double final_relative_residual = 0;
    bool converged = false;
};

class NonConvergenceError : public Error
{
public:
    NonConvergenceError(const std::string& what, SolveStats stats) : Error(what), _stats(stats) {}
    const SolveStats& stats() const { return _stats; }

private:
    SolveStats _stats;
};

class BreakdownError : public Error
{
public:
    BreakdownError(const std::string& what, SolveStats stats) : Error(what), _stats(stats) {}
    const SolveStats& stats() const { return _stats; }

private:
    SolveStats _stats;
};

enum class Preconditioner { none, jacobi };

struct SolverOptions
{
    double tol = 1e-10;
    int max_iter = 10000;
    Preconditioner preconditioner = Preconditioner::jacobi;
};

template <class Scalar>
struct SolveResult
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solution;
    SolveStats stats;
};

/// Preconditioned conjugate gradient for symmetric positive definite A.
/// Convergence is declared on the recomputed residual ||b - A x|| / ||b||,
/// never on the recurrence alone.
template <class Scalar, int Options, class StorageIndex>
SolveResult<Scalar> conjugate_gradient(
    const Eigen::SparseMatrix<Scalar, Options, StorageIndex>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
    const SolverOptions& opts = {})
{
    using vec_t = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (A.rows() != A.cols() || A.rows() != b.size()) throw DimensionError("conjugate_gradient: shape mismatch");
    if (!(opts.tol > 0)) throw Error("conjugate_gradient: tolerance must be positive");

    const Eigen::Index n = b.size();
    SolveResult<Scalar> out;
    out.solution = vec_t::Zero(n);
    const Scalar bnorm = b.norm();
    if (bnorm == Scalar(0)) {
        out.stats.converged = true;
        return out;
    }

    vec_t inv_diag = vec_t::Ones(n);
    if (opts.preconditioner == Preconditioner::jacobi) {
        const vec_t diag = A.diagonal();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(diag[i] > 0)) {
                throw BreakdownError("non-positive diagonal entry at row " + std::to_string(i), out.stats);
            }
            inv_diag[i] = Scalar(1) / diag[i];
        }
    }

    vec_t& x = out.solution;
    vec_t r = b;
    vec_t z = inv_diag.cwiseProduct(r);
    vec_t p = z;
    vec_t q(n);
    Scalar rz = r.dot(z);
    SolveStats& st = out.stats;
    st.final_relative_residual = 1;

    while (st.iterations < opts.max_iter) {
        q.noalias() = A * p;
        const Scalar pq = p.dot(q);
        if (!(pq > 0) || !std::isfinite(static_cast<double>(pq))) {
            throw BreakdownError("conjugate_gradient breakdown: p^T A p = " + std::to_string(static_cast<double>(pq)) +
                                 " (matrix indefinite or not symmetric)", st);
        }
        const Scalar step = rz / pq;
        x += step * p;
        r -= step * q;
        ++st.iterations;
        if (!x.allFinite()) throw BreakdownError("conjugate_gradient produced a non-finite iterate", st);

        if (r.norm() <= opts.tol * bnorm) {
            r = b - A * x;
            st.final_relative_residual = static_cast<double>(r.norm() / bnorm);
            if (st.final_relative_residual <= opts.tol) {
                st.converged = true;
                return out;
            }
            // Recurrence drifted; restart from the true residual.
            z = inv_diag.cwiseProduct(r);
            p = z;
            rz = r.dot(z);
            continue;
        }
        z = inv_diag.cwiseProduct(r);
        const Scalar rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    st.final_relative_residual = static_cast<double>((b - A * x).norm() / bnorm);
    throw NonConvergenceError("conjugate_gradient: no convergence after " + std::to_string(st.iterations) +
                              " iterations (relative residual " + std::to_string(st.final_relative_residual) + ")",
                              st);
}

/// Direct LU with partial pivoting; the reference oracle for small systems.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> dense_solve(
    const Eigen::MatrixBase<Derived>& A,
    const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>& b)
{
    using Scalar = typename Derived::Scalar;
    using mat_t = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (A.rows() != A.cols() || A.rows() != b.size()) throw DimensionError("dense_solve: shape mismatch");
    if (A.rows() > 2000) throw DimensionError("dense_solve: more than 2000 unknowns");
    const mat_t a = A;
    const Eigen::PartialPivLU<mat_t> lu(a);
    const auto& u = lu.matrixLU();
    const Scalar scale = a.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        using std::abs;
        if (!(abs(u(i, i)) > Scalar(a.rows()) * Eigen::NumTraits<Scalar>::epsilon() * scale)) {
            throw SingularMatrixError("dense_solve: numerically singular matrix (pivot " + std::to_string(i) + ")");
        }
    }
    return lu.solve(b);
}

/// Solves an assembled system into a cell field.
std::pair<DiscreteField, SolveStats> solve(const Mesh& mesh, const LinearSystem& system, const SolverOptions& opts = {});
DiscreteField dense_solve(const Mesh& mesh, const LinearSystem& system);

} // namespace fvgrad
