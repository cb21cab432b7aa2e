#pragma once

#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "memsim/errors.hpp"

namespace memsim {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Direct sparse solve (LU with column pivoting; accepts unsymmetric
/// matrices). Checks the residual against the 1e-10 contract and reports
/// pivot failures by name.
inline Eigen::VectorXd sparse_solve(const SparseMatrix& A, const Eigen::VectorXd& b) {
    if (A.rows() != A.cols())
        throw SolverError("sparse_solve: matrix is not square");
    if (A.rows() != b.size())
        throw SolverError("sparse_solve: dimension mismatch between matrix and rhs");
    if (A.rows() == 0) return Eigen::VectorXd();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse_solve: LU factorization failed (" + lu.lastErrorMessage() + ")");
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse_solve: back substitution failed");

    // Backward-error check: scale by |A||x| + |b| so ill-balanced Newton
    // updates (tiny rhs against a stiff operator) are judged fairly.
    const double scale =
        Eigen::Map<const Eigen::VectorXd>(A.valuePtr(), A.nonZeros()).norm() * x.norm() +
        b.norm();
    if (scale > 0.0) {
        const double rel = (A * x - b).norm() / scale;
        if (!(rel < 1e-10)) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3e", rel);
            throw SolverError("sparse_solve: backward error " + std::string(buf) +
                              " exceeds 1e-10; matrix is near-singular");
        }
    }
    return x;
}

} // namespace memsim
