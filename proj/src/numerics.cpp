// SPDX-License-Identifier: Apache-2.0
#include "wiener/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wiener::numerics {

namespace {

void check_symmetric(const Matrix& m, const char* name)
{
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, std::numeric_limits<double>::min())) {
        throw std::invalid_argument(std::string("solve_gev: matrix ") + name + " is not symmetric");
    }
}

bool factor_is_usable(const Eigen::LLT<Matrix>& llt, const Matrix& b)
{
    if (llt.info() != Eigen::Success) {
        return false;
    }
    const Vector diag = Matrix(llt.matrixL()).diagonal();
    if (!diag.allFinite()) {
        return false;
    }
    const double floor = std::numeric_limits<double>::epsilon() * static_cast<double>(b.rows())
        * b.diagonal().cwiseAbs().maxCoeff();
    return diag.cwiseAbs2().minCoeff() > floor;
}

} // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

void canonicalize_sign(Vector& v)
{
    if (v.size() == 0) {
        return;
    }
    const double threshold = std::sqrt(std::numeric_limits<double>::epsilon()) * v.cwiseAbs().maxCoeff();
    for (Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) > threshold) {
            if (v[k] < 0.0) {
                v = -v;
            }
            return;
        }
    }
}

GevSolution solve_gev(const GevProblem& problem)
{
    const Matrix& a = problem.a;
    const Matrix& b = problem.b;
    if (a.rows() == 0 || a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("solve_gev: dimension mismatch");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw std::invalid_argument("solve_gev: non-finite entries");
    }
    check_symmetric(a, "a");
    check_symmetric(b, "b");

    const Index dim = a.rows();
    GevSolution out;

    Eigen::LLT<Matrix> llt(b);
    if (!factor_is_usable(llt, b)) {
        const double trace = b.trace();
        if (!(trace > 0.0)) {
            throw NumericalError("singular pencil");
        }
        const double eps = 1e-12 * trace / static_cast<double>(dim);
        llt.compute(b + eps * Matrix::Identity(dim, dim));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("singular pencil");
        }
        out.jittered = true;
    }

    // c = L⁻¹ a L⁻ᵀ
    const auto lower = llt.matrixL();
    Matrix y = lower.solve(a);
    Matrix c = lower.solve(y.transpose());
    c = 0.5 * (c + c.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("singular pencil");
    }
    const Index pick = problem.select == Select::largest ? dim - 1 : 0;
    out.eigenvalue = eig.eigenvalues()[pick];
    Vector v = llt.matrixU().solve(eig.eigenvectors().col(pick));
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw NumericalError("singular pencil");
    }
    v /= norm;
    canonicalize_sign(v);
    out.eigenvector = std::move(v);
    return out;
}

double gev_relative_residual(const GevProblem& problem, const GevSolution& solution)
{
    const Vector& v = solution.eigenvector;
    const double rho = solution.eigenvalue;
    const double lhs = (problem.a * v - rho * (problem.b * v)).norm();
    const double scale = (problem.a.norm() + std::abs(rho) * problem.b.norm()) * v.norm();
    return scale > 0.0 ? lhs / scale : lhs;
}

KroneckerPair nearest_kronecker_rank1(const Vector& v, Index rows, Index cols)
{
    if (rows < 1 || cols < 1 || v.size() != rows * cols) {
        throw std::invalid_argument("nearest_kronecker_rank1: length mismatch");
    }
    if (!v.allFinite()) {
        throw std::invalid_argument("nearest_kronecker_rank1: non-finite entries");
    }
    if (v.cwiseAbs().maxCoeff() == 0.0) {
        throw NumericalError("degenerate rank-1 factorization");
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Matrix reshaped = Eigen::Map<const RowMajor>(v.data(), rows, cols);
    Eigen::JacobiSVD<Matrix> svd(reshaped, Eigen::ComputeThinU | Eigen::ComputeThinV);

    KroneckerPair out;
    out.h = svd.matrixU().col(0);
    out.alpha = svd.singularValues()[0] * svd.matrixV().col(0);
    const Vector before = out.h;
    canonicalize_sign(out.h);
    if (out.h.dot(before) < 0.0) {
        out.alpha = -out.alpha;
    }
    return out;
}

IcdResult incomplete_cholesky(const KernelEval& kernel_eval, Index n, double precision)
{
    if (n < 1) {
        throw std::invalid_argument("incomplete_cholesky: empty kernel");
    }
    if (!(precision > 0.0)) {
        throw std::invalid_argument("incomplete_cholesky: precision must be positive");
    }

    Vector residual(n);
    for (Index i = 0; i < n; ++i) {
        residual[i] = kernel_eval(i, i);
    }
    IcdResult out;
    out.initial_trace = residual.sum();
    const double negative_floor = -1e-10 * std::abs(out.initial_trace);

    Matrix g = Matrix::Zero(n, std::min<Index>(n, 64));
    Index rank = 0;
    double trace = out.initial_trace;
    while (rank < n && trace > precision) {
        if (residual.minCoeff() < negative_floor) {
            throw NumericalError("not PSD");
        }
        Index pivot = 0;
        const double pivot_value = residual.maxCoeff(&pivot);
        if (!(pivot_value > 0.0)) {
            break;
        }
        if (rank == g.cols()) {
            g.conservativeResize(Eigen::NoChange, std::min<Index>(n, 2 * g.cols()));
            g.rightCols(g.cols() - rank).setZero();
        }

        const double root = std::sqrt(pivot_value);
        Vector column(n);
        for (Index i = 0; i < n; ++i) {
            column[i] = kernel_eval(i, pivot);
        }
        if (rank > 0) {
            column.noalias() -= g.leftCols(rank) * g.row(pivot).head(rank).transpose();
        }
        column /= root;
        for (Index earlier : out.pivots) {
            column[earlier] = 0.0;
        }
        column[pivot] = root;
        g.col(rank) = column;

        residual -= column.cwiseAbs2();
        residual[pivot] = 0.0;
        for (Index earlier : out.pivots) {
            residual[earlier] = 0.0;
        }
        out.pivots.push_back(pivot);
        ++rank;
        trace = residual.sum();
    }
    if (residual.minCoeff() < negative_floor) {
        throw NumericalError("not PSD");
    }
    out.g = g.leftCols(rank);
    out.residual_trace = trace;
    return out;
}

} // namespace wiener::numerics
