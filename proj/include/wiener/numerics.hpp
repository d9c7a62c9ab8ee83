// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wiener {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when a numerical routine cannot produce a meaningful result
/// (singular pencil, indefinite kernel, degenerate factorization, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace numerics {

enum class Select { largest, smallest };

/// Symmetric-definite pencil a·v = ρ·b·v.
struct GevProblem {
    Matrix a;
    Matrix b;
    Select select{Select::largest};
};

struct GevSolution {
    double eigenvalue{0.0};
    Vector eigenvector; ///< unit Euclidean norm, first significant entry positive
    bool jittered{false};
};

/// Solves the symmetric-definite generalized eigenproblem by Cholesky
/// reduction to a standard symmetric problem. When b is numerically
/// singular a ridge of 1e-12·trace(b)/dim is added before factoring.
GevSolution solve_gev(const GevProblem& problem);

/// ‖a·v − ρ·b·v‖ / ((‖a‖_F + |ρ|·‖b‖_F)·‖v‖).
double gev_relative_residual(const GevProblem& problem, const GevSolution& solution);

/// Flips `v` so that its first significant component is positive.
/// Components below sqrt(eps)·‖v‖_∞ are treated as zero.
void canonicalize_sign(Vector& v);

struct KroneckerPair {
    Vector h;     ///< unit norm, length rows
    Vector alpha; ///< carries the scale, length cols
};

/// Frobenius-nearest h ⊗ alpha to `v`, where v[l·cols + m] pairs h[l]
/// with alpha[m]. This is the leading singular pair of the rows×cols
/// reshaping.
KroneckerPair nearest_kronecker_rank1(const Vector& v, Index rows, Index cols);

using KernelEval = std::function<double(Index, Index)>;

struct IcdResult {
    Matrix g;                   ///< n × M, K ≈ g·gᵀ
    std::vector<Index> pivots;  ///< pivot row of each column, in selection order
    double residual_trace{0.0}; ///< trace(K) − trace(g·gᵀ)
    double initial_trace{0.0};
};

/// Greedy pivoted incomplete Cholesky decomposition. Picks the largest
/// remaining diagonal at each step and stops as soon as the residual
/// trace drops to `precision` (or the factor reaches full rank).
IcdResult incomplete_cholesky(const KernelEval& kernel_eval, Index n, double precision);

bool all_finite(const Matrix& m);

} // namespace numerics
} // namespace wiener
