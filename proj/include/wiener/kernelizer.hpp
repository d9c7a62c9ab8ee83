// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/numerics.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace wiener::kernel {

struct KernelSpec {
    double width{1.0}; ///< Gaussian σ
};

/// spread · n^(−1/5).
double silverman_width(double spread, Index n);

/// Silverman's rule: σ = min(sample std, IQR/1.34)·N^(−1/5). The std uses the
/// 1/(N−1) normalization, quartiles use linear interpolation between order
/// statistics. Throws NumericalError("degenerate bandwidth") for constant data.
KernelSpec silverman_bandwidth(const Vector& data);

/// Linear-interpolation quantile of `sorted` at probability q ∈ [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

/// exp(−(x−x′)²/(2σ²))
inline double gaussian_kernel(double x, double x_prime, const KernelSpec& spec)
{
    const double d = x - x_prime;
    return std::exp(-d * d / (2.0 * spec.width * spec.width));
}

/// Low-rank factor K ≈ g·gᵀ of a Gaussian kernel matrix over scalar base points.
struct LowRankFactor {
    Matrix g;                  ///< N × M; column-centered when `centered`
    Vector base_points;        ///< the N scalars the kernel matrix was built from
    KernelSpec spec;
    bool centered{false};
    double residual_trace{0.0};

    std::vector<Index> pivots; ///< base-point index of each column's pivot
    Matrix pivot_block;        ///< uncentered g restricted to pivot rows (lower triangular)
    Vector column_means;       ///< means removed by centering (zero if uncentered)
    std::vector<Index> order;  ///< base points sorted ascending, for exact lookup

    Index size() const { return g.rows(); }
    Index rank() const { return g.cols(); }
};

/// Pivoted incomplete Cholesky of the kernel matrix over `data`; uncentered.
LowRankFactor build_lowrank_factor(const Vector& data, const KernelSpec& spec, double precision);

/// Removes column means from the factor (g ← (I − 11ᵀ/N)·g) without forming
/// N×N matrices. Throws std::logic_error if the factor is already centered.
LowRankFactor center_factor(LowRankFactor factor);

/// ĝ(t) represented by coefficients over the factor's columns.
struct KernelExpansion {
    Vector coefficients;
    std::shared_ptr<const LowRankFactor> factor;
};

/// Evaluates ĝ at `query`. Each query is mapped into the factor's column
/// space through the pivot block (Nyström map φ(t) = P⁻¹·[κ(t, x_p)]_p),
/// centered with the stored means, and dotted with the coefficients. At
/// base points the corresponding row of g·α is returned exactly.
double eval_expansion(const KernelExpansion& expansion, double query);
Vector eval_expansion(const KernelExpansion& expansion, const Vector& queries);

} // namespace wiener::kernel
