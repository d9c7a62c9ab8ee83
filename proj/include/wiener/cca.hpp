// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/numerics.hpp"

#include <vector>

namespace wiener::cca {

/// Delay embedding of a signal: T = N−L+1 rows, row t = [v[t+L−1], ..., v[t]].
/// Every branch embedded with the same order shares the same row indexing.
Matrix embed(const Vector& v, Index order);

/// Subtracts each column's mean.
Matrix center_columns(const Matrix& m);

struct ChannelEstimate {
    std::vector<Vector> h; ///< one length-L vector per branch, jointly unit norm
    double rho{0.0};
};

/// Multichannel CCA estimate of the FIR channels from P delay embeddings
/// (centered internally). Solves R·h = ρ·D·h for the largest ρ, where block
/// (i, j) of R is Y_jᵀY_i for i ≠ j and block i of the block-diagonal D is
/// Σ_{j≠i} Y_jᵀY_j (+ ridge·I).
ChannelEstimate cca_channels(const std::vector<Matrix>& embeddings, double ridge = 0.0);

/// Two-channel least-squares estimate: smallest eigenvector of
/// [[X₂ᵀX₂, −X₂ᵀX₁], [−X₁ᵀX₂, X₁ᵀX₁]] under ‖h₁‖² + ‖h₂‖² = 1.
ChannelEstimate ls_channels(const std::vector<Matrix>& embeddings);

} // namespace wiener::cca
