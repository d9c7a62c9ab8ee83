// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/numerics.hpp"

#include <string_view>
#include <vector>

namespace wiener::eq {

enum class Method { zf, mmse };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct EqualizerResult {
    Vector s_hat;       ///< source estimate on the window [offset, N)
    Method method{Method::zf};
    Index delay{0};
    Index offset{0};    ///< first sample index covered by s_hat (L−1)
};

/// Joint least-squares inversion of the P convolutions ŷ_i ≈ H_i·ŝ, where
/// H_i is the N × N lower-triangular Toeplitz operator with taps ĥ_i. MMSE
/// adds noise_var·I to the normal equations. The first L−1 samples are
/// dropped from the result. Throws NumericalError("unequalizable") when the
/// stacked operator is rank deficient.
EqualizerResult equalize(const std::vector<Vector>& h_hats, const std::vector<Vector>& y_hats,
                         Method method, double noise_var = 0.0);

/// Least-squares gain γ* = ⟨truth, estimate⟩ / ‖estimate‖².
double optimal_gain(const Vector& truth, const Vector& estimate);

/// ‖s − γ*·ŝ‖² / ‖s‖².
double aligned_mse(const Vector& s_true, const Vector& s_hat);

/// Fraction of sign mismatches between s and sign(γ*·ŝ).
double ber(const Vector& s_true, const Vector& s_hat);

/// min_γ ‖h − γ·ĥ‖² / ‖h‖².
double channel_nmse(const Vector& h_true, const Vector& h_hat);

/// sqrt(mean((truth − γ*·estimate)²)).
double aligned_rmse(const Vector& truth, const Vector& estimate);

/// ĥ rescaled to ‖h_true‖ with the sign that best matches h_true.
Vector norm_matched(const Vector& h_true, const Vector& h_hat);

struct MetricReport {
    double mse{0.0};
    double ber{0.0};                       ///< NaN for non-binary sources
    std::vector<double> channel_nmse;
    std::vector<double> nonlinearity_rmse; ///< empty for linear estimators
};

} // namespace wiener::eq
