// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/kernelizer.hpp"
#include "wiener/numerics.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace wiener::akcca {

enum class Init { identity, kronecker_svd };

std::string_view to_string(Init init);
Init parse_init(std::string_view name);

struct AkccaConfig {
    Index order{5};          ///< channel length L
    double c{1e-5};          ///< ridge on the expansion coefficients
    double icd_precision{1e-8};
    double conv_tol{1e-10};  ///< stop once |ΔJ| drops below this
    int max_iters{200};
    Init init{Init::identity};
    bool shared_nonlinearity{false};
};

void validate(const AkccaConfig& config);

/// Dense table indexed by ordered branch pairs (i, j); the diagonal is unused.
template <class T>
struct PairTable {
    Index p{0};
    std::vector<T> items;

    explicit PairTable(Index branches = 0) : p(branches), items(static_cast<std::size_t>(branches * branches)) {}
    T& at(Index i, Index j) { return items[static_cast<std::size_t>(i * p + j)]; }
    const T& at(Index i, Index j) const { return items[static_cast<std::size_t>(i * p + j)]; }
};

/// W_ij for i ≠ j, each T × M_i.
using WStack = PairTable<Matrix>;

/// W[t, m] = Σ_l h[l]·g[t+L−1−l, m] over the T = N−L+1 valid rows.
Matrix build_w(const Matrix& g, const Vector& h);
Matrix build_w(const kernel::LowRankFactor& factor, const Vector& h);

/// Builds W_ij = build_w(G_i, h_j) for every ordered pair, with each W
/// column-centered over its rows.
WStack build_w_stack(const std::vector<const Matrix*>& factors, const std::vector<Vector>& h);

struct KccaSolution {
    std::vector<Vector> alphas; ///< P entries; all equal in shared mode
    double rho{0.0};
};

/// Regularized KCCA update of the expansion coefficients. Separate mode
/// builds R with blocks W_ijᵀW_ji and block-diagonal D with blocks
/// Σ_{j≠i} W_ijᵀW_ij + c·I. Shared mode collapses both to single M × M sums.
/// The result is scaled so Σ‖W_ij α_i‖² + c·Σ‖α_i‖² = 1.
KccaSolution kcca_step(const WStack& w, double c, bool shared);

/// Channel update: multichannel CCA on the delay embeddings of ŷ_i.
std::vector<Vector> cca_step(const std::vector<Vector>& y_hats, Index order, double ridge = 0.0);

/// z_ij = W_ij·α_i for every ordered pair.
PairTable<Vector> pair_outputs(const WStack& w, const std::vector<Vector>& alphas);

/// Normalized mismatch (E + penalty − S)/(E + penalty) with
/// E = Σ_{i≠j}‖z_ij‖² and S = Σ_{i≠j} z_ijᵀz_ji. With zero penalty this is
/// Σ_{i<j}‖z_ij − z_ji‖² after scaling the stacked z to unit energy.
double cost(const PairTable<Vector>& z, double penalty = 0.0);

struct AkccaEstimate {
    std::vector<Vector> h_hat;
    std::vector<kernel::KernelExpansion> alphas; ///< one per branch; shared factor in shared mode
    std::vector<Vector> y_hat;                   ///< ŷ_i = G_i·α_i, length N
    std::vector<double> cost_history;            ///< one entry per iteration
    std::vector<Index> ranks;                    ///< M_i per branch
    int iterations{0};
    bool converged{false};
};

struct KroneckerInit {
    std::vector<Vector> h;
    std::vector<Vector> alphas;
};

/// Two-branch initializer: solves the regularized problem over the
/// unstructured products r₂ = h₂ ⊗ α₁ and r₁ = h₁ ⊗ α₂, then projects each
/// onto the nearest Kronecker product.
KroneckerInit init_kronecker_svd(const std::vector<const Matrix*>& factors, const AkccaConfig& config);

/// Alternating CCA / KCCA identification of a SIMO Wiener system from its
/// outputs. Kernel widths follow Silverman's rule per branch (or over all
/// outputs jointly in shared mode).
AkccaEstimate run_akcca(const std::vector<Vector>& outputs, const AkccaConfig& config);

} // namespace wiener::akcca
