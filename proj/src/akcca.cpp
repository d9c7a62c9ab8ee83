// SPDX-License-Identifier: Apache-2.0
#include "wiener/akcca.hpp"

#include "wiener/cca.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wiener::akcca {

std::string_view to_string(Init init)
{
    return init == Init::identity ? "identity" : "kronecker_svd";
}

Init parse_init(std::string_view name)
{
    if (name == "identity") return Init::identity;
    if (name == "kronecker_svd") return Init::kronecker_svd;
    throw std::invalid_argument("unknown initialization '" + std::string(name) + "'");
}

void validate(const AkccaConfig& config)
{
    if (config.order < 2) {
        throw std::invalid_argument("akcca: channel order must be at least 2");
    }
    if (!(config.c >= 0.0) || !std::isfinite(config.c)) {
        throw std::invalid_argument("akcca: regularization c must be finite and non-negative");
    }
    if (!(config.icd_precision > 0.0)) {
        throw std::invalid_argument("akcca: icd_precision must be positive");
    }
    if (!(config.conv_tol > 0.0)) {
        throw std::invalid_argument("akcca: conv_tol must be positive");
    }
    if (config.max_iters < 1) {
        throw std::invalid_argument("akcca: max_iters must be at least 1");
    }
}

Matrix build_w(const Matrix& g, const Vector& h)
{
    const Index order = h.size();
    const Index n = g.rows();
    if (order < 1) {
        throw std::invalid_argument("build_w: empty filter");
    }
    if (n < 2 * order - 1) {
        throw std::invalid_argument("build_w: factor has too few rows for the filter order");
    }
    const Index rows = n - order + 1;
    Matrix w = Matrix::Zero(rows, g.cols());
    for (Index l = 0; l < order; ++l) {
        w.noalias() += h[l] * g.middleRows(order - 1 - l, rows);
    }
    return w;
}

Matrix build_w(const kernel::LowRankFactor& factor, const Vector& h)
{
    if (!factor.centered) {
        throw std::invalid_argument("build_w: factor must be centered");
    }
    return build_w(factor.g, h);
}

WStack build_w_stack(const std::vector<const Matrix*>& factors, const std::vector<Vector>& h)
{
    const auto p = static_cast<Index>(factors.size());
    if (p < 2 || h.size() != factors.size()) {
        throw std::invalid_argument("build_w_stack: need one filter per factor and at least two branches");
    }
    WStack stack(p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (i != j) {
                stack.at(i, j) = cca::center_columns(build_w(*factors[static_cast<std::size_t>(i)],
                                                             h[static_cast<std::size_t>(j)]));
            }
        }
    }
    return stack;
}

namespace {

std::vector<Index> ranks_of(const WStack& w)
{
    std::vector<Index> m(static_cast<std::size_t>(w.p));
    for (Index i = 0; i < w.p; ++i) {
        m[static_cast<std::size_t>(i)] = w.at(i, i == 0 ? 1 : 0).cols();
    }
    return m;
}

void check_stack(const WStack& w)
{
    if (w.p < 2) {
        throw std::invalid_argument("kcca_step: need at least two branches");
    }
    const Index rows = w.at(0, 1).rows();
    for (Index i = 0; i < w.p; ++i) {
        const Index cols = w.at(i, i == 0 ? 1 : 0).cols();
        for (Index j = 0; j < w.p; ++j) {
            if (i == j) continue;
            if (w.at(i, j).rows() != rows || w.at(i, j).cols() != cols) {
                throw std::invalid_argument("kcca_step: inconsistent W dimensions");
            }
        }
    }
}

} // namespace

PairTable<Vector> pair_outputs(const WStack& w, const std::vector<Vector>& alphas)
{
    if (static_cast<Index>(alphas.size()) != w.p) {
        throw std::invalid_argument("pair_outputs: one coefficient vector per branch is required");
    }
    PairTable<Vector> z(w.p);
    for (Index i = 0; i < w.p; ++i) {
        for (Index j = 0; j < w.p; ++j) {
            if (i != j) {
                z.at(i, j) = w.at(i, j) * alphas[static_cast<std::size_t>(i)];
            }
        }
    }
    return z;
}

double cost(const PairTable<Vector>& z, double penalty)
{
    double energy = 0.0;
    double agreement = 0.0;
    for (Index i = 0; i < z.p; ++i) {
        for (Index j = 0; j < z.p; ++j) {
            if (i == j) continue;
            energy += z.at(i, j).squaredNorm();
            agreement += z.at(i, j).dot(z.at(j, i));
        }
    }
    const double total = energy + penalty;
    if (!(total > 0.0)) {
        throw NumericalError("cost: all pair outputs are zero");
    }
    return (total - agreement) / total;
}

KccaSolution kcca_step(const WStack& w, double c, bool shared)
{
    check_stack(w);
    const Index p = w.p;
    const std::vector<Index> m = ranks_of(w);
    numerics::GevProblem gev;
    gev.select = numerics::Select::largest;

    KccaSolution out;
    if (shared) {
        const Index dim = m.front();
        for (Index mi : m) {
            if (mi != dim) {
                throw std::invalid_argument("kcca_step: shared mode needs equal factor ranks");
            }
        }
        gev.a = Matrix::Zero(dim, dim);
        gev.b = Matrix::Zero(dim, dim);
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < p; ++j) {
                if (i == j) continue;
                gev.a.noalias() += w.at(i, j).transpose() * w.at(j, i);
                gev.b.noalias() += w.at(i, j).transpose() * w.at(i, j);
            }
        }
        gev.a = 0.5 * (gev.a + gev.a.transpose()).eval();
        gev.b.diagonal().array() += c;
        const numerics::GevSolution sol = numerics::solve_gev(gev);
        out.rho = sol.eigenvalue;
        out.alphas.assign(static_cast<std::size_t>(p), sol.eigenvector);
    } else {
        std::vector<Index> offset(static_cast<std::size_t>(p + 1), 0);
        for (Index i = 0; i < p; ++i) {
            offset[static_cast<std::size_t>(i + 1)] = offset[static_cast<std::size_t>(i)] + m[static_cast<std::size_t>(i)];
        }
        const Index dim = offset.back();
        gev.a = Matrix::Zero(dim, dim);
        gev.b = Matrix::Zero(dim, dim);
        for (Index i = 0; i < p; ++i) {
            const Index oi = offset[static_cast<std::size_t>(i)];
            const Index mi = m[static_cast<std::size_t>(i)];
            for (Index j = 0; j < p; ++j) {
                if (i == j) continue;
                const Index oj = offset[static_cast<std::size_t>(j)];
                const Index mj = m[static_cast<std::size_t>(j)];
                gev.a.block(oi, oj, mi, mj).noalias() = w.at(i, j).transpose() * w.at(j, i);
                gev.b.block(oi, oi, mi, mi).noalias() += w.at(i, j).transpose() * w.at(i, j);
            }
        }
        gev.a = 0.5 * (gev.a + gev.a.transpose()).eval();
        gev.b.diagonal().array() += c;
        const numerics::GevSolution sol = numerics::solve_gev(gev);
        out.rho = sol.eigenvalue;
        for (Index i = 0; i < p; ++i) {
            out.alphas.emplace_back(sol.eigenvector.segment(offset[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(i)]));
        }
    }

    const PairTable<Vector> z = pair_outputs(w, out.alphas);
    double energy = 0.0;
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (i != j) energy += z.at(i, j).squaredNorm();
        }
    }
    double coef = 0.0;
    if (shared) {
        coef = out.alphas.front().squaredNorm();
    } else {
        for (const Vector& a : out.alphas) coef += a.squaredNorm();
    }
    const double scale = energy + c * coef;
    if (!(scale > 0.0)) {
        throw NumericalError("kcca_step: degenerate solution");
    }
    for (Vector& a : out.alphas) {
        a /= std::sqrt(scale);
    }
    return out;
}

std::vector<Vector> cca_step(const std::vector<Vector>& y_hats, Index order, double ridge)
{
    std::vector<Matrix> embeddings;
    embeddings.reserve(y_hats.size());
    for (const Vector& y : y_hats) {
        embeddings.push_back(cca::embed(y, order));
    }
    return cca::cca_channels(embeddings, ridge).h;
}

namespace {

/// K̄[t, l·M + m] = g[t+L−1−l, m], column-centered over the valid rows.
Matrix lifted_embedding(const Matrix& g, Index order)
{
    const Index rows = g.rows() - order + 1;
    const Index m = g.cols();
    Matrix out(rows, order * m);
    for (Index l = 0; l < order; ++l) {
        out.middleCols(l * m, m) = g.middleRows(order - 1 - l, rows);
    }
    return cca::center_columns(out);
}

} // namespace

KroneckerInit init_kronecker_svd(const std::vector<const Matrix*>& factors, const AkccaConfig& config)
{
    if (factors.size() != 2) {
        throw std::invalid_argument("init_kronecker_svd: defined for two branches only");
    }
    const Index order = config.order;
    const Matrix k1 = lifted_embedding(*factors[0], order);
    const Matrix k2 = lifted_embedding(*factors[1], order);
    const Index d1 = k1.cols();
    const Index d2 = k2.cols();

    // Unknown v = [r₂; r₁] with z₁₂ = K̄₁·r₂ and z₂₁ = K̄₂·r₁.
    numerics::GevProblem gev;
    gev.select = numerics::Select::largest;
    gev.a = Matrix::Zero(d1 + d2, d1 + d2);
    gev.a.topRightCorner(d1, d2) = k1.transpose() * k2;
    gev.a.bottomLeftCorner(d2, d1) = gev.a.topRightCorner(d1, d2).transpose();
    gev.b = Matrix::Zero(d1 + d2, d1 + d2);
    gev.b.topLeftCorner(d1, d1) = k1.transpose() * k1;
    gev.b.bottomRightCorner(d2, d2) = k2.transpose() * k2;
    gev.b.diagonal().array() += config.c;
    const numerics::GevSolution sol = numerics::solve_gev(gev);

    const numerics::KroneckerPair pair2 = numerics::nearest_kronecker_rank1(sol.eigenvector.head(d1), order, factors[0]->cols());
    const numerics::KroneckerPair pair1 = numerics::nearest_kronecker_rank1(sol.eigenvector.tail(d2), order, factors[1]->cols());
    return KroneckerInit{{pair1.h, pair2.h}, {pair2.alpha, pair1.alpha}};
}

AkccaEstimate run_akcca(const std::vector<Vector>& outputs, const AkccaConfig& config)
{
    validate(config);
    const auto p = static_cast<Index>(outputs.size());
    if (p < 2) {
        throw std::invalid_argument("run_akcca: need at least two outputs");
    }
    const Index n = outputs.front().size();
    for (const Vector& x : outputs) {
        if (x.size() != n) {
            throw std::invalid_argument("run_akcca: outputs differ in length");
        }
        if (!x.allFinite()) {
            throw std::invalid_argument("run_akcca: non-finite output samples");
        }
    }
    if (n < 2 * config.order - 1) {
        throw std::invalid_argument("run_akcca: outputs too short for the channel order");
    }

    std::vector<std::shared_ptr<const kernel::LowRankFactor>> owners;
    std::vector<Matrix> slices;
    std::vector<const Matrix*> g(static_cast<std::size_t>(p));
    if (config.shared_nonlinearity) {
        Vector all(p * n);
        for (Index i = 0; i < p; ++i) {
            all.segment(i * n, n) = outputs[static_cast<std::size_t>(i)];
        }
        auto factor = std::make_shared<const kernel::LowRankFactor>(kernel::center_factor(
            kernel::build_lowrank_factor(all, kernel::silverman_bandwidth(all), config.icd_precision)));
        for (Index i = 0; i < p; ++i) {
            slices.push_back(factor->g.middleRows(i * n, n));
            owners.push_back(factor);
        }
        for (Index i = 0; i < p; ++i) {
            g[static_cast<std::size_t>(i)] = &slices[static_cast<std::size_t>(i)];
        }
    } else {
        for (const Vector& x : outputs) {
            owners.push_back(std::make_shared<const kernel::LowRankFactor>(kernel::center_factor(
                kernel::build_lowrank_factor(x, kernel::silverman_bandwidth(x), config.icd_precision))));
        }
        for (Index i = 0; i < p; ++i) {
            g[static_cast<std::size_t>(i)] = &owners[static_cast<std::size_t>(i)]->g;
        }
    }

    AkccaEstimate est;
    for (Index i = 0; i < p; ++i) {
        est.ranks.push_back(g[static_cast<std::size_t>(i)]->cols());
    }

    // The channel step carries the ridge c·‖α‖² so that both half-steps
    // maximize the same regularized correlation and the cost cannot rise.
    std::vector<Vector> y_hat = outputs;
    double ridge = 0.0;
    const bool use_kronecker = config.init == Init::kronecker_svd && p == 2 && !config.shared_nonlinearity;
    if (use_kronecker) {
        const KroneckerInit init = init_kronecker_svd(g, config);
        double coef = 0.0;
        for (Index i = 0; i < p; ++i) {
            y_hat[static_cast<std::size_t>(i)] = *g[static_cast<std::size_t>(i)] * init.alphas[static_cast<std::size_t>(i)];
            coef += init.alphas[static_cast<std::size_t>(i)].squaredNorm();
        }
        ridge = config.c * coef;
    }

    std::vector<Vector> h;
    std::vector<Vector> alphas;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        h = cca_step(y_hat, config.order, ridge);
        const WStack w = build_w_stack(g, h);
        KccaSolution sol = kcca_step(w, config.c, config.shared_nonlinearity);
        alphas = std::move(sol.alphas);

        double coef = 0.0;
        if (config.shared_nonlinearity) {
            coef = alphas.front().squaredNorm();
        } else {
            for (const Vector& a : alphas) coef += a.squaredNorm();
        }
        const double penalty = config.c * coef;
        est.cost_history.push_back(cost(pair_outputs(w, alphas), penalty));
        ridge = penalty;
        for (Index i = 0; i < p; ++i) {
            y_hat[static_cast<std::size_t>(i)] = *g[static_cast<std::size_t>(i)] * alphas[static_cast<std::size_t>(i)];
        }
        est.iterations = iter + 1;

        const std::size_t k = est.cost_history.size();
        if (k >= 2 && std::abs(est.cost_history[k - 1] - est.cost_history[k - 2]) < config.conv_tol) {
            est.converged = true;
            break;
        }
    }

    est.h_hat = std::move(h);
    est.y_hat = std::move(y_hat);
    for (Index i = 0; i < p; ++i) {
        est.alphas.push_back(kernel::KernelExpansion{alphas[static_cast<std::size_t>(i)], owners[static_cast<std::size_t>(i)]});
    }
    return est;
}

} // namespace wiener::akcca
