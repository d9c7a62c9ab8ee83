// SPDX-License-Identifier: Apache-2.0
#include "wiener/cca.hpp"

#include <stdexcept>
#include <string>

namespace wiener::cca {

namespace {

void check_embeddings(const std::vector<Matrix>& embeddings)
{
    if (embeddings.size() < 2) {
        throw std::invalid_argument("at least two embeddings are required");
    }
    const Index rows = embeddings.front().rows();
    const Index order = embeddings.front().cols();
    for (const Matrix& y : embeddings) {
        if (y.rows() != rows || y.cols() != order) {
            throw std::invalid_argument("embeddings must share row count and order");
        }
    }
    if (rows < order) {
        throw std::invalid_argument("embedding has fewer rows than its order");
    }
}

std::vector<Vector> split(const Vector& v, Index blocks, Index length)
{
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(blocks));
    for (Index i = 0; i < blocks; ++i) {
        out.emplace_back(v.segment(i * length, length));
    }
    return out;
}

} // namespace

Matrix embed(const Vector& v, Index order)
{
    if (order < 1) {
        throw std::invalid_argument("embed: order must be positive");
    }
    const Index n = v.size();
    if (n < 2 * order - 1) {
        throw std::invalid_argument("embed: signal of length " + std::to_string(n)
                                    + " is too short for order " + std::to_string(order));
    }
    const Index rows = n - order + 1;
    Matrix out(rows, order);
    for (Index t = 0; t < rows; ++t) {
        for (Index l = 0; l < order; ++l) {
            out(t, l) = v[t + order - 1 - l];
        }
    }
    return out;
}

Matrix center_columns(const Matrix& m)
{
    return m.rowwise() - m.colwise().mean();
}

ChannelEstimate cca_channels(const std::vector<Matrix>& embeddings, double ridge)
{
    check_embeddings(embeddings);
    if (!(ridge >= 0.0)) {
        throw std::invalid_argument("cca_channels: ridge must be non-negative");
    }
    const auto p = static_cast<Index>(embeddings.size());
    const Index order = embeddings.front().cols();

    std::vector<Matrix> centered;
    std::vector<Matrix> gram;
    centered.reserve(embeddings.size());
    for (const Matrix& y : embeddings) {
        centered.push_back(center_columns(y));
        gram.push_back(centered.back().transpose() * centered.back());
    }

    numerics::GevProblem gev;
    gev.a = Matrix::Zero(p * order, p * order);
    gev.b = Matrix::Zero(p * order, p * order);
    gev.select = numerics::Select::largest;
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (i == j) {
                continue;
            }
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            gev.a.block(i * order, j * order, order, order) = centered[uj].transpose() * centered[ui];
            gev.b.block(i * order, i * order, order, order) += gram[uj];
        }
    }
    gev.a = 0.5 * (gev.a + gev.a.transpose()).eval();
    gev.b.diagonal().array() += ridge;

    const numerics::GevSolution sol = numerics::solve_gev(gev);
    return ChannelEstimate{split(sol.eigenvector, p, order), sol.eigenvalue};
}

ChannelEstimate ls_channels(const std::vector<Matrix>& embeddings)
{
    check_embeddings(embeddings);
    if (embeddings.size() != 2) {
        throw std::invalid_argument("ls_channels: exactly two branches are required");
    }
    const Index order = embeddings.front().cols();
    const Matrix x1 = center_columns(embeddings[0]);
    const Matrix x2 = center_columns(embeddings[1]);

    numerics::GevProblem gev;
    gev.a.resize(2 * order, 2 * order);
    gev.a.topLeftCorner(order, order) = x2.transpose() * x2;
    gev.a.topRightCorner(order, order) = -x2.transpose() * x1;
    gev.a.bottomLeftCorner(order, order) = -x1.transpose() * x2;
    gev.a.bottomRightCorner(order, order) = x1.transpose() * x1;
    gev.a = 0.5 * (gev.a + gev.a.transpose()).eval();
    gev.b = Matrix::Identity(2 * order, 2 * order);
    gev.select = numerics::Select::smallest;

    const numerics::GevSolution sol = numerics::solve_gev(gev);
    return ChannelEstimate{split(sol.eigenvector, 2, order), sol.eigenvalue};
}

} // namespace wiener::cca
