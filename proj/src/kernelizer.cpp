// SPDX-License-Identifier: Apache-2.0
#include "wiener/kernelizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wiener::kernel {

double silverman_width(double spread, Index n)
{
    if (n < 1) {
        throw std::invalid_argument("silverman_width: n must be positive");
    }
    return spread * std::pow(static_cast<double>(n), -0.2);
}

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) {
        throw std::invalid_argument("quantile_sorted: empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

KernelSpec silverman_bandwidth(const Vector& data)
{
    const Index n = data.size();
    if (n < 2) {
        throw std::invalid_argument("silverman_bandwidth: need at least two samples");
    }
    if (!data.allFinite()) {
        throw std::invalid_argument("silverman_bandwidth: non-finite samples");
    }
    const double mean = data.mean();
    const double std_dev = std::sqrt((data.array() - mean).square().sum() / static_cast<double>(n - 1));

    std::vector<double> sorted(data.data(), data.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    // With heavy ties the IQR can vanish while the spread does not; fall back
    // to the standard deviation in that case.
    const double spread = iqr > 0.0 ? std::min(std_dev, iqr / 1.34) : std_dev;
    if (!(spread > 0.0)) {
        throw NumericalError("degenerate bandwidth");
    }
    return KernelSpec{silverman_width(spread, n)};
}

LowRankFactor build_lowrank_factor(const Vector& data, const KernelSpec& spec, double precision)
{
    if (data.size() < 2) {
        throw std::invalid_argument("build_lowrank_factor: need at least two samples");
    }
    if (!(spec.width > 0.0) || !std::isfinite(spec.width)) {
        throw std::invalid_argument("build_lowrank_factor: kernel width must be positive");
    }
    const auto kernel_eval = [&](Index i, Index j) { return gaussian_kernel(data[i], data[j], spec); };
    numerics::IcdResult icd = numerics::incomplete_cholesky(kernel_eval, data.size(), precision);

    LowRankFactor out;
    out.g = std::move(icd.g);
    out.base_points = data;
    out.spec = spec;
    out.residual_trace = icd.residual_trace;
    out.pivots = std::move(icd.pivots);
    out.pivot_block.resize(out.rank(), out.rank());
    for (Index k = 0; k < out.rank(); ++k) {
        out.pivot_block.row(k) = out.g.row(out.pivots[static_cast<std::size_t>(k)]);
    }
    out.column_means = Vector::Zero(out.rank());
    out.order.resize(static_cast<std::size_t>(data.size()));
    std::iota(out.order.begin(), out.order.end(), Index{0});
    std::stable_sort(out.order.begin(), out.order.end(), [&](Index a, Index b) { return data[a] < data[b]; });
    return out;
}

LowRankFactor center_factor(LowRankFactor factor)
{
    if (factor.centered) {
        throw std::logic_error("center_factor: factor is already centered");
    }
    factor.column_means = factor.g.colwise().mean().transpose();
    factor.g.rowwise() -= factor.column_means.transpose();
    factor.centered = true;
    return factor;
}

double eval_expansion(const KernelExpansion& expansion, double query)
{
    if (!expansion.factor) {
        throw std::invalid_argument("eval_expansion: expansion has no factor");
    }
    const LowRankFactor& f = *expansion.factor;
    const Vector& alpha = expansion.coefficients;
    if (alpha.size() != f.rank()) {
        throw std::invalid_argument("eval_expansion: coefficient length does not match the factor rank");
    }
    if (f.rank() == 0) {
        return 0.0;
    }

    const auto hit = std::lower_bound(f.order.begin(), f.order.end(), query,
                                      [&](Index idx, double q) { return f.base_points[idx] < q; });
    if (hit != f.order.end() && f.base_points[*hit] == query) {
        return f.g.row(*hit).dot(alpha);
    }

    Vector k(f.rank());
    for (Index p = 0; p < f.rank(); ++p) {
        k[p] = gaussian_kernel(query, f.base_points[f.pivots[static_cast<std::size_t>(p)]], f.spec);
    }
    const Vector phi = f.pivot_block.triangularView<Eigen::Lower>().solve(k);
    return (phi - f.column_means).dot(alpha);
}

Vector eval_expansion(const KernelExpansion& expansion, const Vector& queries)
{
    Vector out(queries.size());
    for (Index i = 0; i < queries.size(); ++i) {
        out[i] = eval_expansion(expansion, queries[i]);
    }
    return out;
}

} // namespace wiener::kernel
