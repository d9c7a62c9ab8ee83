// SPDX-License-Identifier: Apache-2.0
#include "wiener/equalizer.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>
#include <string>

namespace wiener::eq {

std::string_view to_string(Method method)
{
    return method == Method::zf ? "zf" : "mmse";
}

Method parse_method(std::string_view name)
{
    if (name == "zf") return Method::zf;
    if (name == "mmse") return Method::mmse;
    throw std::invalid_argument("unknown equalizer '" + std::string(name) + "'");
}

EqualizerResult equalize(const std::vector<Vector>& h_hats, const std::vector<Vector>& y_hats,
                         Method method, double noise_var)
{
    if (h_hats.empty() || h_hats.size() != y_hats.size()) {
        throw std::invalid_argument("equalize: need one channel per signal");
    }
    const Index n = y_hats.front().size();
    const Index order = h_hats.front().size();
    for (std::size_t i = 0; i < h_hats.size(); ++i) {
        if (y_hats[i].size() != n || h_hats[i].size() != order) {
            throw std::invalid_argument("equalize: inconsistent lengths");
        }
    }
    if (order < 1 || n < order) {
        throw std::invalid_argument("equalize: signals shorter than the channels");
    }
    if (method == Method::mmse && !(noise_var >= 0.0)) {
        throw std::invalid_argument("equalize: noise_var must be non-negative");
    }

    const auto p = static_cast<Index>(h_hats.size());
    Matrix op = Matrix::Zero(p * n, n);
    Vector rhs(p * n);
    for (Index i = 0; i < p; ++i) {
        const Vector& h = h_hats[static_cast<std::size_t>(i)];
        for (Index l = 0; l < order; ++l) {
            op.block(i * n, 0, n, n).diagonal(-l).setConstant(h[l]);
        }
        rhs.segment(i * n, n) = y_hats[static_cast<std::size_t>(i)];
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(op);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) {
        throw NumericalError("unequalizable");
    }

    Vector s;
    if (method == Method::zf || noise_var == 0.0) {
        s = qr.solve(rhs);
    } else {
        Matrix normal = op.transpose() * op;
        normal.diagonal().array() += noise_var;
        s = normal.llt().solve(op.transpose() * rhs);
    }

    EqualizerResult out;
    out.method = method;
    out.offset = order - 1;
    out.s_hat = s.tail(n - out.offset);
    return out;
}

double optimal_gain(const Vector& truth, const Vector& estimate)
{
    if (truth.size() != estimate.size()) {
        throw std::invalid_argument("length mismatch");
    }
    const double energy = estimate.squaredNorm();
    if (!(energy > 0.0)) {
        throw std::invalid_argument("estimate is identically zero");
    }
    return truth.dot(estimate) / energy;
}

double aligned_mse(const Vector& s_true, const Vector& s_hat)
{
    const double gain = optimal_gain(s_true, s_hat);
    const double ref = s_true.squaredNorm();
    if (!(ref > 0.0)) {
        throw std::invalid_argument("aligned_mse: reference is identically zero");
    }
    return (s_true - gain * s_hat).squaredNorm() / ref;
}

double ber(const Vector& s_true, const Vector& s_hat)
{
    const double gain = optimal_gain(s_true, s_hat);
    Index errors = 0;
    for (Index k = 0; k < s_true.size(); ++k) {
        const double decided = gain * s_hat[k] >= 0.0 ? 1.0 : -1.0;
        if (decided != (s_true[k] >= 0.0 ? 1.0 : -1.0)) {
            ++errors;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(s_true.size());
}

double channel_nmse(const Vector& h_true, const Vector& h_hat)
{
    return aligned_mse(h_true, h_hat);
}

double aligned_rmse(const Vector& truth, const Vector& estimate)
{
    const double gain = optimal_gain(truth, estimate);
    return std::sqrt((truth - gain * estimate).squaredNorm() / static_cast<double>(truth.size()));
}

Vector norm_matched(const Vector& h_true, const Vector& h_hat)
{
    const double norm = h_hat.norm();
    if (!(norm > 0.0)) {
        throw std::invalid_argument("norm_matched: estimate is identically zero");
    }
    const double sign = h_true.dot(h_hat) < 0.0 ? -1.0 : 1.0;
    return sign * (h_true.norm() / norm) * h_hat;
}

} // namespace wiener::eq
