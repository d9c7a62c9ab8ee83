// SPDX-License-Identifier: Apache-2.0
#include "wiener/signals.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace wiener::signals {

namespace {

constexpr std::array<std::array<double, 5>, 5> kTableChannels{{
    {0.4115, 0.4165, 0.2249, -0.0233, -2.1971},
    {-0.5734, 0.1021, -0.1259, -0.4176, 0.6657},
    {1.4255, 0.6457, -0.9509, -0.1657, -0.2512},
    {0.2846, -0.3880, 0.5373, 0.7983, 0.4093},
    {-0.8769, -0.3056, -0.1160, 0.8130, -0.8007},
}};

double f1(double y) { return std::tanh(0.8 * y) + 0.1 * y; }
double f2(double y) { return -0.1 * std::sin(3.0 * y) - 0.33 * y; }
double f3(double y) { return 1.5 * y - 2.5 * (1.0 - std::exp(-y)) / (1.0 + std::exp(-y)); }

} // namespace

std::string_view to_string(SourceKind kind)
{
    switch (kind) {
    case SourceKind::gaussian_iid: return "gaussian_iid";
    case SourceKind::colored: return "colored";
    case SourceKind::binary: return "binary";
    }
    return "unknown";
}

SourceKind parse_source_kind(std::string_view name)
{
    if (name == "gaussian_iid" || name == "gaussian") return SourceKind::gaussian_iid;
    if (name == "colored") return SourceKind::colored;
    if (name == "binary") return SourceKind::binary;
    throw std::invalid_argument("unknown source kind '" + std::string(name) + "'");
}

std::string_view to_string(NonlinearityId id)
{
    switch (id) {
    case NonlinearityId::f1: return "f1";
    case NonlinearityId::f2: return "f2";
    case NonlinearityId::f3: return "f3";
    case NonlinearityId::identity: return "identity";
    case NonlinearityId::custom: return "custom";
    }
    return "unknown";
}

NonlinearityId parse_nonlinearity_id(std::string_view name)
{
    if (name == "f1") return NonlinearityId::f1;
    if (name == "f2") return NonlinearityId::f2;
    if (name == "f3") return NonlinearityId::f3;
    if (name == "identity") return NonlinearityId::identity;
    throw std::invalid_argument("unknown nonlinearity '" + std::string(name) + "'");
}

FirChannel::FirChannel(Vector taps) : taps_(std::move(taps))
{
    if (taps_.size() < 1 || !taps_.allFinite()) {
        throw std::invalid_argument("FirChannel: taps must be finite and non-empty");
    }
}

FirChannel FirChannel::padded(Index length) const
{
    if (length < taps_.size()) {
        for (Index k = length; k < taps_.size(); ++k) {
            if (taps_[k] != 0.0) {
                throw std::invalid_argument("FirChannel::padded: would drop nonzero taps");
            }
        }
    }
    Vector out = Vector::Zero(length);
    const Index keep = std::min(length, taps_.size());
    out.head(keep) = taps_.head(keep);
    return FirChannel(std::move(out));
}

FirChannel table_channel(int id)
{
    if (id < 1 || id > static_cast<int>(kTableChannels.size())) {
        throw std::invalid_argument("channel id must be in [1, 5], got " + std::to_string(id));
    }
    const auto& row = kTableChannels[static_cast<std::size_t>(id - 1)];
    Vector taps(static_cast<Index>(row.size()));
    for (std::size_t k = 0; k < row.size(); ++k) {
        taps[static_cast<Index>(k)] = row[k];
    }
    return FirChannel(std::move(taps));
}

double eval_nonlinearity(const Nonlinearity& nl, double y)
{
    switch (nl.id) {
    case NonlinearityId::f1: return f1(y);
    case NonlinearityId::f2: return f2(y);
    case NonlinearityId::f3: return f3(y);
    case NonlinearityId::identity: return y;
    case NonlinearityId::custom:
        if (!nl.custom) {
            throw std::invalid_argument("custom nonlinearity without a function");
        }
        return nl.custom(y);
    }
    return y;
}

double invert_nonlinearity(const Nonlinearity& nl, double x, double tol)
{
    if (nl.id == NonlinearityId::identity) {
        return x;
    }
    const bool increasing = eval_nonlinearity(nl, 1.0) > eval_nonlinearity(nl, -1.0);
    auto below = [&](double y) {
        const double v = eval_nonlinearity(nl, y);
        return increasing ? v < x : v > x;
    };
    double lo = -1.0;
    double hi = 1.0;
    for (int k = 0; k < 200 && below(lo) == false; ++k) {
        lo *= 2.0;
    }
    for (int k = 0; k < 200 && below(hi); ++k) {
        hi *= 2.0;
    }
    if (!below(lo) || below(hi)) {
        throw NumericalError("invert_nonlinearity: value outside the range of the map");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (below(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Index WienerSimoSystem::channel_length() const
{
    Index length = 0;
    for (const auto& b : branches) {
        length = std::max(length, b.channel.length());
    }
    return length;
}

void validate(const WienerSimoSystem& system)
{
    const Index p = system.branch_count();
    if (p < 2) {
        throw std::invalid_argument("a SIMO system needs at least two branches");
    }
    const Index length = system.branches.front().channel.length();
    if (length < 2) {
        throw std::invalid_argument("channel length must be at least 2");
    }
    for (const auto& b : system.branches) {
        if (b.channel.length() != length) {
            throw std::invalid_argument("all channels must share the same length");
        }
        if (b.channel.taps().cwiseAbs().maxCoeff() == 0.0) {
            throw std::invalid_argument("channel has no nonzero tap");
        }
    }
    if (!system.noise_std.empty() && static_cast<Index>(system.noise_std.size()) != p) {
        throw std::invalid_argument("noise_std must have one entry per branch");
    }
    for (double s : system.noise_std) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("noise_std must be finite and non-negative");
        }
    }
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            const Vector& a = system.branches[static_cast<std::size_t>(i)].channel.taps();
            const Vector& b = system.branches[static_cast<std::size_t>(j)].channel.taps();
            if (std::abs(a.dot(b)) >= (1.0 - 1e-12) * a.norm() * b.norm()) {
                throw std::invalid_argument("channels " + std::to_string(i + 1) + " and "
                                            + std::to_string(j + 1) + " are proportional");
            }
        }
    }
}

double coprimality_margin(const FirChannel& a, const FirChannel& b)
{
    auto trimmed = [](const Vector& taps) {
        Index last = taps.size() - 1;
        while (last > 0 && taps[last] == 0.0) {
            --last;
        }
        return Vector(taps.head(last + 1));
    };
    const Vector p = trimmed(a.taps());
    const Vector q = trimmed(b.taps());
    const Index m = p.size() - 1;
    const Index n = q.size() - 1;
    if (m + n == 0) {
        return 1.0;
    }
    Matrix sylvester = Matrix::Zero(m + n, m + n);
    for (Index r = 0; r < n; ++r) {
        sylvester.row(r).segment(r, m + 1) = p.reverse().transpose();
    }
    for (Index r = 0; r < m; ++r) {
        sylvester.row(n + r).segment(r, n + 1) = q.reverse().transpose();
    }
    Eigen::JacobiSVD<Matrix> svd(sylvester);
    const Vector& s = svd.singularValues();
    return s[0] > 0.0 ? s[s.size() - 1] / s[0] : 0.0;
}

WienerSimoSystem make_system(const std::vector<int>& channel_ids,
                             const std::vector<NonlinearityId>& nonlinearities)
{
    if (channel_ids.size() != nonlinearities.size()) {
        throw std::invalid_argument("one nonlinearity per channel is required");
    }
    WienerSimoSystem system;
    Index length = 0;
    for (int id : channel_ids) {
        length = std::max(length, table_channel(id).length());
    }
    for (std::size_t i = 0; i < channel_ids.size(); ++i) {
        system.branches.push_back(
            Branch{table_channel(channel_ids[i]).padded(length), Nonlinearity::builtin(nonlinearities[i])});
    }
    return system;
}

FirChannel design_lowpass()
{
    constexpr int taps = 20;
    constexpr double stopband_edge = 0.7 * std::numbers::pi;
    constexpr double attenuation_db = 60.0;
    // Kaiser's design formulas for β and the transition width.
    const double beta = 0.1102 * (attenuation_db - 8.7);
    const double transition = (attenuation_db - 7.95) / (2.285 * (taps - 1));
    const double cutoff = stopband_edge - 0.5 * transition;

    const double centre = 0.5 * (taps - 1);
    const double norm = std::cyl_bessel_i(0.0, beta);
    Vector h(taps);
    for (int k = 0; k < taps; ++k) {
        const double t = k - centre;
        const double ideal = std::sin(cutoff * t) / (std::numbers::pi * t);
        const double r = t / centre;
        const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
        h[k] = ideal * window;
    }
    h /= h.sum();
    // Enforce exact symmetry against rounding in the window evaluation.
    for (int k = 0; k < taps / 2; ++k) {
        const double avg = 0.5 * (h[k] + h[taps - 1 - k]);
        h[k] = avg;
        h[taps - 1 - k] = avg;
    }
    return FirChannel(std::move(h));
}

SourceSignal generate_source(SourceKind kind, Index n, std::uint64_t seed)
{
    if (n < 1) {
        throw std::invalid_argument("generate_source: n must be at least 1");
    }
    std::mt19937_64 rng(seed);
    SourceSignal out;
    out.kind = kind;
    switch (kind) {
    case SourceKind::gaussian_iid: {
        std::normal_distribution<double> normal(0.0, 1.0);
        out.samples.resize(n);
        for (Index k = 0; k < n; ++k) {
            out.samples[k] = normal(rng);
        }
        break;
    }
    case SourceKind::binary: {
        std::bernoulli_distribution coin(0.5);
        out.samples.resize(n);
        for (Index k = 0; k < n; ++k) {
            out.samples[k] = coin(rng) ? 1.0 : -1.0;
        }
        break;
    }
    case SourceKind::colored: {
        const Vector taps = design_lowpass().taps();
        const Index extra = taps.size() - 1;
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector white(n + extra);
        for (Index k = 0; k < white.size(); ++k) {
            white[k] = normal(rng);
        }
        out.samples.resize(n);
        for (Index k = 0; k < n; ++k) {
            double acc = 0.0;
            for (Index l = 0; l < taps.size(); ++l) {
                acc += taps[l] * white[k + extra - l];
            }
            out.samples[k] = acc;
        }
        break;
    }
    }
    return out;
}

Vector convolve(const Vector& taps, const Vector& input)
{
    const Index n = input.size();
    Vector out = Vector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        const Index span = std::min<Index>(taps.size(), k + 1);
        double acc = 0.0;
        for (Index l = 0; l < span; ++l) {
            acc += taps[l] * input[k - l];
        }
        out[k] = acc;
    }
    return out;
}

Simulation simulate(const WienerSimoSystem& system, const SourceSignal& source, std::uint64_t seed)
{
    validate(system);
    const Index n = source.samples.size();
    if (n < system.channel_length()) {
        throw std::invalid_argument("simulate: source shorter than the channels");
    }
    Simulation out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < system.branches.size(); ++i) {
        const Branch& branch = system.branches[i];
        Vector y = convolve(branch.channel.taps(), source.samples);
        Vector x = y.unaryExpr([&](double v) { return eval_nonlinearity(branch.nonlinearity, v); });
        if (!system.noise_std.empty()) {
            const double sigma = system.noise_std[i];
            for (Index k = 0; k < n; ++k) {
                x[k] += sigma * normal(rng);
            }
        }
        out.internal.push_back(std::move(y));
        out.outputs.push_back(std::move(x));
    }
    return out;
}

std::vector<double> noise_std_for_snr(const WienerSimoSystem& system, const SourceSignal& source,
                                      double snr_db)
{
    WienerSimoSystem clean = system;
    clean.noise_std.clear();
    const Simulation sim = simulate(clean, source, 0);
    std::vector<double> sigma;
    sigma.reserve(sim.outputs.size());
    for (const Vector& x : sim.outputs) {
        const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
        sigma.push_back(rms * std::pow(10.0, -snr_db / 20.0));
    }
    return sigma;
}

void write_signals_csv(const std::filesystem::path& path, const std::vector<Vector>& signals)
{
    if (signals.empty()) {
        throw std::invalid_argument("write_signals_csv: no signals");
    }
    const Index n = signals.front().size();
    for (const Vector& s : signals) {
        if (s.size() != n) {
            throw std::invalid_argument("write_signals_csv: signals differ in length");
        }
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    for (std::size_t i = 0; i < signals.size(); ++i) {
        out << (i ? "," : "") << 'x' << (i + 1);
    }
    out << '\n';
    out.precision(17);
    for (Index k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < signals.size(); ++i) {
            out << (i ? "," : "") << signals[i][k];
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

std::vector<Vector> read_signals_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path.string() + ": missing header");
    }
    std::size_t columns = 0;
    {
        std::istringstream header(line);
        std::string name;
        while (std::getline(header, name, ',')) {
            if (!name.empty() && name.back() == '\r') name.pop_back();
            if (name != "x" + std::to_string(columns + 1)) {
                throw std::runtime_error(path.string() + ": unexpected header field '" + name + "'");
            }
            ++columns;
        }
    }
    if (columns == 0) {
        throw std::runtime_error(path.string() + ": empty header");
    }
    std::vector<std::vector<double>> cols(columns);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string field;
        std::size_t c = 0;
        while (std::getline(row, field, ',')) {
            if (c >= columns) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": too many fields");
            }
            try {
                cols[c].push_back(std::stod(field));
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number '"
                                         + field + "'");
            }
            ++c;
        }
        if (c != columns) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": too few fields");
        }
    }
    std::vector<Vector> out;
    for (auto& c : cols) {
        out.push_back(Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size())));
    }
    return out;
}

} // namespace wiener::signals
