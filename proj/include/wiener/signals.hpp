// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace wiener::signals {

enum class SourceKind { gaussian_iid, colored, binary };

std::string_view to_string(SourceKind kind);
SourceKind parse_source_kind(std::string_view name);

struct SourceSignal {
    Vector samples;
    SourceKind kind{SourceKind::gaussian_iid};
};

/// FIR impulse response h[0..L-1].
class FirChannel {
public:
    FirChannel() = default;
    explicit FirChannel(Vector taps);

    const Vector& taps() const { return taps_; }
    Index length() const { return taps_.size(); }

    /// Zero-padded copy of length `length` (must not truncate nonzero taps).
    FirChannel padded(Index length) const;

private:
    Vector taps_;
};

/// Rows of the five-channel impulse response table used by the experiments, id ∈ [1, 5].
FirChannel table_channel(int id);

enum class NonlinearityId { f1, f2, f3, identity, custom };

std::string_view to_string(NonlinearityId id);
NonlinearityId parse_nonlinearity_id(std::string_view name);

struct Nonlinearity {
    NonlinearityId id{NonlinearityId::identity};
    std::function<double(double)> custom; ///< used only when id == custom

    static Nonlinearity builtin(NonlinearityId id) { return Nonlinearity{id, {}}; }
};

/// f1(y) = tanh(0.8y) + 0.1y           (smooth saturation)
/// f2(y) = −0.1 sin(3y) − 0.33y        (stairway)
/// f3(y) = 1.5y − 2.5 (1−e^−y)/(1+e^−y) (smooth dead zone)
double eval_nonlinearity(const Nonlinearity& nl, double y);

/// Inverse of a monotone nonlinearity by bisection, to |Δy| ≤ tol.
double invert_nonlinearity(const Nonlinearity& nl, double x, double tol = 1e-12);

struct Branch {
    FirChannel channel;
    Nonlinearity nonlinearity;
};

struct WienerSimoSystem {
    std::vector<Branch> branches;
    std::vector<double> noise_std; ///< one entry per branch; empty means noiseless

    Index branch_count() const { return static_cast<Index>(branches.size()); }
    Index channel_length() const;
};

/// Checks P ≥ 2, L ≥ 2, equal lengths, at least one nonzero tap per channel
/// and no two channels proportional. Throws std::invalid_argument.
void validate(const WienerSimoSystem& system);

/// σ_min/σ_max of the Sylvester matrix of two channels; zero iff they share a zero.
double coprimality_margin(const FirChannel& a, const FirChannel& b);

/// Builds a system from table channel ids and nonlinearity ids, zero padding
/// all channels to the longest one.
WienerSimoSystem make_system(const std::vector<int>& channel_ids,
                             const std::vector<NonlinearityId>& nonlinearities);

/// 20-tap Kaiser-windowed sinc low-pass, stopband edge 0.7π, 60 dB target,
/// unit DC gain.
FirChannel design_lowpass();

/// Deterministic in `seed`. `colored` filters white Gaussian samples with
/// design_lowpass() and keeps only fully overlapped outputs.
SourceSignal generate_source(SourceKind kind, Index n, std::uint64_t seed);

/// Causal convolution with zero prehistory; output has the input's length.
Vector convolve(const Vector& taps, const Vector& input);

struct Simulation {
    std::vector<Vector> outputs;  ///< x_i, with noise
    std::vector<Vector> internal; ///< y_i, before the nonlinearity
};

Simulation simulate(const WienerSimoSystem& system, const SourceSignal& source, std::uint64_t seed);

/// Per-branch noise level RMS(f_i(y_i))·10^(−snr/20) for the given source.
std::vector<double> noise_std_for_snr(const WienerSimoSystem& system, const SourceSignal& source,
                                      double snr_db);

/// CSV with header x1,...,xP and one row per sample.
void write_signals_csv(const std::filesystem::path& path, const std::vector<Vector>& signals);
std::vector<Vector> read_signals_csv(const std::filesystem::path& path);

} // namespace wiener::signals
