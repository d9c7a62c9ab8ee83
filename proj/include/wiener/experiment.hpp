// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/akcca.hpp"
#include "wiener/equalizer.hpp"
#include "wiener/signals.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wiener::xp {

enum class ExperimentKind { identify, equalize_sweep, channel_sweep };
enum class Algorithm { akcca, akcca_i, cca_linear, ls_linear };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);
std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// Errors in configuration text or values. The message names the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    ExperimentKind experiment{ExperimentKind::identify};
    std::vector<int> channels{1, 2, 3};
    std::vector<signals::NonlinearityId> nonlinearities{
        signals::NonlinearityId::f1, signals::NonlinearityId::f2, signals::NonlinearityId::f3};
    std::vector<int> branch_counts;          ///< channel_sweep only; each P uses the first P branches
    signals::SourceKind source{signals::SourceKind::gaussian_iid};
    Index n{256};
    std::vector<double> snr_db;              ///< empty means noiseless (identify only)
    int mc_runs{20};
    std::vector<Algorithm> algorithms{Algorithm::akcca};
    akcca::AkccaConfig akcca;
    eq::Method equalizer{eq::Method::zf};
    double equalizer_noise_var{0.0};
    std::uint64_t seed{1};
    bool record_timing{false};               ///< populate wall_ms (makes output non-deterministic)
};

/// Default configurations for the three experiment families.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses a JSON configuration on top of default_config(kind of the file, or
/// `fallback` when the file names none). Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text, ExperimentKind fallback);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind fallback);

/// Applies `key=value` overrides with dotted keys (e.g. `akcca.c=1e-4`).
/// The value is parsed as JSON, falling back to a plain string.
ExperimentConfig apply_overrides(const ExperimentConfig& base, const std::vector<std::string>& overrides);

std::string to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Child seed from (base, snr index, run index); independent of P and of the
/// algorithm so different estimators see the same realizations.
std::uint64_t child_seed(std::uint64_t base, std::size_t snr_index, std::size_t run_index);

struct ResultRecord {
    ExperimentKind experiment{ExperimentKind::identify};
    Algorithm algorithm{Algorithm::akcca};
    Index p{0};
    Index n{0};
    double snr_db{0.0};                 ///< +inf when noiseless
    int run{0};
    std::uint64_t seed{0};
    eq::MetricReport metrics;
    double channel_nmse_mean{0.0};
    int iterations{0};
    bool converged{false};
    double final_cost{0.0};             ///< NaN for linear estimators
    std::vector<Index> ranks;           ///< M_i per branch (empty for linear estimators)
    std::optional<double> wall_ms;
    std::string failure;                ///< non-empty when the trial raised a numerical error
};

/// Everything produced by one trial, kept for dumping identification results.
struct TrialOutcome {
    ResultRecord record;
    signals::WienerSimoSystem system;
    signals::SourceSignal source;
    signals::Simulation simulation;
    std::optional<akcca::AkccaEstimate> estimate;
};

/// The system used for P branches (the first P channels and nonlinearities).
signals::WienerSimoSystem system_for(const ExperimentConfig& config, Index p);

/// The list of branch counts the experiment iterates over.
std::vector<Index> branch_counts(const ExperimentConfig& config);

/// The SNR list the experiment iterates over (+inf stands for noiseless).
std::vector<double> snr_points(const ExperimentConfig& config);

TrialOutcome run_trial(const ExperimentConfig& config, Index p, std::size_t snr_index, int run,
                       Algorithm algorithm);

/// Runs every (P, snr, run, algorithm) combination on `jobs` worker threads.
/// Records are ordered by (P, snr, run, algorithm) whatever the schedule.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int jobs = 1);

} // namespace wiener::xp
