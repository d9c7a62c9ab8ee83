// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wiener/akcca.hpp"
#include "wiener/experiment.hpp"
#include "wiener/signals.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace wiener::report {

inline constexpr const char* kResultsHeader =
    "experiment,algorithm,P,N,snr_db,run,mse,ber,channel_nmse_mean,iterations,converged,wall_ms,seed";

inline constexpr const char* kSummaryHeader =
    "experiment,algorithm,P,N,snr_db,runs,failed,mse_mean,mse_median,mse_stderr,"
    "ber_mean,ber_median,ber_stderr,channel_nmse_mean,iterations_mean,converged_fraction";

/// 9 significant digits; NaN becomes an empty field, infinities "inf"/"-inf".
std::string format_number(double value);

/// `<dir>/<stem>_summary.csv` for a results file `<dir>/<stem>.csv`.
std::filesystem::path summary_path(const std::filesystem::path& results);

/// Writes one row per record plus the per-(algorithm, P, snr) summary
/// sidecar. Statistics skip non-finite entries.
void write_results(const std::vector<xp::ResultRecord>& records, const std::filesystem::path& path);

/// Writes `channels.csv` (norm-matched ĥ against the true taps) and one
/// `nonlinearity_<i>.csv` per branch with columns x,g_true,g_hat on a
/// 101-point grid spanning the observed outputs. ĝ is scaled by least
/// squares onto the true inverse.
void dump_identification(const akcca::AkccaEstimate& estimate, const signals::WienerSimoSystem& system,
                         const std::vector<Vector>& outputs, const std::filesystem::path& dir);

} // namespace wiener::report
