// SPDX-License-Identifier: Apache-2.0
#include "wiener/report.hpp"

#include "wiener/equalizer.hpp"
#include "wiener/kernelizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace wiener::report {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

struct Stats {
    double mean{std::numeric_limits<double>::quiet_NaN()};
    double median{std::numeric_limits<double>::quiet_NaN()};
    double stderr_{std::numeric_limits<double>::quiet_NaN()};
};

Stats stats_of(std::vector<double> values)
{
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }), values.end());
    Stats s;
    if (values.empty()) return s;
    const auto k = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / k;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stderr_ = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
    return s;
}

} // namespace

std::string format_number(double value)
{
    if (std::isnan(value)) return "";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::filesystem::path summary_path(const std::filesystem::path& results)
{
    return results.parent_path() / (results.stem().string() + "_summary.csv");
}

void write_results(const std::vector<xp::ResultRecord>& records, const std::filesystem::path& path)
{
    if (records.empty()) {
        throw std::invalid_argument("write_results: no records");
    }
    {
        std::ofstream out = open_for_writing(path);
        out << kResultsHeader << '\n';
        for (const xp::ResultRecord& r : records) {
            out << xp::to_string(r.experiment) << ',' << xp::to_string(r.algorithm) << ',' << r.p << ',' << r.n << ','
                << format_number(r.snr_db) << ',' << r.run << ',' << format_number(r.metrics.mse) << ','
                << format_number(r.metrics.ber) << ',' << format_number(r.channel_nmse_mean) << ',' << r.iterations
                << ',' << (r.converged ? "true" : "false") << ','
                << (r.wall_ms ? format_number(*r.wall_ms) : std::string()) << ',' << r.seed << '\n';
        }
        finish(out, path);
    }

    using Key = std::tuple<xp::Algorithm, Index, double>;
    std::vector<Key> order;
    std::map<Key, std::vector<const xp::ResultRecord*>> groups;
    for (const xp::ResultRecord& r : records) {
        const Key key{r.algorithm, r.p, r.snr_db};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }

    const std::filesystem::path side = summary_path(path);
    std::ofstream out = open_for_writing(side);
    out << kSummaryHeader << '\n';
    for (const Key& key : order) {
        const auto& rows = groups.at(key);
        std::vector<double> mse, ber, nmse, iters;
        std::size_t failed = 0;
        std::size_t converged = 0;
        for (const xp::ResultRecord* r : rows) {
            mse.push_back(r->metrics.mse);
            ber.push_back(r->metrics.ber);
            nmse.push_back(r->channel_nmse_mean);
            iters.push_back(r->iterations);
            failed += r->failure.empty() ? 0 : 1;
            converged += r->converged ? 1 : 0;
        }
        const Stats m = stats_of(mse);
        const Stats b = stats_of(ber);
        const xp::ResultRecord& first = *rows.front();
        out << xp::to_string(first.experiment) << ',' << xp::to_string(first.algorithm) << ',' << first.p << ','
            << first.n << ',' << format_number(first.snr_db) << ',' << rows.size() << ',' << failed << ','
            << format_number(m.mean) << ',' << format_number(m.median) << ',' << format_number(m.stderr_) << ','
            << format_number(b.mean) << ',' << format_number(b.median) << ',' << format_number(b.stderr_) << ','
            << format_number(stats_of(nmse).mean) << ',' << format_number(stats_of(iters).mean) << ','
            << format_number(static_cast<double>(converged) / static_cast<double>(rows.size())) << '\n';
    }
    finish(out, side);
}

void dump_identification(const akcca::AkccaEstimate& estimate, const signals::WienerSimoSystem& system,
                         const std::vector<Vector>& outputs, const std::filesystem::path& dir)
{
    const std::size_t p = system.branches.size();
    if (estimate.h_hat.size() != p || estimate.alphas.size() != p || outputs.size() != p) {
        throw std::invalid_argument("dump_identification: estimate does not match the system");
    }
    std::filesystem::create_directories(dir);

    const std::filesystem::path channels = dir / "channels.csv";
    {
        std::ofstream out = open_for_writing(channels);
        out << "branch,tap,true,estimate,deviation\n";
        for (std::size_t i = 0; i < p; ++i) {
            const Vector& truth = system.branches[i].channel.taps();
            const Vector est = eq::norm_matched(truth, estimate.h_hat[i]);
            for (Index l = 0; l < truth.size(); ++l) {
                out << (i + 1) << ',' << l << ',' << format_number(truth[l]) << ',' << format_number(est[l]) << ','
                    << format_number(est[l] - truth[l]) << '\n';
            }
        }
        finish(out, channels);
    }

    for (std::size_t i = 0; i < p; ++i) {
        const Vector grid = Vector::LinSpaced(101, outputs[i].minCoeff(), outputs[i].maxCoeff());
        Vector truth(grid.size());
        for (Index k = 0; k < grid.size(); ++k) {
            truth[k] = signals::invert_nonlinearity(system.branches[i].nonlinearity, grid[k]);
        }
        Vector g_hat = kernel::eval_expansion(estimate.alphas[i], grid);
        if (g_hat.squaredNorm() > 0.0) {
            g_hat *= eq::optimal_gain(truth, g_hat);
        }
        const std::filesystem::path file = dir / ("nonlinearity_" + std::to_string(i + 1) + ".csv");
        std::ofstream out = open_for_writing(file);
        out << "x,g_true,g_hat\n";
        for (Index k = 0; k < grid.size(); ++k) {
            out << format_number(grid[k]) << ',' << format_number(truth[k]) << ',' << format_number(g_hat[k]) << '\n';
        }
        finish(out, file);
    }
}

} // namespace wiener::report
