// SPDX-License-Identifier: Apache-2.0
#include "wiener/experiment.hpp"

#include "wiener/cca.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace wiener::xp {

using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

std::string_view to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::identify: return "identify";
    case ExperimentKind::equalize_sweep: return "equalize_sweep";
    case ExperimentKind::channel_sweep: return "channel_sweep";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name)
{
    if (name == "identify") return ExperimentKind::identify;
    if (name == "equalize_sweep" || name == "sweep") return ExperimentKind::equalize_sweep;
    if (name == "channel_sweep" || name == "channels") return ExperimentKind::channel_sweep;
    throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algorithm)
{
    switch (algorithm) {
    case Algorithm::akcca: return "akcca";
    case Algorithm::akcca_i: return "akcca_i";
    case Algorithm::cca_linear: return "cca_linear";
    case Algorithm::ls_linear: return "ls_linear";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "akcca") return Algorithm::akcca;
    if (name == "akcca_i") return Algorithm::akcca_i;
    if (name == "cca_linear") return Algorithm::cca_linear;
    if (name == "ls_linear") return Algorithm::ls_linear;
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

ExperimentConfig default_config(ExperimentKind kind)
{
    using signals::NonlinearityId;
    ExperimentConfig c;
    c.experiment = kind;
    switch (kind) {
    case ExperimentKind::identify:
        c.mc_runs = 10;
        break;
    case ExperimentKind::equalize_sweep:
        c.nonlinearities = {NonlinearityId::f1, NonlinearityId::f1, NonlinearityId::f1};
        c.snr_db = {10, 20, 30, 40, 50, 60};
        c.algorithms = {Algorithm::akcca, Algorithm::akcca_i, Algorithm::cca_linear};
        break;
    case ExperimentKind::channel_sweep:
        c.channels = {1, 2, 3, 4, 5};
        c.nonlinearities = {NonlinearityId::f1, NonlinearityId::f1, NonlinearityId::f1, NonlinearityId::f1,
                            NonlinearityId::f1};
        c.branch_counts = {2, 3, 4};
        c.snr_db = {0, 10, 20, 30};
        break;
    }
    return c;
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what)
{
    throw ConfigError("config field '" + field + "': " + what);
}

template <class T>
T get_as(const json& value, const std::string& field, const char* expected)
{
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        field_error(field, std::string("expected ") + expected + ", got " + value.dump());
    }
}

std::vector<double> number_list(const json& value, const std::string& field)
{
    if (!value.is_array()) field_error(field, "expected an array of numbers");
    std::vector<double> out;
    for (const json& v : value) {
        if (!v.is_number()) field_error(field, "expected an array of numbers, got element " + v.dump());
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<int> int_list(const json& value, const std::string& field)
{
    if (!value.is_array()) field_error(field, "expected an array of integers");
    std::vector<int> out;
    for (const json& v : value) {
        if (!v.is_number_integer()) field_error(field, "expected an array of integers, got element " + v.dump());
        out.push_back(v.get<int>());
    }
    return out;
}

std::vector<std::string> string_list(const json& value, const std::string& field)
{
    if (value.is_string()) return {value.get<std::string>()};
    if (!value.is_array()) field_error(field, "expected an array of names");
    std::vector<std::string> out;
    for (const json& v : value) {
        if (!v.is_string()) field_error(field, "expected an array of names, got element " + v.dump());
        out.push_back(v.get<std::string>());
    }
    return out;
}

template <class F>
auto named(const std::string& field, F&& parse) -> decltype(parse())
{
    try {
        return parse();
    } catch (const ConfigError& e) {
        field_error(field, e.what());
    } catch (const std::invalid_argument& e) {
        field_error(field, e.what());
    }
}

void read_akcca(const json& section, akcca::AkccaConfig& cfg)
{
    if (!section.is_object()) field_error("akcca", "expected an object");
    for (const auto& [key, value] : section.items()) {
        const std::string field = "akcca." + key;
        if (key == "order") cfg.order = get_as<Index>(value, field, "an integer");
        else if (key == "c") cfg.c = get_as<double>(value, field, "a number");
        else if (key == "icd_precision") cfg.icd_precision = get_as<double>(value, field, "a number");
        else if (key == "conv_tol") cfg.conv_tol = get_as<double>(value, field, "a number");
        else if (key == "max_iters") cfg.max_iters = get_as<int>(value, field, "an integer");
        else if (key == "init") {
            const auto name = get_as<std::string>(value, field, "a string");
            cfg.init = named(field, [&] { return akcca::parse_init(name); });
        } else field_error(field, "unknown field");
    }
}

void read_system(const json& section, ExperimentConfig& cfg)
{
    if (!section.is_object()) field_error("system", "expected an object");
    for (const auto& [key, value] : section.items()) {
        const std::string field = "system." + key;
        if (key == "channels") cfg.channels = int_list(value, field);
        else if (key == "nonlinearities") {
            cfg.nonlinearities.clear();
            for (const std::string& name : string_list(value, field)) {
                cfg.nonlinearities.push_back(named(field, [&] { return signals::parse_nonlinearity_id(name); }));
            }
        } else if (key == "P") {
            cfg.branch_counts = value.is_number_integer() ? std::vector<int>{value.get<int>()} : int_list(value, field);
        } else field_error(field, "unknown field");
    }
}

void read_equalizer(const json& section, ExperimentConfig& cfg)
{
    if (!section.is_object()) field_error("equalizer", "expected an object");
    for (const auto& [key, value] : section.items()) {
        const std::string field = "equalizer." + key;
        if (key == "method") {
            const auto name = get_as<std::string>(value, field, "a string");
            cfg.equalizer = named(field, [&] { return eq::parse_method(name); });
        } else if (key == "noise_var") cfg.equalizer_noise_var = get_as<double>(value, field, "a number");
        else field_error(field, "unknown field");
    }
}

ExperimentConfig from_json(const json& doc, ExperimentKind fallback)
{
    if (!doc.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    ExperimentKind kind = fallback;
    if (doc.contains("experiment")) {
        const auto name = get_as<std::string>(doc["experiment"], "experiment", "a string");
        kind = named("experiment", [&] { return parse_experiment_kind(name); });
    }
    ExperimentConfig cfg = default_config(kind);
    for (const auto& [key, value] : doc.items()) {
        if (key == "experiment") continue;
        if (key == "system") read_system(value, cfg);
        else if (key == "source") {
            const auto name = get_as<std::string>(value, key, "a string");
            cfg.source = named(key, [&] { return signals::parse_source_kind(name); });
        } else if (key == "N") cfg.n = get_as<Index>(value, key, "an integer");
        else if (key == "snr_db") cfg.snr_db = value.is_number() ? std::vector<double>{value.get<double>()} : number_list(value, key);
        else if (key == "mc_runs") cfg.mc_runs = get_as<int>(value, key, "an integer");
        else if (key == "algorithms") {
            cfg.algorithms.clear();
            for (const std::string& name : string_list(value, key)) {
                cfg.algorithms.push_back(named(key, [&] { return parse_algorithm(name); }));
            }
        } else if (key == "akcca") read_akcca(value, cfg.akcca);
        else if (key == "equalizer") read_equalizer(value, cfg);
        else if (key == "seed") cfg.seed = get_as<std::uint64_t>(value, key, "a non-negative integer");
        else if (key == "timing") cfg.record_timing = get_as<bool>(value, key, "a boolean");
        else field_error(key, "unknown field");
    }
    return cfg;
}

json to_json_value(const ExperimentConfig& c)
{
    json nls = json::array();
    for (auto id : c.nonlinearities) nls.push_back(std::string(signals::to_string(id)));
    json algos = json::array();
    for (auto a : c.algorithms) algos.push_back(std::string(to_string(a)));
    json doc;
    doc["experiment"] = std::string(to_string(c.experiment));
    doc["system"] = {{"channels", c.channels}, {"nonlinearities", nls}, {"P", c.branch_counts}};
    doc["source"] = std::string(signals::to_string(c.source));
    doc["N"] = c.n;
    doc["snr_db"] = c.snr_db;
    doc["mc_runs"] = c.mc_runs;
    doc["algorithms"] = algos;
    doc["akcca"] = {{"order", c.akcca.order},
                    {"c", c.akcca.c},
                    {"icd_precision", c.akcca.icd_precision},
                    {"conv_tol", c.akcca.conv_tol},
                    {"max_iters", c.akcca.max_iters},
                    {"init", std::string(akcca::to_string(c.akcca.init))}};
    doc["equalizer"] = {{"method", std::string(eq::to_string(c.equalizer))}, {"noise_var", c.equalizer_noise_var}};
    doc["seed"] = c.seed;
    doc["timing"] = c.record_timing;
    return doc;
}

} // namespace

ExperimentConfig parse_config(std::string_view text, ExperimentKind fallback)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg = from_json(doc, fallback);
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind fallback)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str(), fallback);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ExperimentConfig apply_overrides(const ExperimentConfig& base, const std::vector<std::string>& overrides)
{
    if (overrides.empty()) {
        return base;
    }
    json doc = to_json_value(base);
    for (const std::string& item : overrides) {
        const auto eq_pos = item.find('=');
        if (eq_pos == std::string::npos || eq_pos == 0) {
            throw ConfigError("override '" + item + "' is not of the form key=value");
        }
        const std::string key = item.substr(0, eq_pos);
        const std::string raw = item.substr(eq_pos + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        json* node = &doc;
        std::istringstream parts(key);
        std::string part;
        std::vector<std::string> path;
        while (std::getline(parts, part, '.')) path.push_back(part);
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            if (!node->is_object()) throw ConfigError("override '" + key + "': '" + path[k] + "' is not a section");
            node = &(*node)[path[k]];
        }
        (*node)[path.back()] = value;
    }
    ExperimentConfig cfg = from_json(doc, base.experiment);
    validate(cfg);
    return cfg;
}

std::string to_json(const ExperimentConfig& config)
{
    return to_json_value(config).dump(2) + "\n";
}

void validate(const ExperimentConfig& c)
{
    if (c.mc_runs < 1) throw ConfigError("config field 'mc_runs': must be at least 1");
    if (c.channels.size() < 2) throw ConfigError("config field 'system.channels': need at least two channels");
    for (int id : c.channels) {
        if (id < 1 || id > 5) {
            throw ConfigError("config field 'system.channels': channel id " + std::to_string(id) + " is outside [1, 5]");
        }
    }
    if (c.nonlinearities.size() != c.channels.size()) {
        throw ConfigError("config field 'system.nonlinearities': need one entry per channel");
    }
    if (c.experiment != ExperimentKind::identify && c.snr_db.empty()) {
        throw ConfigError("config field 'snr_db': sweeps need at least one SNR value");
    }
    for (double s : c.snr_db) {
        if (!std::isfinite(s)) throw ConfigError("config field 'snr_db': values must be finite");
    }
    if (c.algorithms.empty()) throw ConfigError("config field 'algorithms': empty");
    if (c.experiment == ExperimentKind::channel_sweep && c.branch_counts.empty()) {
        throw ConfigError("config field 'system.P': channel sweeps need a list of branch counts");
    }
    for (int p : c.branch_counts) {
        if (p < 2 || p > static_cast<int>(c.channels.size())) {
            throw ConfigError("config field 'system.P': " + std::to_string(p) + " is outside [2, "
                              + std::to_string(c.channels.size()) + "]");
        }
    }
    try {
        akcca::validate(c.akcca);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field 'akcca': ") + e.what());
    }
    if (c.akcca.order < 5) {
        throw ConfigError("config field 'akcca.order': must cover the 5-tap table channels");
    }
    if (c.n < 2 * c.akcca.order - 1) throw ConfigError("config field 'N': too short for the channel order");
    if (!(c.equalizer_noise_var >= 0.0)) throw ConfigError("config field 'equalizer.noise_var': must be >= 0");
    for (Algorithm a : c.algorithms) {
        if (a != Algorithm::ls_linear) continue;
        for (Index p : branch_counts(c)) {
            if (p != 2) throw ConfigError("config field 'algorithms': ls_linear needs exactly two branches");
        }
    }
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t base, std::size_t snr_index, std::size_t run_index)
{
    return mix64(mix64(mix64(base) ^ static_cast<std::uint64_t>(snr_index)) ^ static_cast<std::uint64_t>(run_index));
}

signals::WienerSimoSystem system_for(const ExperimentConfig& config, Index p)
{
    const auto count = static_cast<std::size_t>(p);
    const std::vector<int> ids(config.channels.begin(), config.channels.begin() + static_cast<std::ptrdiff_t>(count));
    const std::vector<signals::NonlinearityId> nls(config.nonlinearities.begin(),
                                                   config.nonlinearities.begin() + static_cast<std::ptrdiff_t>(count));
    signals::WienerSimoSystem system = signals::make_system(ids, nls);
    for (auto& b : system.branches) {
        b.channel = b.channel.padded(config.akcca.order);
    }
    return system;
}

std::vector<Index> branch_counts(const ExperimentConfig& config)
{
    if (config.experiment == ExperimentKind::channel_sweep) {
        return {config.branch_counts.begin(), config.branch_counts.end()};
    }
    return {static_cast<Index>(config.channels.size())};
}

std::vector<double> snr_points(const ExperimentConfig& config)
{
    if (config.snr_db.empty()) return {kInf};
    return config.snr_db;
}

namespace {

Vector grid_over(const Vector& data, Index points)
{
    return Vector::LinSpaced(points, data.minCoeff(), data.maxCoeff());
}

void run_algorithm(const ExperimentConfig& config, Algorithm algorithm, const signals::Simulation& sim,
                   TrialOutcome& out, std::vector<Vector>& h, std::vector<Vector>& y)
{
    ResultRecord& rec = out.record;
    switch (algorithm) {
    case Algorithm::akcca:
    case Algorithm::akcca_i: {
        akcca::AkccaConfig cfg = config.akcca;
        cfg.shared_nonlinearity = algorithm == Algorithm::akcca_i;
        akcca::AkccaEstimate est = akcca::run_akcca(sim.outputs, cfg);
        h = est.h_hat;
        y = est.y_hat;
        rec.iterations = est.iterations;
        rec.converged = est.converged;
        rec.final_cost = est.cost_history.empty() ? kNaN : est.cost_history.back();
        rec.ranks = est.ranks;
        for (std::size_t i = 0; i < sim.outputs.size(); ++i) {
            const Vector grid = grid_over(sim.outputs[i], 101);
            Vector truth(grid.size());
            for (Index k = 0; k < grid.size(); ++k) {
                truth[k] = signals::invert_nonlinearity(out.system.branches[i].nonlinearity, grid[k]);
            }
            rec.metrics.nonlinearity_rmse.push_back(
                eq::aligned_rmse(truth, kernel::eval_expansion(est.alphas[i], grid)));
        }
        out.estimate = std::move(est);
        break;
    }
    case Algorithm::cca_linear:
    case Algorithm::ls_linear: {
        std::vector<Matrix> embeddings;
        for (const Vector& x : sim.outputs) embeddings.push_back(cca::embed(x, config.akcca.order));
        const cca::ChannelEstimate est = algorithm == Algorithm::cca_linear ? cca::cca_channels(embeddings)
                                                                            : cca::ls_channels(embeddings);
        h = est.h;
        y = sim.outputs;
        rec.iterations = 1;
        rec.converged = true;
        rec.final_cost = kNaN;
        break;
    }
    }
}

} // namespace

TrialOutcome run_trial(const ExperimentConfig& config, Index p, std::size_t snr_index, int run, Algorithm algorithm)
{
    const std::vector<double> snrs = snr_points(config);
    TrialOutcome out;
    ResultRecord& rec = out.record;
    rec.experiment = config.experiment;
    rec.algorithm = algorithm;
    rec.p = p;
    rec.n = config.n;
    rec.snr_db = snrs.at(snr_index);
    rec.run = run;
    rec.seed = child_seed(config.seed, snr_index, static_cast<std::size_t>(run));

    out.system = system_for(config, p);
    out.source = signals::generate_source(config.source, config.n, rec.seed);
    if (std::isfinite(rec.snr_db)) {
        out.system.noise_std = signals::noise_std_for_snr(out.system, out.source, rec.snr_db);
    }
    out.simulation = signals::simulate(out.system, out.source, mix64(rec.seed ^ 0x6e6f697365ULL));

    const auto start = std::chrono::steady_clock::now();
    try {
        std::vector<Vector> h;
        std::vector<Vector> y;
        run_algorithm(config, algorithm, out.simulation, out, h, y);
        const eq::EqualizerResult eqr = eq::equalize(h, y, config.equalizer, config.equalizer_noise_var);
        const Vector reference = out.source.samples.tail(eqr.s_hat.size());
        rec.metrics.mse = eq::aligned_mse(reference, eqr.s_hat);
        rec.metrics.ber = config.source == signals::SourceKind::binary ? eq::ber(reference, eqr.s_hat) : kNaN;
        double sum = 0.0;
        for (Index i = 0; i < p; ++i) {
            const double v = eq::channel_nmse(out.system.branches[static_cast<std::size_t>(i)].channel.taps(),
                                              h[static_cast<std::size_t>(i)]);
            rec.metrics.channel_nmse.push_back(v);
            sum += v;
        }
        rec.channel_nmse_mean = sum / static_cast<double>(p);
    } catch (const NumericalError& e) {
        rec.failure = e.what();
        rec.metrics.mse = kNaN;
        rec.metrics.ber = kNaN;
        rec.channel_nmse_mean = kNaN;
        rec.converged = false;
    }
    const auto stop = std::chrono::steady_clock::now();
    if (config.record_timing) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    }
    return out;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int jobs)
{
    validate(config);
    const std::vector<Index> counts = branch_counts(config);
    const std::size_t snr_count = snr_points(config).size();
    const auto runs = static_cast<std::size_t>(config.mc_runs);
    const std::size_t algos = config.algorithms.size();
    const std::size_t cells = counts.size() * snr_count * runs;

    std::vector<ResultRecord> records(cells * algos);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (;;) {
            const std::size_t cell = next.fetch_add(1);
            if (cell >= cells) return;
            const std::size_t run = cell % runs;
            const std::size_t snr_index = (cell / runs) % snr_count;
            const std::size_t p_index = cell / (runs * snr_count);
            try {
                for (std::size_t a = 0; a < algos; ++a) {
                    records[cell * algos + a] =
                        run_trial(config, counts[p_index], snr_index, static_cast<int>(run), config.algorithms[a]).record;
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells);
                return;
            }
        }
    };

    std::size_t threads = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cells);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

} // namespace wiener::xp
