// SPDX-License-Identifier: Apache-2.0
#include "wiener/experiment.hpp"
#include "wiener/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace wiener;
using namespace wiener::xp;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("wiener_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

ResultRecord record(double snr, int run, double mse, double ber)
{
    ResultRecord r;
    r.experiment = ExperimentKind::equalize_sweep;
    r.algorithm = Algorithm::akcca;
    r.p = 3;
    r.n = 256;
    r.snr_db = snr;
    r.run = run;
    r.seed = 42;
    r.metrics.mse = mse;
    r.metrics.ber = ber;
    r.channel_nmse_mean = 0.001;
    r.iterations = 7;
    r.converged = true;
    return r;
}

ExperimentConfig tiny(ExperimentKind kind)
{
    ExperimentConfig cfg = default_config(kind);
    cfg.n = 64;
    cfg.mc_runs = 3;
    cfg.akcca.max_iters = 4;
    if (kind != ExperimentKind::identify) cfg.snr_db = {10.0, 30.0};
    return cfg;
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("child seeds are deterministic and distinct")
{
    CHECK(child_seed(1, 0, 0) == child_seed(1, 0, 0));
    std::set<std::uint64_t> seen;
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t r = 0; r < 50; ++r) seen.insert(child_seed(9, s, r));
    CHECK(seen.size() == 250);
    CHECK(child_seed(1, 0, 0) != child_seed(2, 0, 0));
}

TEST_CASE("config parsing, defaults and diagnostics")
{
    const ExperimentConfig cfg = parse_config(R"({
        "experiment": "equalize_sweep",
        "system": {"channels": [1, 2], "nonlinearities": ["f1", "f3"]},
        "snr_db": [5, 15],
        "mc_runs": 4,
        "akcca": {"c": 1e-4, "init": "kronecker_svd"},
        "seed": 77
    })", ExperimentKind::identify);
    CHECK(cfg.experiment == ExperimentKind::equalize_sweep);
    CHECK(cfg.channels == std::vector<int>{1, 2});
    CHECK(cfg.nonlinearities[1] == signals::NonlinearityId::f3);
    CHECK(cfg.snr_db == std::vector<double>{5, 15});
    CHECK(cfg.akcca.c == 1e-4);
    CHECK(cfg.akcca.init == akcca::Init::kronecker_svd);
    CHECK(cfg.akcca.conv_tol == 1e-10);
    CHECK(cfg.seed == 77);

    CHECK_THROWS_WITH_AS(parse_config(R"({"akcca": {"cc": 1}})", ExperimentKind::identify),
                         doctest::Contains("akcca.cc"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("{\n\"N\": 256,\n\"mc_runs\": }", ExperimentKind::identify),
                         doctest::Contains("line 3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"system": {"channels": [1, 9], "nonlinearities": ["f1", "f1"]}})",
                                      ExperimentKind::identify),
                         doctest::Contains("system.channels"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"mc_runs": "many"})", ExperimentKind::identify),
                         doctest::Contains("mc_runs"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"algorithms": ["ls_linear"]})", ExperimentKind::identify), ConfigError);
}

TEST_CASE("overrides and JSON round trip")
{
    const ExperimentConfig base = default_config(ExperimentKind::channel_sweep);
    const ExperimentConfig cfg = apply_overrides(base, {"akcca.c=0.001", "source=binary", "snr_db=[15]", "system.P=[2,3]"});
    CHECK(cfg.akcca.c == 0.001);
    CHECK(cfg.source == signals::SourceKind::binary);
    CHECK(cfg.snr_db == std::vector<double>{15});
    CHECK(cfg.branch_counts == std::vector<int>{2, 3});
    CHECK_THROWS_AS(apply_overrides(base, {"nonsense"}), ConfigError);

    const ExperimentConfig again = parse_config(to_json(cfg), ExperimentKind::identify);
    CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("results files: one record")
{
    const auto dir = scratch("one");
    report::write_results({record(30.0, 0, 0.01, NAN)}, dir / "r.csv");
    const auto rows = lines(slurp(dir / "r.csv"));
    const auto summary = lines(slurp(dir / "r_summary.csv"));
    REQUIRE(rows.size() == 2);
    REQUIRE(summary.size() == 2);
    CHECK(rows[0] == report::kResultsHeader);
    CHECK(rows[1] == "equalize_sweep,akcca,3,256,30,0,0.01,,0.001,7,true,,42");
    CHECK(rows[1].find("nan") == std::string::npos);
    CHECK(rows[1].find("NaN") == std::string::npos);
}

TEST_CASE("results files: 3 snrs by 2 runs")
{
    const auto dir = scratch("grid");
    std::vector<ResultRecord> recs;
    for (double snr : {10.0, 20.0, 30.0})
        for (int run = 0; run < 2; ++run) recs.push_back(record(snr, run, 0.1 / snr * (run + 1), 0.0));
    report::write_results(recs, dir / "grid.csv");
    CHECK(lines(slurp(dir / "grid.csv")).size() == 7);
    const auto summary = lines(slurp(dir / "grid_summary.csv"));
    REQUIRE(summary.size() == 4);
    // snr 10: mse values 0.01 and 0.02.
    CHECK(summary[1].rfind("equalize_sweep,akcca,3,256,10,2,0,0.015,0.015,0.005,", 0) == 0);
    CHECK_THROWS_AS(report::write_results({}, dir / "none.csv"), std::invalid_argument);
    CHECK_THROWS_AS(report::write_results(recs, dir / "missing_dir" / "x.csv"), std::runtime_error);
}

TEST_CASE("number formatting")
{
    CHECK(report::format_number(NAN).empty());
    CHECK(report::format_number(INFINITY) == "inf");
    CHECK(report::format_number(1.0 / 3.0) == "0.333333333");
    CHECK(report::format_number(12345678901.0) == "1.23456789e+10");
}

TEST_CASE("experiment output does not depend on the worker count")
{
    for (ExperimentKind kind : {ExperimentKind::identify, ExperimentKind::equalize_sweep, ExperimentKind::channel_sweep}) {
        ExperimentConfig cfg = tiny(kind);
        if (kind == ExperimentKind::equalize_sweep) cfg.algorithms = {Algorithm::akcca, Algorithm::cca_linear};
        const auto dir = scratch("det");
        report::write_results(run_experiment(cfg, 1), dir / "serial.csv");
        report::write_results(run_experiment(cfg, 3), dir / "parallel.csv");
        report::write_results(run_experiment(cfg, 3), dir / "again.csv");
        CHECK(slurp(dir / "serial.csv") == slurp(dir / "parallel.csv"));
        CHECK(slurp(dir / "serial.csv") == slurp(dir / "again.csv"));
        CHECK(slurp(dir / "serial_summary.csv") == slurp(dir / "parallel_summary.csv"));
    }
}

TEST_CASE("records are ordered by P, snr, run and algorithm")
{
    ExperimentConfig cfg = tiny(ExperimentKind::channel_sweep);
    cfg.algorithms = {Algorithm::akcca, Algorithm::cca_linear};
    const auto recs = run_experiment(cfg, 2);
    REQUIRE(recs.size() == 3 * 2 * 3 * 2);
    CHECK(recs[0].p == 2);
    CHECK(recs[1].algorithm == Algorithm::cca_linear);
    CHECK(recs[2].run == 1);
    CHECK(recs.back().p == 4);
    CHECK(recs.back().snr_db == 30.0);
    // Paired realizations: the seed only depends on (snr, run).
    CHECK(recs[0].seed == recs[12].seed);
}

TEST_CASE("timing is only recorded on request")
{
    ExperimentConfig cfg = tiny(ExperimentKind::identify);
    cfg.mc_runs = 1;
    CHECK_FALSE(run_experiment(cfg, 1).front().wall_ms.has_value());
    cfg.record_timing = true;
    const auto r = run_experiment(cfg, 1).front();
    REQUIRE(r.wall_ms.has_value());
    CHECK(*r.wall_ms > 0.0);
}

TEST_CASE("identification dump")
{
    using signals::NonlinearityId;
    ExperimentConfig cfg = tiny(ExperimentKind::identify);
    cfg.nonlinearities = {NonlinearityId::identity, NonlinearityId::f1, NonlinearityId::f1};
    const TrialOutcome t = run_trial(cfg, 3, 0, 0, Algorithm::akcca);
    REQUIRE(t.estimate.has_value());
    const auto dir = scratch("dump");
    report::dump_identification(*t.estimate, t.system, t.simulation.outputs, dir);

    const auto ch = lines(slurp(dir / "channels.csv"));
    CHECK(ch.size() == 1 + 3 * 5);
    CHECK(ch[0] == "branch,tap,true,estimate,deviation");

    const auto nl1 = lines(slurp(dir / "nonlinearity_1.csv"));
    REQUIRE(nl1.size() == 102);
    CHECK(nl1[0] == "x,g_true,g_hat");
    for (std::size_t k = 1; k < nl1.size(); ++k) {
        const auto c1 = nl1[k].find(',');
        const auto c2 = nl1[k].find(',', c1 + 1);
        CHECK(nl1[k].substr(0, c1) == nl1[k].substr(c1 + 1, c2 - c1 - 1));
    }
    CHECK(signals::invert_nonlinearity(signals::Nonlinearity::builtin(NonlinearityId::f1), 0.0) == doctest::Approx(0.0));
}

TEST_CASE("linear CCA baseline runs end to end")
{
    ExperimentConfig cfg = tiny(ExperimentKind::equalize_sweep);
    cfg.algorithms = {Algorithm::cca_linear};
    cfg.nonlinearities = {signals::NonlinearityId::identity, signals::NonlinearityId::identity,
                          signals::NonlinearityId::identity};
    cfg.snr_db = {80.0};
    for (const auto& r : run_experiment(cfg, 1)) {
        CHECK(r.failure.empty());
        CHECK(r.metrics.mse < 1e-4);
        CHECK(std::isnan(r.metrics.ber));
    }
}

} // TEST_SUITE
