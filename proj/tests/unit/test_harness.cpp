#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "netfx/harness/config.hpp"
#include "netfx/harness/report.hpp"
#include "netfx/harness/runner.hpp"

using namespace netfx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("netfx_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream is(p);
    std::size_t n = 0;
    for (std::string line; std::getline(is, line);) ++n;
    return n;
}

ExperimentConfig small_lim(std::size_t reps = 6) {
    auto c = default_config(Scenario::LinearInMeans);
    c.n_units = 200;
    c.design.t1 = c.design.t2 = 4;
    c.replications = reps;
    c.q = 0.5;
    c.b_samples = 30;
    c.master_seed = 11;
    return c;
}

ReplicationRecord record(std::size_t r, double est, double lo, double hi, double truth) {
    return {r, {0.0, est}, {0.0, lo}, {0.0, hi}, {0.0, truth}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NETFX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, ScenarioDefaults) {
    const auto q = config_from_json({{"scenario", "jsq_queue"}});
    EXPECT_EQ(q.design.pi1, 0.15);
    EXPECT_EQ(q.design.pi2, 0.5);
    EXPECT_EQ(q.estimator.clamp.low, -1.0);
    EXPECT_EQ(q.estimator.clamp.high, 0.0);
    EXPECT_EQ(q.interference_level, InterferenceLevel::High);
    EXPECT_EQ(q.replications, 200u);
    EXPECT_EQ(q.burn_in, 10u);

    const auto m = config_from_json({{"scenario", "binary_mrt"}});
    EXPECT_EQ(m.design.mode, DesignMode::MicroRandomized);
    EXPECT_EQ(m.resample_spec(10000).q, 0.7);
    EXPECT_FALSE(m.p_edge.has_value());

    const auto l = config_from_json({{"scenario", "linear_in_means"}, {"n_units", 2000}});
    EXPECT_EQ(l.resample_spec(2000).q, 0.3);
    EXPECT_EQ(l.design.mode, DesignMode::StaggeredRollout);
}

TEST(Config, RoundTripAndNullClamp) {
    auto j = config_to_json(default_config(Scenario::GaussianLinear));
    j["clamp_low"] = nullptr;
    j["q"] = 0.45;
    const auto c = config_from_json(j);
    EXPECT_FALSE(c.estimator.clamp.low.has_value());
    EXPECT_EQ(c.q, 0.45);
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));

    const auto unbounded = config_from_json({{"scenario", "linear_in_means"}, {"clamp_high", nullptr}});
    EXPECT_EQ(unbounded.estimator.clamp.low, -100.0);
    EXPECT_FALSE(unbounded.estimator.clamp.high.has_value());
}

TEST(Config, Rejections) {
    EXPECT_THROW((void)config_from_json({{"scenaro", "jsq_queue"}}), config_error);
    EXPECT_THROW((void)config_from_json({{"scenario", "tennis"}}), config_error);
    EXPECT_THROW((void)config_from_json({{"lim_noise", "pink"}}), config_error);
    EXPECT_THROW((void)config_from_json({{"n_units", -3}}), config_error);
    EXPECT_THROW((void)config_from_json({{"pi1", "high"}}), config_error);
    EXPECT_THROW((void)config_from_json(nlohmann::json::array()), config_error);
    EXPECT_THROW(config_from_json({{"replications", 0}}).validate(), config_error);
    EXPECT_THROW(config_from_json({{"t1", 1}}).validate(), config_error);
    EXPECT_THROW(config_from_json({{"pi1", 0.5}, {"pi2", 0.5}}).validate(), config_error);
    EXPECT_THROW(config_from_json({{"n_units", 20}, {"q", 0.3}}).validate(), config_error);
    EXPECT_THROW(config_from_json({{"scenario", "file_graph_lim"}}).validate(), config_error);
    EXPECT_THROW(config_from_json({{"clamp_low", 1}, {"clamp_high", -1}}).validate(), config_error);
}

TEST(Config, Overrides) {
    nlohmann::json j = {{"scenario", "linear_in_means"}};
    apply_override(j, "n_units", "500");
    apply_override(j, "scenario", "jsq_queue");
    apply_override(j, "clamp_low", "null");
    apply_override(j, "output_dir", "out/dir");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.n_units, 500u);
    EXPECT_EQ(c.scenario, Scenario::JsqQueue);
    EXPECT_FALSE(c.estimator.clamp.low.has_value());
    EXPECT_EQ(c.output_dir, "out/dir");
    EXPECT_THROW(apply_override(j, "nope", "1"), config_error);
}

TEST(Config, ShippedConfigsParse) {
    for (const auto& entry : fs::directory_iterator(NETFX_CONFIG_DIR)) {
        SCOPED_TRACE(entry.path().string());
        const auto c = config_from_json(read_json_file(entry.path().string()));
        EXPECT_NO_THROW(c.validate());
    }
}

TEST(CoverageReport, Counting) {
    const std::vector<ReplicationRecord> inside{record(0, 1, 0, 2, 1.5), record(1, 1, 0.5, 2, 0.5)};
    EXPECT_EQ(coverage_report(inside).coverage[1], 1.0);
    const std::vector<ReplicationRecord> outside{record(0, 1, 0, 2, 3), record(1, 1, 0.5, 2, -1)};
    EXPECT_EQ(coverage_report(outside).coverage[1], 0.0);
    const std::vector<ReplicationRecord> half{record(0, 1, 0, 2, 1), record(1, 1, 0, 2, 5), record(2, 1, 0, 2, 2),
                                              record(3, 1, 0, 2, -0.1)};
    const auto a = coverage_report(half);
    EXPECT_EQ(a.coverage[1], 0.5);
    EXPECT_EQ(a.coverage[0], 1.0);
    EXPECT_EQ(a.mean_ci_width[1], 2.0);
}

TEST(CoverageReport, ErrorStatistics) {
    const std::vector<ReplicationRecord> recs{record(0, 1, 0, 2, 0), record(1, 3, 0, 2, 0), record(2, 2, 0, 2, 0)};
    const auto a = coverage_report(recs);
    EXPECT_DOUBLE_EQ(a.mean_estimate[1], 2.0);
    EXPECT_DOUBLE_EQ(a.bias[1], 2.0);
    EXPECT_DOUBLE_EQ(a.rmse[1], std::sqrt(14.0 / 3.0));
    // type-7 quantiles of {1,2,3}: 1 + 0.05, 3 - 0.05
    EXPECT_NEAR(a.band_low[1], 1.05, 1e-12);
    EXPECT_NEAR(a.band_high[1], 2.95, 1e-12);
    EXPECT_THROW((void)coverage_report({}), error);
}

TEST(CoverageReport, WithoutIntervals) {
    const std::vector<ReplicationRecord> recs{{0, {0, 1}, {}, {}, {0, 1}}};
    const auto a = coverage_report(recs);
    EXPECT_FALSE(a.has_ci);
    EXPECT_TRUE(a.coverage.empty());
    std::stringstream ss;
    write_aggregate_csv(ss, a);
    const auto back = read_aggregate_csv(ss);
    EXPECT_FALSE(back.has_ci);
    EXPECT_EQ(back.mean_estimate, a.mean_estimate);
}

TEST(AggregateCsv, RoundTripsExactly) {
    const auto res = run_experiment(small_lim());
    std::stringstream ss;
    write_aggregate_csv(ss, *res.aggregate);
    const auto back = read_aggregate_csv(ss);
    EXPECT_EQ(back.mean_estimate, res.aggregate->mean_estimate);
    EXPECT_EQ(back.coverage, res.aggregate->coverage);
    EXPECT_EQ(back.band_high, res.aggregate->band_high);
}

TEST(RunExperiment, NullEffectGaussian) {
    auto c = default_config(Scenario::GaussianLinear);
    c.n_units = 400;
    c.gaussian.params.lambda = 0;
    c.gaussian.params.gamma = 0;
    c.replications = 10;
    c.b_samples = 100;
    const auto res = run_experiment(c);
    ASSERT_TRUE(res.aggregate);
    for (double v : res.aggregate->mean_truth) EXPECT_EQ(v, 0.0);
    const std::size_t t = res.aggregate->length() - 1;
    std::size_t covered = 0;
    for (const auto& r : res.records) covered += r.ci_low[t] <= 0.0 && 0.0 <= r.ci_high[t];
    EXPECT_GE(covered, 8u);
}

TEST(RunExperiment, EveryScenarioRuns) {
    for (auto s : {Scenario::GaussianLinear, Scenario::LinearInMeans, Scenario::BinaryMRT, Scenario::JsqQueue}) {
        auto c = default_config(s);
        c.n_units = 150;
        c.design.t1 = c.design.t2 = 4;
        c.replications = 3;
        c.q = 0.5;
        c.b_samples = 20;
        const auto res = run_experiment(c);
        EXPECT_EQ(res.records.size() + res.failures.size(), 3u);
        ASSERT_TRUE(res.aggregate);
        EXPECT_EQ(res.aggregate->length(), 9u);
    }
    auto f = default_config(Scenario::FileGraphLiM);
    f.graph_path = std::string(NETFX_FIXTURE_DIR) + "/synthetic_edges.txt";
    f.design.t1 = f.design.t2 = 4;
    f.replications = 2;
    f.q = 0.5;
    f.b_samples = 20;
    const auto res = run_experiment(f);
    EXPECT_EQ(res.n_units, 60u);
    std::size_t total = 0;
    for (const auto& [d, n] : *res.degree_histogram) total += n;
    EXPECT_EQ(total, 60u);
}

TEST(RunExperiment, FailuresAreCountedNotDropped) {
    auto c = default_config(Scenario::JsqQueue);
    c.n_units = 50;
    c.design.t1 = c.design.t2 = 3;
    c.replications = 4;
    c.max_jobs = 5;
    c.q = 0.5;
    const auto res = run_experiment(c);
    EXPECT_EQ(res.records.size(), 0u);
    EXPECT_EQ(res.failures.size(), 4u);
    EXPECT_FALSE(res.aggregate);
    const auto dir = scratch("failures");
    write_experiment(res, dir);
    EXPECT_FALSE(fs::exists(dir / "aggregate.csv"));
    EXPECT_EQ(line_count(dir / "failures.csv"), 5u);
    EXPECT_THROW((void)emit_figure_data(dir, "fig4"), error);
    EXPECT_FALSE(fs::exists(dir / "fig4.csv"));
}

TEST(RunExperiment, ReplicationsIndependentOfCountAndWorkers) {
    const auto a = run_experiment(small_lim(6));
    const auto b = run_experiment(small_lim(3));
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(a.records[r].estimate, b.records[r].estimate);
        EXPECT_EQ(a.records[r].ci_low, b.records[r].ci_low);
        EXPECT_EQ(a.records[r].truth, b.records[r].truth);
    }
    ::setenv("NETFX_WORKERS", "3", 1);
    const auto c = run_experiment(small_lim(6));
    ::setenv("NETFX_WORKERS", "1", 1);
    const auto d = run_experiment(small_lim(6));
    ::unsetenv("NETFX_WORKERS");
    std::stringstream sc, sd;
    write_aggregate_csv(sc, *c.aggregate);
    write_aggregate_csv(sd, *d.aggregate);
    EXPECT_EQ(sc.str(), sd.str());
}

TEST(WriteExperiment, ByteIdenticalAcrossRuns) {
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    write_experiment(run_experiment(small_lim()), d1);
    write_experiment(run_experiment(small_lim()), d2);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(d2 / e.path().filename())) << e.path();
    }
    EXPECT_EQ(files, 6u);
}

TEST(EmitFigureData, ShapesAndErrors) {
    const auto dir = scratch("figure");
    auto c = small_lim();
    write_experiment(run_experiment(c), dir);
    const auto p = emit_figure_data(dir, "fig2");
    EXPECT_EQ(line_count(p), 1 + c.design.horizon() + 1);
    EXPECT_EQ(slurp(p).substr(0, 51), "t,mean_estimate,ci_low,ci_high,mean_truth,band_low,");
    const auto h = emit_figure_data(dir, "fig5-right");
    std::ifstream is(h);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "degree,count");
    std::size_t total = 0;
    while (std::getline(is, line)) total += std::stoul(line.substr(line.find(',') + 1));
    EXPECT_EQ(total, c.n_units);
    EXPECT_THROW((void)emit_figure_data(dir, "fig9"), config_error);
    EXPECT_THROW((void)emit_figure_data(dir, "fig3"), config_error);
    EXPECT_FALSE(fs::exists(dir / "fig3.csv"));
    EXPECT_NO_THROW((void)emit_figure_data(dir, "trajectory"));
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const std::string cfg = std::string(NETFX_CONFIG_DIR) + "/smoke.json";
    EXPECT_EQ(run_cli("validate --config " + cfg), 0);
    EXPECT_EQ(run_cli("run --config " + cfg + " --replications 2 --b_samples 10 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_EQ(run_cli("figure --id fig2 --in " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "fig2.csv"));
    EXPECT_EQ(run_cli("figure --id fig7 --in " + dir.string()), 1);
    EXPECT_EQ(run_cli("run --config " + cfg + " --pi2 0.2 --pi1 0.2 --out " + dir.string()), 1);
    EXPECT_EQ(run_cli("run --config /nonexistent.json"), 1);
    EXPECT_EQ(run_cli("run --config " + cfg + " --scenario jsq_queue --max_jobs 3 --replications 2 --out " +
                      (dir / "q").string()),
              2);
    const auto summary = nlohmann::json::parse(slurp(dir / "q" / "summary.json"));
    EXPECT_EQ(summary["failures"], 2);
}
