#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/parallel.hpp"
#include "netfx/core/random.hpp"
#include "netfx/dgp/gaussian.hpp"
#include "netfx/estimation/estimation.hpp"
#include "netfx/harness/config.hpp"
#include "netfx/harness/report.hpp"
#include "netfx/inference/resample.hpp"
#include "netfx/scenarios/binary_mrt.hpp"
#include "netfx/scenarios/graph.hpp"
#include "netfx/scenarios/jsq_queue.hpp"
#include "netfx/scenarios/linear_in_means.hpp"

namespace netfx {

struct ExperimentResult {
    ExperimentConfig config;
    /// Population size actually simulated (graph size for file graphs).
    std::size_t n_units = 0;
    /// Subsampling rate in force, when intervals are on.
    std::optional<double> q;
    std::vector<ReplicationRecord> records;
    std::vector<FailureRecord> failures;
    std::optional<AggregateReport> aggregate;
    std::optional<std::vector<std::pair<std::size_t, std::size_t>>> degree_histogram;
    /// Outcomes of the first successful replication's observed panel, kept
    /// only when requested.
    std::optional<PanelData> first_observed;
};

struct RunOptions {
    bool keep_first_panel = false;
};

/// The shared graph of an experiment, drawn once from stream "graph".
[[nodiscard]] inline std::optional<Graph> experiment_graph(const ExperimentConfig& c) {
    const StreamFactory root(c.master_seed);
    switch (c.scenario) {
        case Scenario::LinearInMeans: {
            Rng rng = root.spawn("graph");
            return gen_rgg(c.n_units, c.lim.kappa, rng);
        }
        case Scenario::BinaryMRT: {
            Rng rng = root.spawn("graph");
            return gen_er(c.n_units, c.p_edge.value_or(3.0 / static_cast<double>(c.n_units)), rng);
        }
        case Scenario::FileGraphLiM:
            return load_edge_list(c.graph_path);
        case Scenario::GaussianLinear:
        case Scenario::JsqQueue:
            break;
    }
    return std::nullopt;
}

/// One replication: observed panel plus coupled all-control / all-treated twins.
[[nodiscard]] inline TwinSimulation simulate_replication(const ExperimentConfig& c, const Graph* graph,
                                                         const StreamFactory& streams) {
    switch (c.scenario) {
        case Scenario::GaussianLinear: {
            GaussianDgpConfig g{.n_units = c.n_units, .design = c.design, .model = c.gaussian.params,
                                .interference = c.gaussian.interference, .noise = c.gaussian.noise};
            g.burn_in = c.burn_in;
            return simulate_with_twins(g, streams);
        }
        case Scenario::LinearInMeans:
        case Scenario::FileGraphLiM: {
            const LiMConfig l{.params = c.lim, .design = c.design, .noise = c.lim_noise, .noise_sd = c.noise_sd,
                              .noise_redraw = c.noise_redraw, .burn_in = c.burn_in};
            return simulate_with_twins(*graph, l, streams);
        }
        case Scenario::BinaryMRT: {
            MRTConfig m{.params = c.mrt, .design = c.design, .burn_in = c.burn_in};
            m.params.p_edge = c.p_edge.value_or(3.0 / static_cast<double>(graph->n_vertices()));
            return simulate_with_twins(*graph, m, streams);
        }
        case Scenario::JsqQueue: {
            const QueueConfig q{.params = c.queue, .design = c.design, .burn_in = c.burn_in, .max_jobs = c.max_jobs};
            return simulate_with_twins(c.n_units, q, streams);
        }
    }
    throw config_error("unknown scenario");
}

/// Runs every replication (in parallel) and aggregates the successes.
/// Replication r draws all randomness from StreamFactory(master_seed).child("rep=r").
[[nodiscard]] inline ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& opts = {}) {
    config.validate();
    ExperimentResult res;
    res.config = config;
    const auto graph = experiment_graph(config);
    res.n_units = graph ? graph->n_vertices() : config.n_units;
    if (graph) res.degree_histogram = degree_histogram(*graph);
    std::optional<ResampleSpec> spec;
    if (config.ci) {
        spec = config.resample_spec(res.n_units);
        if (spec->q * static_cast<double>(res.n_units) < 10.0) throw config_error("q * n_units must be >= 10");
        res.q = spec->q;
    }

    const StreamFactory root(config.master_seed);
    const std::size_t reps = config.replications;
    std::vector<std::optional<ReplicationRecord>> done(reps);
    std::vector<std::string> reasons(reps);
    std::optional<PanelData> first_panel;

    parallel_for(reps, [&](std::size_t r) {
        const StreamFactory streams = root.child("rep=" + std::to_string(r));
        try {
            auto sim = simulate_replication(config, graph ? &*graph : nullptr, streams);
            ReplicationRecord rec;
            rec.replication = r;
            rec.estimate = estimate_tte_trajectory(sim.observed, config.design, config.estimator).estimate;
            if (spec) {
                auto ci = resample_tte_ci(sim.observed, config.design, config.estimator, *spec, streams.child("ci"));
                rec.ci_low = std::move(ci.ci_low);
                rec.ci_high = std::move(ci.ci_high);
            }
            rec.truth = std::move(sim.twins.tte_truth);
            if (opts.keep_first_panel && r == 0) first_panel = std::move(sim.observed);
            done[r] = std::move(rec);
        } catch (const config_error&) {
            throw;
        } catch (const error& e) {
            reasons[r] = e.what();
        }
    });

    for (std::size_t r = 0; r < reps; ++r) {
        if (done[r])
            res.records.push_back(std::move(*done[r]));
        else
            res.failures.push_back({r, reasons[r]});
    }
    if (!res.records.empty()) res.aggregate = coverage_report(res.records);
    res.first_observed = std::move(first_panel);
    return res;
}

[[nodiscard]] inline nlohmann::json summary_json(const ExperimentResult& res) {
    nlohmann::json s;
    s["config"] = config_to_json(res.config);
    s["n_units"] = res.n_units;
    s["q"] = res.q ? nlohmann::json(*res.q) : nlohmann::json(nullptr);
    s["replications"] = res.config.replications;
    s["successes"] = res.records.size();
    s["failures"] = res.failures.size();
    if (res.aggregate) {
        const auto& a = *res.aggregate;
        const std::size_t t = a.length() - 1;
        nlohmann::json fin{{"t", t},
                           {"mean_estimate", a.mean_estimate[t]},
                           {"mean_truth", a.mean_truth[t]},
                           {"band_low", a.band_low[t]},
                           {"band_high", a.band_high[t]},
                           {"bias", a.bias[t]},
                           {"rmse", a.rmse[t]}};
        if (a.has_ci) {
            fin["coverage"] = a.coverage[t];
            fin["mean_ci_width"] = a.mean_ci_width[t];
        }
        s["final"] = std::move(fin);
    }
    return s;
}

/// Writes config.json, replications.csv, failures.csv, summary.json,
/// aggregate.csv (when any replication succeeded) and degree_histogram.csv
/// (graph scenarios) into `dir`.
inline void write_experiment(const ExperimentResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto os = detail::open_output(dir / "config.json");
        os << config_to_json(res.config).dump(2) << '\n';
    }
    {
        auto os = detail::open_output(dir / "replications.csv");
        write_replications_csv(os, res.records);
    }
    {
        auto os = detail::open_output(dir / "failures.csv");
        write_failures_csv(os, res.failures);
    }
    if (res.aggregate) {
        auto os = detail::open_output(dir / "aggregate.csv");
        write_aggregate_csv(os, *res.aggregate);
    } else {
        std::filesystem::remove(dir / "aggregate.csv");
    }
    if (res.degree_histogram) {
        auto os = detail::open_output(dir / "degree_histogram.csv");
        write_degree_csv(os, *res.degree_histogram);
    }
    auto os = detail::open_output(dir / "summary.json");
    os << summary_json(res).dump(2) << '\n';
}

}  // namespace netfx
