#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/io.hpp"
#include "netfx/core/summary.hpp"
#include "netfx/harness/config.hpp"

namespace netfx {

struct ReplicationRecord {
    std::size_t replication = 0;
    std::vector<double> estimate;
    /// Empty when intervals are disabled.
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::vector<double> truth;

    [[nodiscard]] bool has_ci() const noexcept { return !ci_low.empty(); }
};

struct FailureRecord {
    std::size_t replication = 0;
    std::string reason;
};

/// Per-time summary across successful replications.
struct AggregateReport {
    std::size_t successes = 0;
    bool has_ci = false;
    std::vector<double> mean_estimate;
    /// 2.5% / 97.5% empirical quantiles of the estimate across replications.
    std::vector<double> band_low;
    std::vector<double> band_high;
    std::vector<double> mean_truth;
    std::vector<double> mean_ci_low;
    std::vector<double> mean_ci_high;
    std::vector<double> coverage;
    std::vector<double> mean_ci_width;
    std::vector<double> bias;
    std::vector<double> rmse;

    [[nodiscard]] std::size_t length() const noexcept { return mean_estimate.size(); }
};

[[nodiscard]] inline AggregateReport coverage_report(std::span<const ReplicationRecord> records) {
    if (records.empty()) throw error("coverage_report: no successful replications");
    const std::size_t len = records.front().estimate.size();
    const bool has_ci = records.front().has_ci();
    for (const auto& r : records)
        if (r.estimate.size() != len || r.truth.size() != len || r.has_ci() != has_ci ||
            (has_ci && (r.ci_low.size() != len || r.ci_high.size() != len)))
            throw std::invalid_argument("coverage_report: records differ in shape");

    AggregateReport a;
    a.successes = records.size();
    a.has_ci = has_ci;
    const auto n = static_cast<double>(records.size());
    for (auto* v : {&a.mean_estimate, &a.band_low, &a.band_high, &a.mean_truth, &a.bias, &a.rmse}) v->assign(len, 0.0);
    if (has_ci)
        for (auto* v : {&a.mean_ci_low, &a.mean_ci_high, &a.coverage, &a.mean_ci_width}) v->assign(len, 0.0);

    std::vector<double> column(records.size());
    for (std::size_t t = 0; t < len; ++t) {
        double se = 0.0, st = 0.0, sd = 0.0, sq = 0.0, cl = 0.0, ch = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            const double d = r.estimate[t] - r.truth[t];
            se += r.estimate[t];
            st += r.truth[t];
            sd += d;
            sq += d * d;
            column[i] = r.estimate[t];
            if (has_ci) {
                cl += r.ci_low[t];
                ch += r.ci_high[t];
                cov += (r.ci_low[t] <= r.truth[t] && r.truth[t] <= r.ci_high[t]) ? 1.0 : 0.0;
            }
        }
        a.mean_estimate[t] = se / n;
        a.mean_truth[t] = st / n;
        a.bias[t] = sd / n;
        a.rmse[t] = std::sqrt(sq / n);
        a.band_low[t] = quantile_type7(column, 0.025);
        a.band_high[t] = quantile_type7(column, 0.975);
        if (has_ci) {
            a.mean_ci_low[t] = cl / n;
            a.mean_ci_high[t] = ch / n;
            a.coverage[t] = cov / n;
            a.mean_ci_width[t] = (ch - cl) / n;
        }
    }
    return a;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + path.string());
    return os;
}

inline std::string csv_field(const std::vector<double>& v, std::size_t t) {
    return v.empty() ? std::string() : format_double(v[t]);
}

inline std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace detail

inline void write_replications_csv(std::ostream& os, std::span<const ReplicationRecord> records) {
    os << "replication,t,estimate,ci_low,ci_high,truth\n";
    for (const auto& r : records)
        for (std::size_t t = 0; t < r.estimate.size(); ++t)
            os << r.replication << ',' << t << ',' << format_double(r.estimate[t]) << ','
               << detail::csv_field(r.ci_low, t) << ',' << detail::csv_field(r.ci_high, t) << ','
               << format_double(r.truth[t]) << '\n';
}

inline void write_failures_csv(std::ostream& os, std::span<const FailureRecord> failures) {
    os << "replication,reason\n";
    for (const auto& f : failures) os << f.replication << ',' << detail::sanitize(f.reason) << '\n';
}

inline void write_aggregate_csv(std::ostream& os, const AggregateReport& a) {
    os << "t,mean_estimate,band_low,band_high,mean_truth,ci_low,ci_high,coverage,mean_ci_width,bias,rmse\n";
    for (std::size_t t = 0; t < a.length(); ++t)
        os << t << ',' << format_double(a.mean_estimate[t]) << ',' << format_double(a.band_low[t]) << ','
           << format_double(a.band_high[t]) << ',' << format_double(a.mean_truth[t]) << ','
           << detail::csv_field(a.mean_ci_low, t) << ',' << detail::csv_field(a.mean_ci_high, t) << ','
           << detail::csv_field(a.coverage, t) << ',' << detail::csv_field(a.mean_ci_width, t) << ','
           << format_double(a.bias[t]) << ',' << format_double(a.rmse[t]) << '\n';
}

[[nodiscard]] inline AggregateReport read_aggregate_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("aggregate: empty file");
    std::map<std::string, std::size_t> col;
    {
        const auto head = detail::split_csv(line);
        for (std::size_t i = 0; i < head.size(); ++i) col[std::string(head[i])] = i;
    }
    for (const char* k : {"t", "mean_estimate", "band_low", "band_high", "mean_truth", "ci_low", "ci_high",
                          "coverage", "mean_ci_width", "bias", "rmse"})
        if (!col.count(k)) throw io_error(std::string("aggregate: missing column ") + k);

    AggregateReport a;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != col.size()) throw io_error("aggregate: ragged row");
        if (detail::parse_index(f[col["t"]]) != a.mean_estimate.size()) throw io_error("aggregate: t out of order");
        auto num = [&](const char* k) { return parse_double(f[col[k]]); };
        const bool ci = !f[col["ci_low"]].empty();
        if (first) a.has_ci = ci;
        if (ci != a.has_ci) throw io_error("aggregate: inconsistent interval columns");
        first = false;
        a.mean_estimate.push_back(num("mean_estimate"));
        a.band_low.push_back(num("band_low"));
        a.band_high.push_back(num("band_high"));
        a.mean_truth.push_back(num("mean_truth"));
        a.bias.push_back(num("bias"));
        a.rmse.push_back(num("rmse"));
        if (ci) {
            a.mean_ci_low.push_back(num("ci_low"));
            a.mean_ci_high.push_back(num("ci_high"));
            a.coverage.push_back(num("coverage"));
            a.mean_ci_width.push_back(num("mean_ci_width"));
        }
    }
    if (a.mean_estimate.empty()) throw io_error("aggregate: no rows");
    return a;
}

inline void write_degree_csv(std::ostream& os, std::span<const std::pair<std::size_t, std::size_t>> hist) {
    os << "degree,count\n";
    for (const auto& [d, c] : hist) os << d << ',' << c << '\n';
}

/// Trajectory panel: t, mean estimate, mean estimated interval, mean truth
/// and the across-replication estimator band.
inline void write_trajectory_figure(std::ostream& os, const AggregateReport& a) {
    if (a.length() == 0) throw error("figure: empty aggregate");
    os << "t,mean_estimate,ci_low,ci_high,mean_truth,band_low,band_high\n";
    for (std::size_t t = 0; t < a.length(); ++t)
        os << t << ',' << format_double(a.mean_estimate[t]) << ',' << detail::csv_field(a.mean_ci_low, t) << ','
           << detail::csv_field(a.mean_ci_high, t) << ',' << format_double(a.mean_truth[t]) << ','
           << format_double(a.band_low[t]) << ',' << format_double(a.band_high[t]) << '\n';
}

/// Scenario a trajectory figure id is drawn from; nullopt for "trajectory"
/// (any scenario). Throws on unknown ids.
[[nodiscard]] inline std::optional<Scenario> figure_scenario(const std::string& id) {
    if (id == "fig2") return Scenario::LinearInMeans;
    if (id == "fig3") return Scenario::BinaryMRT;
    if (id == "fig4") return Scenario::JsqQueue;
    if (id == "fig5") return Scenario::FileGraphLiM;
    if (id == "trajectory") return std::nullopt;
    throw config_error("unknown figure id '" + id + "'");
}

[[nodiscard]] inline bool is_degree_figure(const std::string& id) { return id == "fig5-right" || id == "fig4-right"; }

/// Writes <dir>/<id>.csv from the outputs of a finished run and returns its
/// path. Nothing is written on error.
inline std::filesystem::path emit_figure_data(const std::filesystem::path& dir, const std::string& id) {
    namespace fs = std::filesystem;
    const fs::path out = dir / (id + ".csv");
    if (is_degree_figure(id)) {
        const fs::path src = dir / "degree_histogram.csv";
        if (!fs::exists(src)) throw io_error("figure " + id + ": run has no graph (" + src.string() + " missing)");
        std::ifstream in(src, std::ios::binary);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        auto os = detail::open_output(out);
        os << body;
        return out;
    }
    const auto want = figure_scenario(id);
    const fs::path summary_path = dir / "summary.json";
    std::ifstream sin(summary_path);
    if (!sin) throw io_error("figure: cannot open " + summary_path.string());
    const auto summary = nlohmann::json::parse(sin);
    if (want && summary.at("config").at("scenario").get<Scenario>() != *want)
        throw config_error("figure " + id + " expects scenario " + nlohmann::json(*want).get<std::string>() +
                           ", run used " + summary.at("config").at("scenario").get<std::string>());
    if (summary.at("successes").get<std::size_t>() == 0) throw error("figure: run has no successful replications");
    std::ifstream ain(dir / "aggregate.csv");
    if (!ain) throw io_error("figure: aggregate.csv missing");
    const auto agg = read_aggregate_csv(ain);
    auto os = detail::open_output(out);
    write_trajectory_figure(os, agg);
    return out;
}

}  // namespace netfx
