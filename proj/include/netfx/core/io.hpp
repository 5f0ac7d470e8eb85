#pragma once

#include <charconv>
#include <cmath>
#include <algorithm>
#include <fstream>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netfx/core/error.hpp"
#include "netfx/core/types.hpp"

namespace netfx {

/// Shortest round-trip decimal form; locale independent.
[[nodiscard]] inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw io_error("not a number: '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::size_t parse_index(std::string_view s) {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw io_error("not an index: '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Panel CSV: header `unit,t,outcome,treatment`, one row per (unit, t), unit
// major. The treatment field is empty at t = 0.
// ---------------------------------------------------------------------------

inline void write_panel_csv(std::ostream& os, const PanelData& panel) {
    os << "unit,t,outcome,treatment\n";
    for (std::size_t n = 0; n < panel.n_units; ++n) {
        for (std::size_t t = 0; t <= panel.horizon; ++t) {
            os << n << ',' << t << ',' << format_double(panel.outcome(n, t)) << ',';
            if (t > 0) os << format_double(panel.treatment(t, n));
            os << '\n';
        }
    }
}

inline void write_panel_csv(const std::string& path, const PanelData& panel) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + path);
    write_panel_csv(os, panel);
}

[[nodiscard]] inline PanelData read_panel_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("panel csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "unit,t,outcome,treatment") throw io_error("panel csv: unexpected header '" + line + "'");

    struct Row {
        std::size_t unit, t;
        double outcome;
        std::optional<double> treatment;
    };
    std::vector<Row> rows;
    std::size_t max_unit = 0, max_t = 0, lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 4) throw io_error("panel csv: line " + std::to_string(lineno) + " needs 4 fields");
        Row r{detail::parse_index(f[0]), detail::parse_index(f[1]), parse_double(f[2]), std::nullopt};
        if (!f[3].empty()) r.treatment = parse_double(f[3]);
        if (r.t == 0 && r.treatment) throw io_error("panel csv: treatment given at t=0");
        if (r.t > 0 && !r.treatment) throw io_error("panel csv: missing treatment at line " + std::to_string(lineno));
        max_unit = std::max(max_unit, r.unit);
        max_t = std::max(max_t, r.t);
        rows.push_back(r);
    }
    if (rows.empty()) throw io_error("panel csv: no data rows");
    if (max_t == 0) throw io_error("panel csv: horizon must be positive");

    PanelData panel(max_unit + 1, max_t);
    if (rows.size() != panel.n_units * (panel.horizon + 1))
        throw io_error("panel csv: expected " + std::to_string(panel.n_units * (panel.horizon + 1)) + " rows, got " +
                       std::to_string(rows.size()));
    std::vector<char> seen(rows.size(), 0);
    for (const auto& r : rows) {
        const std::size_t key = r.unit * (panel.horizon + 1) + r.t;
        if (seen[key]) throw io_error("panel csv: duplicate (unit,t) = (" + std::to_string(r.unit) + "," +
                                      std::to_string(r.t) + ")");
        seen[key] = 1;
        panel.outcomes(r.unit, r.t) = r.outcome;
        if (r.t > 0) panel.treatments(r.t - 1, r.unit) = *r.treatment;
    }
    return panel;
}

[[nodiscard]] inline PanelData read_panel_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open: " + path);
    return read_panel_csv(is);
}

// ---------------------------------------------------------------------------
// JSON mappings (nlohmann ADL hooks).
// ---------------------------------------------------------------------------

NLOHMANN_JSON_SERIALIZE_ENUM(DesignMode, {{DesignMode::TwoStageStatic, "TwoStageStatic"},
                                          {DesignMode::StaggeredRollout, "StaggeredRollout"},
                                          {DesignMode::MicroRandomized, "MicroRandomized"}})

NLOHMANN_JSON_SERIALIZE_ENUM(TimeVaryingSampling, {{TimeVaryingSampling::Projected, "Projected"},
                                                   {TimeVaryingSampling::Dense, "Dense"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ExperimentDesign, pi1, pi2, t1, t2, mode, all_control_override,
                                   all_treated_override)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(InterferenceSpec, mu, sigma, mu_t, sigma_t, resample_time_varying,
                                   time_varying_sampling)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NoiseSpec, sigma_e)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CoefficientSd, delta, xi, lambda, gamma, theta)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LinearOutcomeParams, delta, xi, lambda, gamma, theta_bar, unit_coef_sd)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SEState, nu, rho)

inline void to_json(nlohmann::json& j, const TTEReport& r) {
    auto opt = [](const std::optional<std::vector<double>>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j = nlohmann::json{{"estimate", r.estimate},
                       {"ci_low", opt(r.ci_low)},
                       {"ci_high", opt(r.ci_high)},
                       {"ground_truth", opt(r.ground_truth)},
                       {"replication_id", r.replication_id},
                       {"seed", r.seed}};
}

inline void from_json(const nlohmann::json& j, TTEReport& r) {
    auto opt = [&](const char* key) -> std::optional<std::vector<double>> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<std::vector<double>>();
    };
    r.estimate = j.at("estimate").get<std::vector<double>>();
    r.ci_low = opt("ci_low");
    r.ci_high = opt("ci_high");
    r.ground_truth = opt("ground_truth");
    r.replication_id = j.at("replication_id").get<std::int64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
}

inline void to_json(nlohmann::json& j, const PanelData& p) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (std::size_t n = 0; n < p.n_units; ++n) outcomes.push_back(p.outcomes.row(n));
    nlohmann::json treatments = nlohmann::json::array();
    for (std::size_t r = 0; r < p.horizon; ++r) treatments.push_back(p.treatments.row(r));
    j = nlohmann::json{{"n_units", p.n_units}, {"horizon", p.horizon}, {"outcomes", outcomes}, {"treatments", treatments}};
}

inline void from_json(const nlohmann::json& j, PanelData& p) {
    p = PanelData(j.at("n_units").get<std::size_t>(), j.at("horizon").get<std::size_t>());
    const auto& y = j.at("outcomes");
    const auto& w = j.at("treatments");
    if (y.size() != p.n_units || w.size() != p.horizon) throw io_error("panel json: shape mismatch");
    for (std::size_t n = 0; n < p.n_units; ++n) {
        const auto row = y.at(n).get<std::vector<double>>();
        if (row.size() != p.horizon + 1) throw io_error("panel json: outcome row length");
        for (std::size_t t = 0; t <= p.horizon; ++t) p.outcomes(n, t) = row[t];
    }
    for (std::size_t r = 0; r < p.horizon; ++r) {
        const auto row = w.at(r).get<std::vector<double>>();
        if (row.size() != p.n_units) throw io_error("panel json: treatment row length");
        for (std::size_t n = 0; n < p.n_units; ++n) p.treatments(r, n) = row[n];
    }
}

}  // namespace netfx
