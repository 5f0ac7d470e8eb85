#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "netfx/core/error.hpp"
#include "netfx/core/io.hpp"
#include "netfx/core/types.hpp"
#include "netfx/estimation/estimation.hpp"
#include "netfx/inference/resample.hpp"
#include "netfx/scenarios/binary_mrt.hpp"
#include "netfx/scenarios/jsq_queue.hpp"
#include "netfx/scenarios/linear_in_means.hpp"

namespace netfx {

enum class Scenario { GaussianLinear, LinearInMeans, BinaryMRT, JsqQueue, FileGraphLiM };

NLOHMANN_JSON_SERIALIZE_ENUM(Scenario, {{Scenario::GaussianLinear, "gaussian_linear"},
                                        {Scenario::LinearInMeans, "linear_in_means"},
                                        {Scenario::BinaryMRT, "binary_mrt"},
                                        {Scenario::JsqQueue, "jsq_queue"},
                                        {Scenario::FileGraphLiM, "file_graph_lim"}})

NLOHMANN_JSON_SERIALIZE_ENUM(InterferenceLevel, {{InterferenceLevel::Low, "low"},
                                                 {InterferenceLevel::Moderate, "moderate"},
                                                 {InterferenceLevel::High, "high"}})

NLOHMANN_JSON_SERIALIZE_ENUM(LiMNoise, {{LiMNoise::Homophily, "homophily"}, {LiMNoise::Gaussian, "gaussian"}})

inline constexpr std::size_t kDefaultReplications = 200;
inline constexpr std::size_t kPaperReplications = 5000;

struct GaussianBlock {
    LinearOutcomeParams params{.delta = 0.0, .xi = 0.5, .lambda = 1.0, .gamma = 0.2};
    InterferenceSpec interference{.mu = 1.0, .sigma = 0.35355339059327373, .mu_t = 0.0, .sigma_t = 0.35355339059327373};
    NoiseSpec noise{.sigma_e = 0.3};
};

/// Resolved experiment description. Scenario-dependent defaults (design,
/// clamp, interference level) are filled in when parsed.
struct ExperimentConfig {
    Scenario scenario = Scenario::LinearInMeans;
    std::size_t n_units = 2000;
    ExperimentDesign design{};
    std::size_t burn_in = 10;
    std::size_t replications = kDefaultReplications;
    std::uint64_t master_seed = 1;
    EstimatorOptions estimator{};

    bool ci = true;
    /// Absent: default_q(N, interference_level).
    std::optional<double> q;
    std::size_t b_samples = 500;
    double level = 0.95;
    bool ci_percentile = false;
    InterferenceLevel interference_level = InterferenceLevel::Moderate;

    std::string output_dir;

    GaussianBlock gaussian{};
    LiMParams lim{};
    LiMNoise lim_noise = LiMNoise::Homophily;
    double noise_sd = 1.0;
    bool noise_redraw = true;
    /// MRT edge probability; absent means 3/N.
    MRTParams mrt{};
    std::optional<double> p_edge;
    QueueParams queue{};
    std::size_t max_jobs = 1'000'000;
    std::string graph_path;

    [[nodiscard]] bool has_graph() const noexcept {
        return scenario == Scenario::LinearInMeans || scenario == Scenario::BinaryMRT ||
               scenario == Scenario::FileGraphLiM;
    }

    [[nodiscard]] ResampleSpec resample_spec(std::size_t n) const {
        return {.q = q.value_or(default_q(n, interference_level)),
                .b_samples = b_samples,
                .level = level,
                .percentile = ci_percentile};
    }

    /// Checks everything that does not need the graph file.
    void validate() const {
        if (replications < 1) throw config_error("replications must be >= 1");
        design.validate();
        estimator.clamp.validate();
        if (design.t1 < 2 || design.t2 < 2) throw config_error("t1 and t2 must be >= 2");
        if (scenario != Scenario::FileGraphLiM && n_units < 2) throw config_error("n_units must be >= 2");
        if (scenario == Scenario::FileGraphLiM && graph_path.empty())
            throw config_error("file_graph_lim needs graph_path");
        if (ci) {
            ResampleSpec s = resample_spec(n_units);
            s.validate();
            if (scenario != Scenario::FileGraphLiM && s.q * static_cast<double>(n_units) < 10.0)
                throw config_error("q * n_units must be >= 10");
        }
        switch (scenario) {
            case Scenario::GaussianLinear:
                gaussian.params.validate();
                gaussian.interference.validate();
                gaussian.noise.validate();
                break;
            case Scenario::LinearInMeans:
            case Scenario::FileGraphLiM:
                lim.validate();
                if (!std::isfinite(noise_sd) || noise_sd < 0.0) throw config_error("noise_sd must be >= 0");
                if (scenario == Scenario::FileGraphLiM && lim_noise == LiMNoise::Homophily)
                    throw config_error("file graphs have no positions; use lim_noise = gaussian");
                break;
            case Scenario::BinaryMRT:
                mrt.validate();
                if (p_edge && !(*p_edge >= 0.0 && *p_edge <= 1.0)) throw config_error("p_edge must lie in [0,1]");
                break;
            case Scenario::JsqQueue:
                queue.validate();
                break;
        }
    }
};

/// Scenario defaults before any key is applied.
[[nodiscard]] inline ExperimentConfig default_config(Scenario s) {
    ExperimentConfig c;
    c.scenario = s;
    switch (s) {
        case Scenario::GaussianLinear:
            c.design = {.pi1 = 0.2, .pi2 = 0.5, .t1 = 10, .t2 = 10, .mode = DesignMode::TwoStageStatic};
            c.burn_in = 0;
            break;
        case Scenario::LinearInMeans:
            c.design = LiMConfig{}.design;
            c.estimator.clamp = {-100.0, 100.0};
            break;
        case Scenario::FileGraphLiM:
            c.design = LiMConfig{}.design;
            c.estimator.clamp = {-100.0, 100.0};
            c.lim_noise = LiMNoise::Gaussian;
            c.q = 0.15;
            break;
        case Scenario::BinaryMRT:
            c.design = MRTConfig{}.design;
            c.estimator.clamp = {-1.0, 1.0};
            c.interference_level = InterferenceLevel::Low;
            break;
        case Scenario::JsqQueue:
            c.design = QueueConfig{}.design;
            c.estimator.clamp = {-1.0, 0.0};
            c.interference_level = InterferenceLevel::High;
            break;
    }
    return c;
}

namespace detail {

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{
        "scenario", "n_units", "t1", "t2", "pi1", "pi2", "design_mode", "burn_in", "replications", "master_seed",
        "clamp_low", "clamp_high", "clamp_counterfactual", "ci", "q", "b_samples", "level", "ci_percentile",
        "interference_level", "output_dir",
        "delta", "xi", "lambda", "gamma", "theta_bar", "sd_delta", "sd_xi", "sd_lambda", "sd_gamma", "sd_theta",
        "mu", "sigma", "mu_t", "sigma_t", "resample_time_varying", "time_varying_sampling", "sigma_e",
        "lim_alpha", "lim_beta", "lim_delta", "lim_gamma", "kappa", "lim_noise", "noise_sd", "noise_redraw",
        "mrt_alpha", "mrt_beta", "mrt_gamma", "mrt_delta", "p_edge",
        "arrival_rate_factor", "base_service_rate", "treated_service_rate", "max_jobs", "graph_path"};
    return keys;
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    T v{};
    read_key(j, key, v);
    out = v;
}

inline void read_count(const nlohmann::json& j, const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw config_error(std::string("config key '") + key + "' must be a non-negative integer");
    out = v.get<std::size_t>();
}

template <class E>
void read_enum(const nlohmann::json& j, const char* key, E& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    const E parsed = v.get<E>();
    // nlohmann maps unknown strings to the first enumerator; reject those.
    if (nlohmann::json(parsed) != v) throw config_error(std::string("config key '") + key + "': unknown value " + v.dump());
    out = parsed;
}

}  // namespace detail

/// Parses a flat JSON object. Unknown keys are rejected; absent keys take
/// the scenario default; null clears an optional (e.g. an unbounded clamp).
[[nodiscard]] inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using namespace detail;
    if (!j.is_object()) throw config_error("config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!config_keys().count(k)) throw config_error("unknown config key '" + k + "'");

    Scenario s = Scenario::LinearInMeans;
    read_enum(j, "scenario", s);
    ExperimentConfig c = default_config(s);

    read_count(j, "n_units", c.n_units);
    read_count(j, "t1", c.design.t1);
    read_count(j, "t2", c.design.t2);
    read_key(j, "pi1", c.design.pi1);
    read_key(j, "pi2", c.design.pi2);
    read_enum(j, "design_mode", c.design.mode);
    read_count(j, "burn_in", c.burn_in);
    read_count(j, "replications", c.replications);
    if (j.contains("master_seed")) {
        const auto& v = j.at("master_seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw config_error("config key 'master_seed' must be a non-negative integer");
        c.master_seed = v.get<std::uint64_t>();
    }
    read_optional(j, "clamp_low", c.estimator.clamp.low);
    read_optional(j, "clamp_high", c.estimator.clamp.high);
    read_key(j, "clamp_counterfactual", c.estimator.clamp_counterfactual);

    read_key(j, "ci", c.ci);
    read_optional(j, "q", c.q);
    read_count(j, "b_samples", c.b_samples);
    read_key(j, "level", c.level);
    read_key(j, "ci_percentile", c.ci_percentile);
    read_enum(j, "interference_level", c.interference_level);
    read_key(j, "output_dir", c.output_dir);

    auto& g = c.gaussian;
    read_key(j, "delta", g.params.delta);
    read_key(j, "xi", g.params.xi);
    read_key(j, "lambda", g.params.lambda);
    read_key(j, "gamma", g.params.gamma);
    read_key(j, "theta_bar", g.params.theta_bar);
    read_key(j, "sd_delta", g.params.unit_coef_sd.delta);
    read_key(j, "sd_xi", g.params.unit_coef_sd.xi);
    read_key(j, "sd_lambda", g.params.unit_coef_sd.lambda);
    read_key(j, "sd_gamma", g.params.unit_coef_sd.gamma);
    read_key(j, "sd_theta", g.params.unit_coef_sd.theta);
    read_key(j, "mu", g.interference.mu);
    read_key(j, "sigma", g.interference.sigma);
    read_key(j, "mu_t", g.interference.mu_t);
    read_key(j, "sigma_t", g.interference.sigma_t);
    read_key(j, "resample_time_varying", g.interference.resample_time_varying);
    read_enum(j, "time_varying_sampling", g.interference.time_varying_sampling);
    read_key(j, "sigma_e", g.noise.sigma_e);

    read_key(j, "lim_alpha", c.lim.alpha);
    read_key(j, "lim_beta", c.lim.beta);
    read_key(j, "lim_delta", c.lim.delta);
    read_key(j, "lim_gamma", c.lim.gamma);
    read_key(j, "kappa", c.lim.kappa);
    read_enum(j, "lim_noise", c.lim_noise);
    read_key(j, "noise_sd", c.noise_sd);
    read_key(j, "noise_redraw", c.noise_redraw);

    read_key(j, "mrt_alpha", c.mrt.alpha);
    read_key(j, "mrt_beta", c.mrt.beta);
    read_key(j, "mrt_gamma", c.mrt.gamma);
    read_key(j, "mrt_delta", c.mrt.delta);
    read_optional(j, "p_edge", c.p_edge);

    read_key(j, "arrival_rate_factor", c.queue.arrival_rate_factor);
    read_key(j, "base_service_rate", c.queue.base_service_rate);
    read_key(j, "treated_service_rate", c.queue.treated_service_rate);
    read_count(j, "max_jobs", c.max_jobs);
    read_key(j, "graph_path", c.graph_path);
    return c;
}

/// Every key, fully resolved; config_from_json(config_to_json(c)) == c.
[[nodiscard]] inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    const auto& g = c.gaussian;
    return {
        {"scenario", c.scenario},
        {"n_units", c.n_units},
        {"t1", c.design.t1},
        {"t2", c.design.t2},
        {"pi1", c.design.pi1},
        {"pi2", c.design.pi2},
        {"design_mode", c.design.mode},
        {"burn_in", c.burn_in},
        {"replications", c.replications},
        {"master_seed", c.master_seed},
        {"clamp_low", opt(c.estimator.clamp.low)},
        {"clamp_high", opt(c.estimator.clamp.high)},
        {"clamp_counterfactual", c.estimator.clamp_counterfactual},
        {"ci", c.ci},
        {"q", opt(c.q)},
        {"b_samples", c.b_samples},
        {"level", c.level},
        {"ci_percentile", c.ci_percentile},
        {"interference_level", c.interference_level},
        {"output_dir", c.output_dir},
        {"delta", g.params.delta},
        {"xi", g.params.xi},
        {"lambda", g.params.lambda},
        {"gamma", g.params.gamma},
        {"theta_bar", g.params.theta_bar},
        {"sd_delta", g.params.unit_coef_sd.delta},
        {"sd_xi", g.params.unit_coef_sd.xi},
        {"sd_lambda", g.params.unit_coef_sd.lambda},
        {"sd_gamma", g.params.unit_coef_sd.gamma},
        {"sd_theta", g.params.unit_coef_sd.theta},
        {"mu", g.interference.mu},
        {"sigma", g.interference.sigma},
        {"mu_t", g.interference.mu_t},
        {"sigma_t", g.interference.sigma_t},
        {"resample_time_varying", g.interference.resample_time_varying},
        {"time_varying_sampling", g.interference.time_varying_sampling},
        {"sigma_e", g.noise.sigma_e},
        {"lim_alpha", c.lim.alpha},
        {"lim_beta", c.lim.beta},
        {"lim_delta", c.lim.delta},
        {"lim_gamma", c.lim.gamma},
        {"kappa", c.lim.kappa},
        {"lim_noise", c.lim_noise},
        {"noise_sd", c.noise_sd},
        {"noise_redraw", c.noise_redraw},
        {"mrt_alpha", c.mrt.alpha},
        {"mrt_beta", c.mrt.beta},
        {"mrt_gamma", c.mrt.gamma},
        {"mrt_delta", c.mrt.delta},
        {"p_edge", opt(c.p_edge)},
        {"arrival_rate_factor", c.queue.arrival_rate_factor},
        {"base_service_rate", c.queue.base_service_rate},
        {"treated_service_rate", c.queue.treated_service_rate},
        {"max_jobs", c.max_jobs},
        {"graph_path", c.graph_path},
    };
}

[[nodiscard]] inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config: " + path);
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config " + path + " is not valid JSON: " + e.what());
    }
}

/// Applies a command-line override: the value is read as a JSON literal when
/// it parses as one, else as a string.
inline void apply_override(nlohmann::json& j, const std::string& key, const std::string& value) {
    if (!detail::config_keys().count(key)) throw config_error("unknown config key '" + key + "'");
    try {
        j[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        j[key] = value;
    }
}

}  // namespace netfx
