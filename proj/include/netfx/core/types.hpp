#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/matrix.hpp"

namespace netfx {

/// Observed panel: outcomes are N x (T+1) with column t holding Y_t;
/// treatments are T x N where row r holds w(r+1), the assignment in force
/// while producing Y_{r+1}.
struct PanelData {
    Matrix<double> outcomes;
    Matrix<double> treatments;
    std::size_t n_units = 0;
    std::size_t horizon = 0;

    PanelData() = default;
    PanelData(std::size_t n, std::size_t t)
        : outcomes(n, t + 1), treatments(t, n), n_units(n), horizon(t) {}

    [[nodiscard]] double outcome(std::size_t unit, std::size_t t) const { return outcomes(unit, t); }
    [[nodiscard]] std::span<const double> outcomes_at(std::size_t t) const { return outcomes.column(t); }

    /// Assignment of `unit` during period `t` in [1, T].
    [[nodiscard]] double treatment(std::size_t t, std::size_t unit) const { return treatments(t - 1, unit); }

    bool operator==(const PanelData&) const = default;
};

enum class DesignMode { TwoStageStatic, StaggeredRollout, MicroRandomized };

/// Two-stage Bernoulli design: probability pi1 for periods 1..t1, pi2 for
/// t1+1..t1+t2. Override flags force every assignment to 0 or 1.
struct ExperimentDesign {
    double pi1 = 0.0;
    double pi2 = 0.0;
    std::size_t t1 = 1;
    std::size_t t2 = 1;
    DesignMode mode = DesignMode::TwoStageStatic;
    bool all_control_override = false;
    bool all_treated_override = false;

    [[nodiscard]] std::size_t horizon() const noexcept { return t1 + t2; }
    [[nodiscard]] bool overridden() const noexcept { return all_control_override || all_treated_override; }

    /// Treatment probability in force while producing Y_t, t in [1, T].
    [[nodiscard]] double probability_at(std::size_t t) const noexcept {
        if (all_treated_override) return 1.0;
        if (all_control_override) return 0.0;
        return t <= t1 ? pi1 : pi2;
    }

    [[nodiscard]] ExperimentDesign all_control() const {
        ExperimentDesign d = *this;
        d.all_control_override = true;
        d.all_treated_override = false;
        return d;
    }
    [[nodiscard]] ExperimentDesign all_treated() const {
        ExperimentDesign d = *this;
        d.all_treated_override = true;
        d.all_control_override = false;
        return d;
    }

    void validate() const {
        auto prob_ok = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
        if (!prob_ok(pi1) || !prob_ok(pi2)) throw config_error("design: probabilities must lie in [0,1]");
        if (t1 < 1 || t2 < 1) throw config_error("design: stage lengths must be positive");
        if (all_control_override && all_treated_override)
            throw config_error("design: both override flags set");
        if (!overridden() && pi1 == pi2) throw config_error("design: pi1 must differ from pi2");
        if (mode == DesignMode::StaggeredRollout && pi2 < pi1)
            throw config_error("design: staggered roll-out requires pi2 >= pi1");
    }

    bool operator==(const ExperimentDesign&) const = default;
};

/// How the redrawn time-varying interference term enters a simulation step.
enum class TimeVaryingSampling {
    /// Exact-in-distribution Gaussian projection, O(N) per run per step.
    Projected,
    /// Materialize every entry of B_t, O(N^2) per step.
    Dense,
};

/// Entries of A ~ N(mu/N, sigma^2/N); entries of B_t ~ N(mu_t/N, sigma_t^2/N).
struct InterferenceSpec {
    double mu = 1.0;
    double sigma = 0.0;
    double mu_t = 0.0;
    double sigma_t = 0.0;
    bool resample_time_varying = true;
    TimeVaryingSampling time_varying_sampling = TimeVaryingSampling::Projected;

    [[nodiscard]] double total_mean() const noexcept { return mu + mu_t; }
    [[nodiscard]] double total_variance() const noexcept { return sigma * sigma + sigma_t * sigma_t; }

    void validate() const {
        if (!std::isfinite(mu) || !std::isfinite(mu_t) || !std::isfinite(sigma) || !std::isfinite(sigma_t))
            throw config_error("interference: parameters must be finite");
        if (sigma < 0.0 || sigma_t < 0.0) throw config_error("interference: sigma and sigma_t must be >= 0");
    }

    bool operator==(const InterferenceSpec&) const = default;
};

struct NoiseSpec {
    double sigma_e = 0.0;

    void validate() const {
        if (!std::isfinite(sigma_e) || sigma_e < 0.0) throw config_error("noise: sigma_e must be finite and >= 0");
    }

    bool operator==(const NoiseSpec&) const = default;
};

/// Per-coefficient standard deviations of unit-level heterogeneity.
struct CoefficientSd {
    double delta = 0.0;
    double xi = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    double theta = 0.0;

    [[nodiscard]] bool homogeneous() const noexcept {
        return delta == 0.0 && xi == 0.0 && lambda == 0.0 && gamma == 0.0 && theta == 0.0;
    }
    bool operator==(const CoefficientSd&) const = default;
};

/// Population means of the linear outcome family
///   g(y, w) = Delta + Xi*y + Lambda*w + Gamma*y*w + theta,
/// with the covariate channel folded into the scalar theta_bar.
struct LinearOutcomeParams {
    double delta = 0.0;
    double xi = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    double theta_bar = 0.0;
    CoefficientSd unit_coef_sd{};

    [[nodiscard]] double baseline() const noexcept { return delta + theta_bar; }

    [[nodiscard]] double evaluate(double y, double w) const noexcept {
        return baseline() + xi * y + lambda * w + gamma * y * w;
    }

    void validate() const {
        for (double v : {delta, xi, lambda, gamma, theta_bar})
            if (!std::isfinite(v)) throw config_error("linear params: coefficients must be finite");
        const auto& s = unit_coef_sd;
        for (double v : {s.delta, s.xi, s.lambda, s.gamma, s.theta})
            if (!std::isfinite(v) || v < 0.0) throw config_error("linear params: unit sd must be finite and >= 0");
    }

    bool operator==(const LinearOutcomeParams&) const = default;
};

/// Mean and standard deviation of the Gaussian outcome limit at one time.
struct SEState {
    double nu = 0.0;
    double rho = 0.0;

    void validate() const {
        if (!std::isfinite(nu) || !std::isfinite(rho) || rho < 0.0)
            throw std::invalid_argument("SEState: nu and rho must be finite with rho >= 0");
    }

    bool operator==(const SEState&) const = default;
};

/// Per-time TTE estimate with optional interval and ground truth.
struct TTEReport {
    std::vector<double> estimate;
    std::optional<std::vector<double>> ci_low;
    std::optional<std::vector<double>> ci_high;
    std::optional<std::vector<double>> ground_truth;
    std::int64_t replication_id = 0;
    std::uint64_t seed = 0;

    bool operator==(const TTEReport&) const = default;
};

}  // namespace netfx
