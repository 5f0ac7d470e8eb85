#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/summary.hpp"
#include "netfx/core/types.hpp"

namespace netfx {

/// Treatment-channel parameters recovered from the two stage regressions.
struct RecoveredParams {
    double xi_hat = 0.0;
    double gamma_hat = 0.0;
    double lambda_hat = 0.0;
    double b1 = 0.0;
    double a1 = 0.0;
    double b2 = 0.0;
    double a2 = 0.0;

    bool operator==(const RecoveredParams&) const = default;
};

struct ClampBounds {
    std::optional<double> low;
    std::optional<double> high;

    void validate() const {
        if ((low && std::isnan(*low)) || (high && std::isnan(*high))) throw config_error("clamp: bounds must not be NaN");
        if (low && high && *low > *high) throw config_error("clamp: low must not exceed high");
    }

    [[nodiscard]] bool bounded() const noexcept { return low.has_value() && high.has_value(); }

    [[nodiscard]] double apply(double v) const noexcept {
        if (low && v < *low) v = *low;
        if (high && v > *high) v = *high;
        return v;
    }

    bool operator==(const ClampBounds&) const = default;
};

struct EstimatorOptions {
    ClampBounds clamp{};
    /// Also clamp the counterfactual mean recursion.
    bool clamp_counterfactual = false;
};

struct LagFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// OLS of means[t+1] on means[t] for t in [first, last).
[[nodiscard]] inline LagFit fit_lag1_ols(std::span<const double> means, std::size_t first, std::size_t last) {
    if (last <= first || last - first < 2) throw singular_fit_error("lag-1 fit needs at least two pairs");
    if (last >= means.size()) throw std::invalid_argument("lag-1 fit: range exceeds the series");
    const auto k = static_cast<double>(last - first);
    double mx = 0.0, my = 0.0, scale = 0.0;
    for (std::size_t t = first; t < last; ++t) {
        mx += means[t];
        my += means[t + 1];
        scale = std::max(scale, std::abs(means[t]));
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = first; t < last; ++t) {
        const double dx = means[t] - mx;
        sxx += dx * dx;
        sxy += dx * (means[t + 1] - my);
    }
    const double tiny = 16.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
    if (!(sxx > k * tiny * tiny)) throw singular_fit_error("lag-1 fit: predictor has no variance");
    const double b = sxy / sxx;
    return {b, my - b * mx};
}

[[nodiscard]] inline RecoveredParams recover_params(double b1, double a1, double b2, double a2, double pi1, double pi2) {
    if (pi1 == pi2) throw identifiability_error("pi1 equals pi2: treatment channels are not identifiable");
    const double dp = pi2 - pi1;
    RecoveredParams r{.b1 = b1, .a1 = a1, .b2 = b2, .a2 = a2};
    r.xi_hat = 0.5 * (b2 + b1 - (b2 - b1) * (pi2 + pi1) / dp);
    r.gamma_hat = (b2 - b1) / dp;
    r.lambda_hat = (a2 - a1) / dp;
    return r;
}

/// Full output of the trajectory estimator.
struct TrajectoryFit {
    RecoveredParams params;
    std::vector<double> means;
    /// Estimated all-treated mean trajectory.
    std::vector<double> treated_means;
    std::vector<double> tte;
};

[[nodiscard]] inline TrajectoryFit estimate_tte_from_means(std::span<const double> means,
                                                           const ExperimentDesign& design,
                                                           const EstimatorOptions& options = {}) {
    options.clamp.validate();
    const std::size_t t1 = design.t1, horizon = design.horizon();
    if (design.t1 < 2 || design.t2 < 2) throw config_error("estimator: each stage needs at least two periods");
    if (means.size() != horizon + 1) throw std::invalid_argument("estimator: means must have length T+1");
    if (design.pi1 == design.pi2) throw identifiability_error("pi1 equals pi2: treatment channels are not identifiable");

    const auto s1 = fit_lag1_ols(means, 0, t1);
    const auto s2 = fit_lag1_ols(means, t1, horizon);
    TrajectoryFit fit;
    fit.params = recover_params(s1.slope, s1.intercept, s2.slope, s2.intercept, design.pi1, design.pi2);
    fit.means.assign(means.begin(), means.end());
    const auto& p = fit.params;

    fit.treated_means.assign(horizon + 1, 0.0);
    fit.tte.assign(horizon + 1, 0.0);
    fit.treated_means[0] = means[0];
    for (std::size_t t = 0; t < horizon; ++t) {
        const double pi = t + 1 <= t1 ? design.pi1 : design.pi2;
        const double nu1 = fit.treated_means[t];
        double next = means[t + 1] + p.xi_hat * (nu1 - means[t]) + p.lambda_hat * (1.0 - pi) +
                      p.gamma_hat * (nu1 - pi * means[t]);
        double tte = p.xi_hat * fit.tte[t] + p.lambda_hat + p.gamma_hat * nu1;
        if (!options.clamp.bounded() && (!std::isfinite(tte) || std::abs(tte) > 1e12))
            throw divergence_error("estimator: TTE recursion diverged", static_cast<long>(t + 1));
        if (!std::isfinite(next))
            throw divergence_error("estimator: counterfactual mean diverged", static_cast<long>(t + 1));
        if (options.clamp_counterfactual) next = options.clamp.apply(next);
        fit.treated_means[t + 1] = next;
        fit.tte[t + 1] = options.clamp.apply(tte);
    }
    return fit;
}

[[nodiscard]] inline TTEReport estimate_tte_trajectory(const PanelData& panel, const ExperimentDesign& design,
                                                       const EstimatorOptions& options = {}) {
    if (panel.horizon != design.horizon()) throw std::invalid_argument("estimator: panel horizon differs from design");
    TTEReport r;
    r.estimate = estimate_tte_from_means(sample_means(panel), design, options).tte;
    return r;
}

[[nodiscard]] inline TTEReport estimate_tte_trajectory(const PanelData& panel, const ExperimentDesign& design,
                                                       const ClampBounds& clamp) {
    return estimate_tte_trajectory(panel, design, EstimatorOptions{.clamp = clamp});
}

/// Difference of stage means scaled by the probability gap.
[[nodiscard]] inline double tte_equilibrium(double mean_pi1, double mean_pi2, double pi1, double pi2) {
    if (pi1 == pi2) throw identifiability_error("equilibrium estimator: pi1 equals pi2");
    return (mean_pi2 - mean_pi1) / (pi2 - pi1);
}

/// Asymptotic bias of the equilibrium estimator; exactly 0 without the
/// interaction channel.
[[nodiscard]] inline double equilibrium_bias(double xi, double gamma, double pi1, double pi2, double mean_pi1,
                                             double mean_pi2, double mean_all1) {
    if (pi1 == pi2) throw identifiability_error("equilibrium bias: pi1 equals pi2");
    if (gamma == 0.0) return 0.0;
    if (xi == 1.0) throw divergence_error("equilibrium bias: pole at xi = 1");
    return gamma / (1.0 - xi) * ((pi2 * mean_pi2 - pi1 * mean_pi1) / (pi2 - pi1) - mean_all1);
}

}  // namespace netfx
