#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/types.hpp"
#include "netfx/state_evolution/quadrature.hpp"

namespace netfx {

/// Outcome nonlinearity g_t(y, w_next). Baseline and covariate effects are
/// folded into the closure.
struct OutcomeFunction {
    std::function<double(double y, double w)> evaluator;
    /// Declared polynomial growth order (k/2).
    double growth_order = 1.0;
};

using OutcomeModel = std::variant<LinearOutcomeParams, OutcomeFunction>;

/// Homogeneous linear-family evaluator (unit heterogeneity is dropped).
[[nodiscard]] inline OutcomeFunction as_outcome_function(const LinearOutcomeParams& p) {
    return {[p](double y, double w) { return p.evaluate(y, w); }, 1.0};
}

enum class QuadratureMethod { GaussHermite, MonteCarlo };

struct QuadratureSpec {
    QuadratureMethod method = QuadratureMethod::GaussHermite;
    std::size_t nodes_or_draws = 64;
    std::optional<std::uint64_t> mc_seed;

    void validate() const {
        if (nodes_or_draws < 1) throw std::invalid_argument("quadrature: nodes_or_draws must be >= 1");
    }
};

namespace detail {

inline SEState finish_step(double mean_g, double mean_g2, const InterferenceSpec& interference,
                           const NoiseSpec& noise) {
    const double nu = interference.total_mean() * mean_g;
    double rho2 = interference.total_variance() * mean_g2 + noise.sigma_e * noise.sigma_e;
    if (!std::isfinite(nu) || !std::isfinite(rho2)) throw divergence_error("state evolution diverged");
    if (rho2 < -1e-12) throw divergence_error("state evolution produced negative variance");
    if (rho2 < 0.0) rho2 = 0.0;
    return {nu, std::sqrt(rho2)};
}

inline void check_step_inputs(const SEState& state, double treat_prob) {
    state.validate();
    if (!(treat_prob >= 0.0 && treat_prob <= 1.0))
        throw std::invalid_argument("state evolution: treatment probability must lie in [0,1]");
}

}  // namespace detail

/// One state-evolution step for the linear family, in closed form.
///
/// With Y = nu + rho*Z and W ~ Bernoulli(p) independent of Z, and unit
/// coefficients independent of both, write g = a + b*Y where a = Delta +
/// Theta + Lambda*W and b = Xi + Gamma*W. Then
///   E[g]   = (delta + theta) + xi*nu + p*(lambda + gamma*nu)
///   E[g^2] = sum_w P(w) * (E[a]^2 + Var a + 2 E[a] E[b] nu + (E[b]^2 + Var b)(nu^2 + rho^2))
/// and nu' = (mu + mu_t) E[g], rho'^2 = (sigma^2 + sigma_t^2) E[g^2] + sigma_e^2.
/// Var a and Var b vanish for homogeneous units.
[[nodiscard]] inline SEState se_step_linear(const SEState& state, const LinearOutcomeParams& params, double treat_prob,
                                            const InterferenceSpec& interference, const NoiseSpec& noise) {
    detail::check_step_inputs(state, treat_prob);
    const double nu = state.nu;
    const double second_moment = nu * nu + state.rho * state.rho;
    const auto& sd = params.unit_coef_sd;

    const double mean_g = params.baseline() + params.xi * nu + treat_prob * (params.lambda + params.gamma * nu);

    auto conditional_g2 = [&](double w) {
        const double ea = params.baseline() + params.lambda * w;
        const double va = sd.delta * sd.delta + sd.theta * sd.theta + w * sd.lambda * sd.lambda;
        const double eb = params.xi + params.gamma * w;
        const double vb = sd.xi * sd.xi + w * sd.gamma * sd.gamma;
        return ea * ea + va + 2.0 * ea * eb * nu + (eb * eb + vb) * second_moment;
    };
    const double mean_g2 = treat_prob * conditional_g2(1.0) + (1.0 - treat_prob) * conditional_g2(0.0);
    return detail::finish_step(mean_g, mean_g2, interference, noise);
}

/// One state-evolution step for an arbitrary outcome function. The Gaussian
/// expectation is discretized per `quad`; the Bernoulli treatment is
/// marginalized exactly as a two-point mixture.
[[nodiscard]] inline SEState se_step_general(const SEState& state, const OutcomeFunction& g, double treat_prob,
                                             const InterferenceSpec& interference, const NoiseSpec& noise,
                                             const QuadratureSpec& quad = {}) {
    detail::check_step_inputs(state, treat_prob);
    quad.validate();
    if (!g.evaluator) throw std::invalid_argument("se_step_general: empty outcome function");

    double mean_g = 0.0, mean_g2 = 0.0;
    auto accumulate = [&](double z, double weight) {
        const double y = state.nu + state.rho * z;
        if (treat_prob < 1.0) {
            const double v = g.evaluator(y, 0.0);
            mean_g += weight * (1.0 - treat_prob) * v;
            mean_g2 += weight * (1.0 - treat_prob) * v * v;
        }
        if (treat_prob > 0.0) {
            const double v = g.evaluator(y, 1.0);
            mean_g += weight * treat_prob * v;
            mean_g2 += weight * treat_prob * v * v;
        }
    };

    if (quad.method == QuadratureMethod::GaussHermite) {
        if (static_cast<double>(quad.nodes_or_draws) < g.growth_order + 1.0)
            throw std::invalid_argument("se_step_general: too few Gauss-Hermite nodes for declared growth order");
        const auto& rule = gauss_hermite(quad.nodes_or_draws);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) accumulate(rule.nodes[i], rule.weights[i]);
    } else {
        Rng rng = spawn_stream(quad.mc_seed.value_or(0), "state-evolution/monte-carlo");
        const double weight = 1.0 / static_cast<double>(quad.nodes_or_draws);
        for (std::size_t i = 0; i < quad.nodes_or_draws; ++i) accumulate(rng.normal(), weight);
    }
    return detail::finish_step(mean_g, mean_g2, interference, noise);
}

[[nodiscard]] inline SEState se_step(const SEState& state, const OutcomeModel& model, double treat_prob,
                                     const InterferenceSpec& interference, const NoiseSpec& noise,
                                     const QuadratureSpec& quad = {}) {
    if (const auto* lin = std::get_if<LinearOutcomeParams>(&model))
        return se_step_linear(state, *lin, treat_prob, interference, noise);
    return se_step_general(state, std::get<OutcomeFunction>(model), treat_prob, interference, noise, quad);
}

/// Iterates the recursion with an explicit probability per period:
/// result[t+1] = step(result[t], probabilities[t]).
[[nodiscard]] inline std::vector<SEState> se_trajectory(const SEState& init, std::span<const double> probabilities,
                                                        const OutcomeModel& model,
                                                        const InterferenceSpec& interference, const NoiseSpec& noise,
                                                        const QuadratureSpec& quad = {}) {
    std::vector<SEState> out;
    out.reserve(probabilities.size() + 1);
    out.push_back(init);
    for (std::size_t t = 0; t < probabilities.size(); ++t) {
        try {
            out.push_back(se_step(out.back(), model, probabilities[t], interference, noise, quad));
        } catch (const divergence_error& e) {
            throw divergence_error(e.what(), static_cast<long>(t + 1));
        }
    }
    return out;
}

/// Per-period treatment probabilities implied by a design (index t-1 -> period t).
[[nodiscard]] inline std::vector<double> design_probabilities(const ExperimentDesign& design) {
    std::vector<double> p(design.horizon());
    for (std::size_t t = 1; t <= design.horizon(); ++t) p[t - 1] = design.probability_at(t);
    return p;
}

/// State evolution over a two-stage design (pi1 for t < T1, pi2 after;
/// overrides force 0 or 1). Length T+1 with index 0 = init.
[[nodiscard]] inline std::vector<SEState> se_trajectory(const SEState& init, const ExperimentDesign& design,
                                                        const OutcomeModel& model,
                                                        const InterferenceSpec& interference, const NoiseSpec& noise,
                                                        const QuadratureSpec& quad = {}) {
    design.validate();
    const auto probs = design_probabilities(design);
    return se_trajectory(init, std::span<const double>(probs), model, interference, noise, quad);
}

/// Sample mean and population-normalized standard deviation per time.
[[nodiscard]] inline std::vector<SEState> empirical_moments(const PanelData& panel) {
    if (panel.n_units < 2) throw std::invalid_argument("empirical_moments: need at least two units");
    std::vector<SEState> out(panel.horizon + 1);
    const double inv_n = 1.0 / static_cast<double>(panel.n_units);
    for (std::size_t t = 0; t <= panel.horizon; ++t) {
        const auto col = panel.outcomes_at(t);
        double sum = 0.0;
        for (double v : col) sum += v;
        const double mean = sum * inv_n;
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        out[t] = {mean, std::sqrt(ss * inv_n)};
    }
    return out;
}

}  // namespace netfx
