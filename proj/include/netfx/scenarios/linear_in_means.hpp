#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/twins.hpp"
#include "netfx/core/types.hpp"
#include "netfx/scenarios/graph.hpp"

namespace netfx {

/// Y_i' = alpha + beta * nbr_mean(Y) + delta * nbr_mean(w) + gamma * w_i + eps_i
struct LiMParams {
    double alpha = -1.0;
    double beta = 0.8;
    double delta = 1.0;
    double gamma = 1.0;
    double kappa = 8.0;

    void validate() const {
        for (double v : {alpha, beta, delta, gamma, kappa})
            if (!std::isfinite(v)) throw config_error("linear-in-means: parameters must be finite");
        if (!(kappa > 0.0)) throw config_error("linear-in-means: kappa must be positive");
    }

    /// Fixed-point contrast between all-treated and all-control.
    [[nodiscard]] double equilibrium_tte() const { return (gamma + delta) / (1.0 - beta); }
};

enum class LiMNoise {
    /// x-coordinate of the vertex minus 0.5, plus N(0, sd^2).
    Homophily,
    /// N(0, sd^2) only.
    Gaussian,
};

struct LiMConfig {
    LiMParams params{};
    ExperimentDesign design{.pi1 = 0.2, .pi2 = 0.5, .t1 = 30, .t2 = 30, .mode = DesignMode::StaggeredRollout};
    LiMNoise noise = LiMNoise::Homophily;
    double noise_sd = 1.0;
    /// Redraw the Gaussian shock every period (else one draw per unit).
    bool noise_redraw = true;
    std::size_t burn_in = 10;

    void validate(const Graph& g) const {
        params.validate();
        design.validate();
        if (!std::isfinite(noise_sd) || noise_sd < 0.0) throw config_error("linear-in-means: noise_sd must be >= 0");
        if (noise == LiMNoise::Homophily && !g.positions)
            throw config_error("linear-in-means: homophily noise needs vertex positions");
        if (g.n_vertices() < 1) throw config_error("linear-in-means: empty graph");
    }
};

/// K coupled runs on one graph sharing y0 and every noise draw. Initial
/// outcomes are N(0,1); burn-in runs under control. Degree-0 vertices get
/// zero neighborhood terms.
[[nodiscard]] inline std::vector<PanelData> simulate_linear_in_means_coupled(
    const Graph& graph, const LiMConfig& cfg, std::span<const Matrix<double>> assignments,
    const StreamFactory& streams) {
    cfg.validate(graph);
    const std::size_t n = graph.n_vertices();
    const std::size_t horizon = cfg.design.horizon();
    for (const auto& w : assignments)
        if (w.rows() != horizon || w.cols() != n)
            throw std::invalid_argument("linear-in-means: assignment must be T x N");
    const auto& p = cfg.params;

    std::vector<double> y0(n);
    {
        Rng rng = streams.spawn("y0");
        for (auto& v : y0) v = rng.normal();
    }
    std::vector<double> shift(n, 0.0);
    if (cfg.noise == LiMNoise::Homophily)
        for (std::size_t i = 0; i < n; ++i) shift[i] = (*graph.positions)[i].first - 0.5;
    std::vector<double> eps(n);
    auto draw_eps = [&](const std::string& label) {
        Rng rng = streams.spawn(label);
        for (std::size_t i = 0; i < n; ++i) eps[i] = shift[i] + cfg.noise_sd * rng.normal();
    };
    if (!cfg.noise_redraw) draw_eps("noise");

    std::vector<double> inv_deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (graph.degree(i) > 0) inv_deg[i] = 1.0 / static_cast<double>(graph.degree(i));

    const std::size_t runs = assignments.size();
    std::vector<PanelData> panels(runs, PanelData(n, horizon));
    std::vector<std::vector<double>> state(runs, y0);
    std::vector<double> next(n);
    const std::size_t steps = cfg.burn_in + horizon;
    if (cfg.burn_in == 0)
        for (auto& panel : panels) std::copy(y0.begin(), y0.end(), panel.outcomes.column(0).begin());

    for (std::size_t s = 0; s < steps; ++s) {
        const long t_out = static_cast<long>(s) - static_cast<long>(cfg.burn_in) + 1;
        if (cfg.noise_redraw) draw_eps("noise/s=" + std::to_string(s));
        for (std::size_t k = 0; k < runs; ++k) {
            const auto& y = state[k];
            const double* w = nullptr;
            std::vector<double> wrow;
            if (t_out >= 1) {
                wrow = assignments[k].row(static_cast<std::size_t>(t_out - 1));
                w = wrow.data();
            }
            for (std::size_t i = 0; i < n; ++i) {
                double sy = 0.0, sw = 0.0;
                for (auto j : graph.neighbors(i)) {
                    sy += y[j];
                    if (w) sw += w[j];
                }
                const double wi = w ? w[i] : 0.0;
                next[i] = p.alpha + p.beta * sy * inv_deg[i] + p.delta * sw * inv_deg[i] + p.gamma * wi + eps[i];
                if (!std::isfinite(next[i]) || std::abs(next[i]) > 1e12)
                    throw divergence_error("linear-in-means outcomes diverged", t_out);
            }
            state[k] = next;
            if (t_out >= 0)
                std::copy(next.begin(), next.end(), panels[k].outcomes.column(static_cast<std::size_t>(t_out)).begin());
        }
    }
    for (std::size_t k = 0; k < runs; ++k) panels[k].treatments = assignments[k];
    return panels;
}

[[nodiscard]] inline PanelData simulate_linear_in_means(const Graph& graph, const LiMConfig& cfg,
                                                        const StreamFactory& streams) {
    return simulate_observed_with(cfg.design, graph.n_vertices(), streams, [&](std::span<const Matrix<double>> w) {
        return simulate_linear_in_means_coupled(graph, cfg, w, streams);
    });
}

[[nodiscard]] inline CounterfactualPair scenario_counterfactual_pair(const Graph& graph, const LiMConfig& cfg,
                                                                     const StreamFactory& streams) {
    return counterfactual_pair_with(cfg.design, graph.n_vertices(), [&](std::span<const Matrix<double>> w) {
        return simulate_linear_in_means_coupled(graph, cfg, w, streams);
    });
}

[[nodiscard]] inline TwinSimulation simulate_with_twins(const Graph& graph, const LiMConfig& cfg,
                                                        const StreamFactory& streams) {
    return simulate_twins_with(cfg.design, graph.n_vertices(), streams, [&](std::span<const Matrix<double>> w) {
        return simulate_linear_in_means_coupled(graph, cfg, w, streams);
    });
}

}  // namespace netfx
