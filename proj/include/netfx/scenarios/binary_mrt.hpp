#pragma once

#include <algorithm>
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

/// Y_i' ~ Bernoulli(alpha + beta w_i Z_i + gamma Y_i Z_i + delta w_i Y_i Z_i),
/// Z_i = number of neighbors with outcome 1.
struct MRTParams {
    double alpha = 0.5;
    double beta = 0.04;
    double gamma = 0.04;
    double delta = 0.01;
    double p_edge = 0.0;

    void validate() const {
        for (double v : {alpha, beta, gamma, delta, p_edge})
            if (!std::isfinite(v)) throw config_error("binary mrt: parameters must be finite");
        if (p_edge < 0.0 || p_edge > 1.0) throw config_error("binary mrt: p_edge must lie in [0,1]");
    }

    [[nodiscard]] double success_probability(double y, double w, double z) const {
        return std::clamp(alpha + beta * w * z + gamma * y * z + delta * w * y * z, 0.0, 1.0);
    }
};

struct MRTConfig {
    MRTParams params{};
    ExperimentDesign design{.pi1 = 0.25, .pi2 = 0.75, .t1 = 30, .t2 = 30, .mode = DesignMode::MicroRandomized};
    std::size_t burn_in = 10;

    void validate() const {
        params.validate();
        design.validate();
    }
};

/// K coupled runs sharing the per-period uniforms: Y_i' = 1 iff U_i < p_i.
/// Initial outcomes are Bernoulli(clamp(alpha)); burn-in runs under control.
[[nodiscard]] inline std::vector<PanelData> simulate_binary_mrt_coupled(const Graph& graph, const MRTConfig& cfg,
                                                                        std::span<const Matrix<double>> assignments,
                                                                        const StreamFactory& streams) {
    cfg.validate();
    const std::size_t n = graph.n_vertices();
    const std::size_t horizon = cfg.design.horizon();
    for (const auto& w : assignments)
        if (w.rows() != horizon || w.cols() != n) throw std::invalid_argument("binary mrt: assignment must be T x N");
    const auto& p = cfg.params;

    std::vector<double> u(n);
    auto draw_uniforms = [&](const std::string& label) {
        Rng rng = streams.spawn(label);
        for (auto& v : u) v = rng.uniform();
    };
    draw_uniforms("y0");
    const double p0 = std::clamp(p.alpha, 0.0, 1.0);
    std::vector<double> y0(n);
    for (std::size_t i = 0; i < n; ++i) y0[i] = u[i] < p0 ? 1.0 : 0.0;

    const std::size_t runs = assignments.size();
    std::vector<PanelData> panels(runs, PanelData(n, horizon));
    std::vector<std::vector<double>> state(runs, y0);
    std::vector<double> next(n);
    if (cfg.burn_in == 0)
        for (auto& panel : panels) std::copy(y0.begin(), y0.end(), panel.outcomes.column(0).begin());

    const std::size_t steps = cfg.burn_in + horizon;
    for (std::size_t s = 0; s < steps; ++s) {
        const long t_out = static_cast<long>(s) - static_cast<long>(cfg.burn_in) + 1;
        draw_uniforms("uniform/s=" + std::to_string(s));
        for (std::size_t k = 0; k < runs; ++k) {
            const auto& y = state[k];
            for (std::size_t i = 0; i < n; ++i) {
                double z = 0.0;
                for (auto j : graph.neighbors(i)) z += y[j];
                const double w = t_out >= 1 ? assignments[k](static_cast<std::size_t>(t_out - 1), i) : 0.0;
                next[i] = u[i] < p.success_probability(y[i], w, z) ? 1.0 : 0.0;
            }
            state[k] = next;
            if (t_out >= 0)
                std::copy(next.begin(), next.end(), panels[k].outcomes.column(static_cast<std::size_t>(t_out)).begin());
        }
    }
    for (std::size_t k = 0; k < runs; ++k) panels[k].treatments = assignments[k];
    return panels;
}

[[nodiscard]] inline PanelData simulate_binary_mrt(const Graph& graph, const MRTConfig& cfg,
                                                   const StreamFactory& streams) {
    return simulate_observed_with(cfg.design, graph.n_vertices(), streams, [&](std::span<const Matrix<double>> w) {
        return simulate_binary_mrt_coupled(graph, cfg, w, streams);
    });
}

[[nodiscard]] inline CounterfactualPair scenario_counterfactual_pair(const Graph& graph, const MRTConfig& cfg,
                                                                     const StreamFactory& streams) {
    return counterfactual_pair_with(cfg.design, graph.n_vertices(), [&](std::span<const Matrix<double>> w) {
        return simulate_binary_mrt_coupled(graph, cfg, w, streams);
    });
}

[[nodiscard]] inline TwinSimulation simulate_with_twins(const Graph& graph, const MRTConfig& cfg,
                                                        const StreamFactory& streams) {
    return simulate_twins_with(cfg.design, graph.n_vertices(), streams, [&](std::span<const Matrix<double>> w) {
        return simulate_binary_mrt_coupled(graph, cfg, w, streams);
    });
}

}  // namespace netfx
