#pragma once

#include <span>
#include <utility>
#include <vector>

#include "netfx/core/design.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/summary.hpp"
#include "netfx/core/types.hpp"

namespace netfx {

struct CounterfactualPair {
    PanelData all_control;
    PanelData all_treated;
    std::vector<double> tte_truth;
};

struct TwinSimulation {
    PanelData observed;
    CounterfactualPair twins;
};

/// Draws the observed assignment from the "treatments" stream and runs
/// `coupled(assignments)` on {observed, all-control, all-treated}.
/// `coupled` maps a span of T x N matrices to one panel per matrix.
template <class Coupled>
[[nodiscard]] TwinSimulation simulate_twins_with(const ExperimentDesign& design, std::size_t n_units,
                                                 const StreamFactory& streams, Coupled&& coupled) {
    Rng rng = streams.spawn("treatments");
    const std::size_t horizon = design.horizon();
    const std::vector<Matrix<double>> w{assign_treatments(design, n_units, rng),
                                        constant_treatments(horizon, n_units, 0.0),
                                        constant_treatments(horizon, n_units, 1.0)};
    std::vector<PanelData> panels = coupled(std::span<const Matrix<double>>(w));
    TwinSimulation out{std::move(panels[0]), {std::move(panels[1]), std::move(panels[2]), {}}};
    out.twins.tte_truth = tte_truth(out.twins.all_control, out.twins.all_treated);
    return out;
}

/// All-control / all-treated twins only.
template <class Coupled>
[[nodiscard]] CounterfactualPair counterfactual_pair_with(const ExperimentDesign& design, std::size_t n_units,
                                                          Coupled&& coupled) {
    const std::size_t horizon = design.horizon();
    const std::vector<Matrix<double>> w{constant_treatments(horizon, n_units, 0.0),
                                        constant_treatments(horizon, n_units, 1.0)};
    std::vector<PanelData> panels = coupled(std::span<const Matrix<double>>(w));
    CounterfactualPair out{std::move(panels[0]), std::move(panels[1]), {}};
    out.tte_truth = tte_truth(out.all_control, out.all_treated);
    return out;
}

/// Observed panel alone.
template <class Coupled>
[[nodiscard]] PanelData simulate_observed_with(const ExperimentDesign& design, std::size_t n_units,
                                               const StreamFactory& streams, Coupled&& coupled) {
    Rng rng = streams.spawn("treatments");
    const std::vector<Matrix<double>> w{assign_treatments(design, n_units, rng)};
    return std::move(coupled(std::span<const Matrix<double>>(w))[0]);
}

}  // namespace netfx
