#pragma once

#include "netfx/core/random.hpp"
#include "netfx/core/types.hpp"

namespace netfx {

/// Draws a T x N assignment matrix for `design` (row r = w(r+1)).
///
/// TwoStageStatic: one Bernoulli(pi1) vector held over stage 1, an
/// independent Bernoulli(pi2) vector held over stage 2.
/// StaggeredRollout: stage-1 treated units stay treated; each stage-1 control
/// joins with probability (pi2-pi1)/(1-pi1), so the stage-2 marginal is pi2.
/// MicroRandomized: fresh Bernoulli(pi_stage) vector every period.
[[nodiscard]] inline Matrix<double> assign_treatments(const ExperimentDesign& design, std::size_t n_units, Rng& rng) {
    design.validate();
    const std::size_t horizon = design.horizon();
    Matrix<double> w(horizon, n_units, 0.0);
    if (design.all_control_override) return w;
    if (design.all_treated_override) return Matrix<double>(horizon, n_units, 1.0);

    auto fill_rows = [&](std::size_t first, std::size_t last, const std::vector<double>& v) {
        for (std::size_t r = first; r < last; ++r)
            for (std::size_t n = 0; n < n_units; ++n) w(r, n) = v[n];
    };
    auto draw = [&](double p) {
        std::vector<double> v(n_units);
        for (auto& x : v) x = rng.bernoulli(p) ? 1.0 : 0.0;
        return v;
    };

    switch (design.mode) {
    case DesignMode::TwoStageStatic: {
        const auto s1 = draw(design.pi1);
        const auto s2 = draw(design.pi2);
        fill_rows(0, design.t1, s1);
        fill_rows(design.t1, horizon, s2);
        break;
    }
    case DesignMode::StaggeredRollout: {
        const auto s1 = draw(design.pi1);
        const double top_up = design.pi1 < 1.0 ? (design.pi2 - design.pi1) / (1.0 - design.pi1) : 0.0;
        auto s2 = s1;
        for (auto& x : s2) {
            // one uniform per unit keeps the stream position independent of s1
            const bool join = rng.bernoulli(top_up);
            if (x == 0.0 && join) x = 1.0;
        }
        fill_rows(0, design.t1, s1);
        fill_rows(design.t1, horizon, s2);
        break;
    }
    case DesignMode::MicroRandomized:
        for (std::size_t r = 0; r < horizon; ++r) {
            const double p = design.probability_at(r + 1);
            for (std::size_t n = 0; n < n_units; ++n) w(r, n) = rng.bernoulli(p) ? 1.0 : 0.0;
        }
        break;
    }
    return w;
}

/// Constant assignment matrix (all units share `value` in every period).
[[nodiscard]] inline Matrix<double> constant_treatments(std::size_t horizon, std::size_t n_units, double value) {
    return Matrix<double>(horizon, n_units, value);
}

}  // namespace netfx
