#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "netfx/core/types.hpp"

namespace netfx {

/// Per-time arithmetic mean over units, length T+1.
[[nodiscard]] inline std::vector<double> sample_means(const PanelData& panel) {
    if (panel.n_units == 0) throw std::invalid_argument("sample_means: empty panel");
    std::vector<double> out(panel.horizon + 1);
    const double inv_n = 1.0 / static_cast<double>(panel.n_units);
    for (std::size_t t = 0; t <= panel.horizon; ++t) {
        double s = 0.0;
        for (double v : panel.outcomes_at(t)) s += v;
        out[t] = s * inv_n;
    }
    return out;
}

/// Ground-truth TTE from an all-control / all-treated twin pair; index 0 is 0.
[[nodiscard]] inline std::vector<double> tte_truth(const PanelData& all_control, const PanelData& all_treated) {
    if (all_control.n_units != all_treated.n_units || all_control.horizon != all_treated.horizon)
        throw std::invalid_argument("tte_truth: twin panels differ in shape");
    const auto m0 = sample_means(all_control);
    const auto m1 = sample_means(all_treated);
    std::vector<double> out(m0.size(), 0.0);
    for (std::size_t t = 1; t < out.size(); ++t) out[t] = m1[t] - m0[t];
    return out;
}

/// Linear-interpolation sample quantile (Hyndman-Fan type 7). Reorders `v`.
[[nodiscard]] inline double quantile_type7(std::vector<double>& v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in [0,1]");
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double x_lo = v[lo];
    if (lo + 1 >= v.size()) return x_lo;
    const double x_hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    return x_lo + (h - static_cast<double>(lo)) * (x_hi - x_lo);
}

}  // namespace netfx
