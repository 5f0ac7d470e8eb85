#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/parallel.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/summary.hpp"
#include "netfx/core/types.hpp"
#include "netfx/estimation/estimation.hpp"

namespace netfx {

struct ResampleSpec {
    /// Per-unit Bernoulli inclusion probability.
    double q = 0.3;
    std::size_t b_samples = 500;
    double level = 0.95;
    /// Empirical percentile band instead of mean +- z sd.
    bool percentile = false;

    void validate() const {
        if (!(q > 0.0 && q < 1.0)) throw config_error("resample: q must lie in (0,1)");
        if (b_samples < 2) throw config_error("resample: b_samples must be >= 2");
        if (!(level > 0.0 && level < 1.0)) throw config_error("resample: level must lie in (0,1)");
    }

    bool operator==(const ResampleSpec&) const = default;
};

enum class InterferenceLevel { Low, Moderate, High };

/// Subsampling rate by population size and interference strength.
[[nodiscard]] inline double default_q(std::size_t n_units, InterferenceLevel level) {
    switch (level) {
        case InterferenceLevel::Low:
            return 0.7;
        case InterferenceLevel::Moderate:
            return n_units <= 500 ? 0.4 : n_units <= 2000 ? 0.3 : 0.25;
        case InterferenceLevel::High:
            break;
    }
    return n_units <= 500 ? 0.2 : n_units <= 2000 ? 0.15 : 0.1;
}

struct ResampleResult {
    std::vector<double> center;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::vector<double> sd;
    /// Subsamples redrawn because they were too small or the fit failed.
    std::size_t redraws = 0;
};

namespace detail {

inline void subsample_means(const PanelData& panel, const std::vector<std::uint32_t>& rows, std::vector<double>& out) {
    out.assign(panel.horizon + 1, 0.0);
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (std::size_t t = 0; t <= panel.horizon; ++t) {
        const auto col = panel.outcomes_at(t);
        double s = 0.0;
        for (auto i : rows) s += col[i];
        out[t] = s * inv;
    }
}

}  // namespace detail

/// Confidence band for the TTE trajectory from B Bernoulli(q) unit
/// subsamples, each re-estimated with the same design and clamp. Sample b
/// draws from stream "resample/b=<b>"; failed draws are redrawn from the same
/// stream, at most 10 B times in total.
[[nodiscard]] inline ResampleResult resample_tte_ci(const PanelData& panel, const ExperimentDesign& design,
                                                    const EstimatorOptions& options, const ResampleSpec& spec,
                                                    const StreamFactory& streams) {
    spec.validate();
    if (panel.horizon != design.horizon()) throw std::invalid_argument("resample: panel horizon differs from design");
    if (spec.q * static_cast<double>(panel.n_units) < 10.0)
        throw config_error("resample: expected subsample size q*N must be >= 10");

    const std::size_t b_count = spec.b_samples, len = panel.horizon + 1;
    const std::size_t budget = 10 * b_count;
    std::vector<std::vector<double>> draws(b_count);
    std::vector<std::size_t> failures(b_count, 0);

    parallel_for(b_count, [&](std::size_t b) {
        Rng rng = streams.spawn("resample/b=" + std::to_string(b));
        std::vector<std::uint32_t> rows;
        std::vector<double> means;
        while (failures[b] <= budget) {
            rows.clear();
            for (std::uint32_t i = 0; i < panel.n_units; ++i)
                if (rng.bernoulli(spec.q)) rows.push_back(i);
            if (rows.size() >= 2) {
                detail::subsample_means(panel, rows, means);
                try {
                    draws[b] = estimate_tte_from_means(means, design, options).tte;
                    return;
                } catch (const singular_fit_error&) {
                } catch (const divergence_error&) {
                }
            }
            ++failures[b];
        }
    });

    ResampleResult r;
    for (std::size_t b = 0; b < b_count; ++b) {
        r.redraws += failures[b];
        if (draws[b].empty() || r.redraws > budget)
            throw inference_error("resample: retry budget exhausted (" + std::to_string(r.redraws) + " failed draws)");
    }

    r.center.assign(len, 0.0);
    r.sd.assign(len, 0.0);
    r.ci_low.assign(len, 0.0);
    r.ci_high.assign(len, 0.0);
    const auto bd = static_cast<double>(b_count);
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + spec.level));
    std::vector<double> column(b_count);
    for (std::size_t t = 0; t < len; ++t) {
        double m = 0.0;
        for (std::size_t b = 0; b < b_count; ++b) m += draws[b][t];
        m /= bd;
        double ss = 0.0;
        for (std::size_t b = 0; b < b_count; ++b) ss += (draws[b][t] - m) * (draws[b][t] - m);
        r.center[t] = m;
        r.sd[t] = std::sqrt(ss / (bd - 1.0));
        if (spec.percentile) {
            for (std::size_t b = 0; b < b_count; ++b) column[b] = draws[b][t];
            r.ci_low[t] = quantile_type7(column, 0.5 * (1.0 - spec.level));
            r.ci_high[t] = quantile_type7(column, 0.5 * (1.0 + spec.level));
        } else {
            r.ci_low[t] = m - z * r.sd[t];
            r.ci_high[t] = m + z * r.sd[t];
        }
        r.ci_low[t] = options.clamp.apply(r.ci_low[t]);
        r.ci_high[t] = options.clamp.apply(r.ci_high[t]);
    }
    return r;
}

[[nodiscard]] inline ResampleResult resample_tte_ci(const PanelData& panel, const ExperimentDesign& design,
                                                    const ClampBounds& clamp, const ResampleSpec& spec,
                                                    const StreamFactory& streams) {
    return resample_tte_ci(panel, design, EstimatorOptions{.clamp = clamp}, spec, streams);
}

}  // namespace netfx
