#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "netfx/core/design.hpp"
#include "netfx/core/error.hpp"
#include "netfx/core/parallel.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/summary.hpp"
#include "netfx/core/twins.hpp"
#include "netfx/core/types.hpp"
#include "netfx/state_evolution/state_evolution.hpp"

namespace netfx {

/// Everything needed to simulate the Gaussian-interference model
///   Y_{t+1} = (A + B_t) g(Y_t, w(t+1)) + eps_t.
struct GaussianDgpConfig {
    std::size_t n_units = 0;
    ExperimentDesign design{};
    OutcomeModel model = LinearOutcomeParams{};
    InterferenceSpec interference{};
    NoiseSpec noise{};
    /// Initial outcomes before burn-in; i.i.d. N(0,1) when absent.
    std::optional<std::vector<double>> y0;
    std::size_t burn_in = 0;

    void validate() const {
        if (n_units < 1) throw config_error("gaussian dgp: n_units must be >= 1");
        design.validate();
        interference.validate();
        noise.validate();
        if (const auto* lin = std::get_if<LinearOutcomeParams>(&model))
            lin->validate();
        else if (!std::get<OutcomeFunction>(model).evaluator)
            throw config_error("gaussian dgp: empty outcome function");
        if (y0 && y0->size() != n_units) throw config_error("gaussian dgp: y0 length must equal n_units");
        if (y0)
            for (double v : *y0)
                if (!std::isfinite(v)) throw config_error("gaussian dgp: y0 must be finite");
    }
};

/// N x N matrix with i.i.d. N(mean_scale/N, sd_scale^2/N) entries. Column j
/// comes from stream "<label>/col=j", so the result does not depend on the
/// worker count.
[[nodiscard]] inline Matrix<double> sample_gaussian_matrix(std::size_t n, double mean_scale, double sd_scale,
                                                           const StreamFactory& streams, const std::string& label) {
    if (n < 1) throw std::invalid_argument("sample_gaussian_matrix: n must be >= 1");
    Matrix<double> m(n, n);
    const double mean = mean_scale / static_cast<double>(n);
    const double sd = sd_scale / std::sqrt(static_cast<double>(n));
    parallel_for(n, [&](std::size_t j) {
        auto col = m.column(j);
        if (sd == 0.0) {
            std::fill(col.begin(), col.end(), mean);
            return;
        }
        Rng rng = streams.spawn(label + "/col=" + std::to_string(j));
        for (auto& x : col) x = mean + sd * rng.normal();
    });
    return m;
}

/// Fixed interference matrix A of the given spec.
[[nodiscard]] inline Matrix<double> sample_fixed_interference(std::size_t n, const InterferenceSpec& spec,
                                                              const StreamFactory& streams) {
    spec.validate();
    return sample_gaussian_matrix(n, spec.mu, spec.sigma, streams, "A");
}

namespace detail {

constexpr std::size_t kRowBlock = 512;

// out[u] = G * gs[u] for every u, one pass over G. Each row accumulates
// over columns in index order, so the result is independent of threading.
inline void multiply_many(const Matrix<double>& g_mat, const std::vector<std::vector<double>>& gs,
                          std::vector<std::vector<double>>& out) {
    const std::size_t n = g_mat.rows();
    out.assign(gs.size(), std::vector<double>(n, 0.0));
    const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t r0 = b * kRowBlock;
        const std::size_t r1 = std::min(n, r0 + kRowBlock);
        for (std::size_t j = 0; j < g_mat.cols(); ++j) {
            const double* col = g_mat.column(j).data();
            for (std::size_t u = 0; u < gs.size(); ++u) {
                const double c = gs[u][j];
                double* dst = out[u].data();
                for (std::size_t r = r0; r < r1; ++r) dst[r] += c * col[r];
            }
        }
    });
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct UnitCoefficients {
    std::vector<double> base, xi, lambda, gamma;
};

inline UnitCoefficients draw_unit_coefficients(const LinearOutcomeParams& p, std::size_t n,
                                               const StreamFactory& streams) {
    UnitCoefficients c{std::vector<double>(n, p.baseline()), std::vector<double>(n, p.xi),
                       std::vector<double>(n, p.lambda), std::vector<double>(n, p.gamma)};
    const auto& sd = p.unit_coef_sd;
    if (sd.homogeneous()) return c;
    Rng rng = streams.spawn("unit-coefficients");
    for (std::size_t i = 0; i < n; ++i) {
        const double d = p.delta + sd.delta * rng.normal();
        const double th = p.theta_bar + sd.theta * rng.normal();
        c.base[i] = d + th;
        c.xi[i] = p.xi + sd.xi * rng.normal();
        c.lambda[i] = p.lambda + sd.lambda * rng.normal();
        c.gamma[i] = p.gamma + sd.gamma * rng.normal();
    }
    return c;
}

// Orthonormal basis of span{gs} (modified Gram-Schmidt, two passes) and the
// coordinates of each g in that basis.
inline void orthonormalize(const std::vector<std::vector<double>>& gs, std::vector<std::vector<double>>& basis,
                           std::vector<std::vector<double>>& coords) {
    basis.clear();
    coords.assign(gs.size(), {});
    for (std::size_t u = 0; u < gs.size(); ++u) {
        std::vector<double> v = gs[u];
        std::vector<double> c(gs.size(), 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < basis.size(); ++j) {
                const double d = dot(basis[j], v);
                c[j] += d;
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * basis[j][i];
            }
        }
        const double norm_v = std::sqrt(dot(v, v));
        const double norm_g = std::sqrt(dot(gs[u], gs[u]));
        if (norm_v > 1e-12 * norm_g && norm_v > 0.0) {
            for (auto& x : v) x /= norm_v;
            c[basis.size()] = norm_v;
            basis.push_back(std::move(v));
        }
        coords[u] = std::move(c);
    }
}

}  // namespace detail

/// G * g for a single vector (the matrix form of the message update).
[[nodiscard]] inline std::vector<double> apply_interference(const Matrix<double>& g_mat, std::span<const double> g) {
    if (g_mat.cols() != g.size()) throw std::invalid_argument("apply_interference: size mismatch");
    std::vector<std::vector<double>> in{std::vector<double>(g.begin(), g.end())}, out;
    detail::multiply_many(g_mat, in, out);
    return std::move(out[0]);
}

/// Simulates K runs that share A, every B_t, every eps_t, the unit
/// coefficients and y0, differing only in their T x N assignment matrices.
/// Runs whose g vectors coincide at a step receive bit-identical outcomes.
///
/// The redrawn term B_t g is sampled through an orthonormal basis of the K
/// vectors g_k: with B_t = (mu_t/N) 11' + C_t and orthonormal q_j, the
/// vectors C_t q_j are independent with i.i.d. N(0, sigma_t^2/N) entries.
/// This reproduces the joint law of (B_t g_k)_k exactly at O(N K^2) cost.
/// `Dense` materializes B_t instead.
[[nodiscard]] inline std::vector<PanelData> simulate_coupled(const GaussianDgpConfig& cfg,
                                                             std::span<const Matrix<double>> assignments,
                                                             const StreamFactory& streams) {
    cfg.validate();
    const std::size_t n = cfg.n_units;
    const std::size_t horizon = cfg.design.horizon();
    const std::size_t runs = assignments.size();
    if (runs == 0) throw std::invalid_argument("simulate_coupled: no assignment matrices");
    for (const auto& w : assignments)
        if (w.rows() != horizon || w.cols() != n)
            throw std::invalid_argument("simulate_coupled: assignment must be T x N");

    const auto& spec = cfg.interference;
    const bool redraw = spec.resample_time_varying;
    const double fixed_mu = redraw ? spec.mu : spec.total_mean();
    const double fixed_sigma = redraw ? spec.sigma : std::sqrt(spec.total_variance());
    const double tv_mu = redraw ? spec.mu_t : 0.0;
    const double tv_sigma = redraw ? spec.sigma_t : 0.0;
    const double nd = static_cast<double>(n);

    std::optional<Matrix<double>> fixed;
    if (fixed_sigma > 0.0) fixed = sample_gaussian_matrix(n, fixed_mu, fixed_sigma, streams, "A");

    const auto* lin = std::get_if<LinearOutcomeParams>(&cfg.model);
    const auto* fn = std::get_if<OutcomeFunction>(&cfg.model);
    detail::UnitCoefficients coef;
    if (lin) coef = detail::draw_unit_coefficients(*lin, n, streams);

    std::vector<double> y0;
    if (cfg.y0) {
        y0 = *cfg.y0;
    } else {
        Rng rng = streams.spawn("y0");
        y0.resize(n);
        for (auto& v : y0) v = rng.normal();
    }

    std::vector<PanelData> panels(runs, PanelData(n, horizon));
    for (std::size_t k = 0; k < runs; ++k) panels[k].treatments = assignments[k];

    std::vector<std::vector<double>> state(runs, y0);
    const std::size_t steps = cfg.burn_in + horizon;
    if (cfg.burn_in == 0)
        for (std::size_t k = 0; k < runs; ++k) std::copy(y0.begin(), y0.end(), panels[k].outcomes.column(0).begin());

    std::vector<std::vector<double>> unique_g, next, basis, coords;
    std::vector<std::size_t> which(runs);
    std::vector<double> g(n);
    for (std::size_t s = 0; s < steps; ++s) {
        const long t_out = static_cast<long>(s) - static_cast<long>(cfg.burn_in) + 1;
        unique_g.clear();
        for (std::size_t k = 0; k < runs; ++k) {
            const auto& y = state[k];
            for (std::size_t i = 0; i < n; ++i) {
                const double w = t_out >= 1 ? assignments[k](static_cast<std::size_t>(t_out - 1), i) : 0.0;
                g[i] = lin ? coef.base[i] + coef.xi[i] * y[i] + coef.lambda[i] * w + coef.gamma[i] * y[i] * w
                           : fn->evaluator(y[i], w);
            }
            std::size_t u = 0;
            while (u < unique_g.size() && std::memcmp(unique_g[u].data(), g.data(), n * sizeof(double)) != 0) ++u;
            if (u == unique_g.size()) unique_g.push_back(g);
            which[k] = u;
        }

        if (fixed) {
            detail::multiply_many(*fixed, unique_g, next);
        } else {
            next.assign(unique_g.size(), std::vector<double>(n, 0.0));
            for (std::size_t u = 0; u < unique_g.size(); ++u) {
                const double m = fixed_mu * detail::mean_of(unique_g[u]);
                std::fill(next[u].begin(), next[u].end(), m);
            }
        }

        const std::string step_label = "s=" + std::to_string(s);
        if (tv_mu != 0.0 || tv_sigma != 0.0) {
            if (spec.time_varying_sampling == TimeVaryingSampling::Dense) {
                Matrix<double> b = sample_gaussian_matrix(n, tv_mu, tv_sigma, streams, "B/" + step_label);
                std::vector<std::vector<double>> extra;
                detail::multiply_many(b, unique_g, extra);
                for (std::size_t u = 0; u < unique_g.size(); ++u)
                    for (std::size_t i = 0; i < n; ++i) next[u][i] += extra[u][i];
            } else {
                if (tv_mu != 0.0)
                    for (std::size_t u = 0; u < unique_g.size(); ++u) {
                        const double m = tv_mu * detail::mean_of(unique_g[u]);
                        for (auto& v : next[u]) v += m;
                    }
                if (tv_sigma != 0.0) {
                    detail::orthonormalize(unique_g, basis, coords);
                    const double scale = tv_sigma / std::sqrt(nd);
                    std::vector<double> z(n);
                    for (std::size_t j = 0; j < basis.size(); ++j) {
                        Rng rng = streams.spawn("B/" + step_label + "/dir=" + std::to_string(j));
                        for (auto& v : z) v = scale * rng.normal();
                        for (std::size_t u = 0; u < unique_g.size(); ++u) {
                            const double c = coords[u][j];
                            if (c == 0.0) continue;
                            for (std::size_t i = 0; i < n; ++i) next[u][i] += c * z[i];
                        }
                    }
                }
            }
        }

        if (cfg.noise.sigma_e > 0.0) {
            Rng rng = streams.spawn("noise/" + step_label);
            std::vector<double> eps(n);
            for (auto& v : eps) v = cfg.noise.sigma_e * rng.normal();
            for (auto& y : next)
                for (std::size_t i = 0; i < n; ++i) y[i] += eps[i];
        }

        for (const auto& y : next)
            for (double v : y)
                if (!std::isfinite(v) || std::abs(v) > 1e12) throw divergence_error("outcomes diverged", t_out);

        for (std::size_t k = 0; k < runs; ++k) state[k] = next[which[k]];
        if (t_out >= 0)
            for (std::size_t k = 0; k < runs; ++k)
                std::copy(state[k].begin(), state[k].end(),
                          panels[k].outcomes.column(static_cast<std::size_t>(t_out)).begin());
    }
    return panels;
}

/// Observed panel under the configured design (assignments drawn from the
/// "treatments" stream).
[[nodiscard]] inline PanelData simulate_panel(const GaussianDgpConfig& cfg, const StreamFactory& streams) {
    cfg.validate();
    return simulate_observed_with(cfg.design, cfg.n_units, streams,
                                  [&](std::span<const Matrix<double>> w) { return simulate_coupled(cfg, w, streams); });
}

/// All-control and all-treated twins sharing every random input.
[[nodiscard]] inline CounterfactualPair counterfactual_pair(const GaussianDgpConfig& cfg,
                                                            const StreamFactory& streams) {
    cfg.validate();
    return counterfactual_pair_with(cfg.design, cfg.n_units,
                                    [&](std::span<const Matrix<double>> w) { return simulate_coupled(cfg, w, streams); });
}

/// Observed panel plus its twins in one coupled pass. The observed panel is
/// identical to simulate_panel(cfg, streams).
[[nodiscard]] inline TwinSimulation simulate_with_twins(const GaussianDgpConfig& cfg, const StreamFactory& streams) {
    cfg.validate();
    return simulate_twins_with(cfg.design, cfg.n_units, streams,
                               [&](std::span<const Matrix<double>> w) { return simulate_coupled(cfg, w, streams); });
}

}  // namespace netfx
