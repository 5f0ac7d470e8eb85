#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace netfx {

/// Gauss-Hermite rule for the standard normal weight:
///   E[f(Z)] ~= sum_i weights[i] * f(nodes[i]),  Z ~ N(0,1),  sum(weights) = 1.
/// Exact for polynomials of degree <= 2n-1.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Newton iteration on orthonormal physicists' Hermite polynomials with the
// usual asymptotic starting guesses, then rescaled to the N(0,1) weight.
inline GaussHermiteRule build_gauss_hermite(std::size_t n) {
    constexpr double pim4 = 0.7511255444649425;  // pi^(-1/4)
    std::vector<double> x(n), w(n);
    const std::size_t m = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double nd = static_cast<double>(n);
        if (i == 0)
            z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(nd, 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];

        double pp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 200; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * nd) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_hermite: Newton iteration did not converge");
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }

    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
        // ascending order
        rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
        rule.weights[i] = w[n - 1 - i] * inv_sqrt_pi;
    }
    return rule;
}

}  // namespace detail

/// Cached rule with `n` nodes (thread-safe).
[[nodiscard]] inline const GaussHermiteRule& gauss_hermite(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_hermite: need at least one node");
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(detail::build_gauss_hermite(n));
    return *slot;
}

}  // namespace netfx
