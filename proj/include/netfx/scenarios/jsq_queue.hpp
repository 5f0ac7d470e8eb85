#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/twins.hpp"
#include "netfx/core/types.hpp"

namespace netfx {

struct QueueParams {
    /// Arrival rate is arrival_rate_factor * N.
    double arrival_rate_factor = 0.95;
    double base_service_rate = 1.0;
    double treated_service_rate = 2.0;

    void validate() const {
        if (!std::isfinite(arrival_rate_factor) || arrival_rate_factor < 0.0)
            throw config_error("queue: arrival_rate_factor must be >= 0");
        if (!(base_service_rate > 0.0) || !(treated_service_rate > 0.0) || !std::isfinite(base_service_rate) ||
            !std::isfinite(treated_service_rate))
            throw config_error("queue: service rates must be positive");
    }
};

struct QueueConfig {
    QueueParams params{};
    ExperimentDesign design{.pi1 = 0.15, .pi2 = 0.5, .t1 = 30, .t2 = 30, .mode = DesignMode::TwoStageStatic};
    std::size_t burn_in = 10;
    /// Jobs in system beyond this raise instability_error.
    std::size_t max_jobs = 1'000'000;

    void validate() const {
        params.validate();
        design.validate();
    }
};

namespace detail {

// Servers bucketed by queue length for O(1) uniform choice among the
// shortest queues.
class JsqBuckets {
public:
    explicit JsqBuckets(std::size_t n) : len_(n, 0), pos_(n), buckets_(1) {
        buckets_[0].resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            buckets_[0][i] = i;
            pos_[i] = i;
        }
    }

    [[nodiscard]] std::uint32_t pick_shortest(double u) const {
        const auto& b = buckets_[min_];
        auto idx = static_cast<std::size_t>(u * static_cast<double>(b.size()));
        if (idx >= b.size()) idx = b.size() - 1;
        return b[idx];
    }

    [[nodiscard]] std::size_t length(std::uint32_t s) const { return len_[s]; }

    void increment(std::uint32_t s) {
        move(s, len_[s] + 1);
        while (buckets_[min_].empty()) ++min_;
    }

    void decrement(std::uint32_t s) {
        move(s, len_[s] - 1);
        if (len_[s] < min_) min_ = len_[s];
    }

private:
    void move(std::uint32_t s, std::size_t to) {
        auto& from = buckets_[len_[s]];
        const std::uint32_t last = from.back();
        from[pos_[s]] = last;
        pos_[last] = pos_[s];
        from.pop_back();
        if (to >= buckets_.size()) buckets_.resize(to + 1);
        pos_[s] = buckets_[to].size();
        buckets_[to].push_back(s);
        len_[s] = to;
    }

    std::vector<std::size_t> len_;
    std::vector<std::size_t> pos_;
    std::vector<std::vector<std::uint32_t>> buckets_;
    std::size_t min_ = 0;
};

}  // namespace detail

/// M/M/N join-the-shortest-queue with per-server busy time per unit interval.
///
/// Interval k covers [k, k+1). Intervals 0..burn_in-1 are discarded; Y_0 is
/// interval burn_in (control) and Y_t, t >= 1, is interval burn_in + t served
/// under w(t). Every job carries a unit-exponential work drawn from the shared
/// "arrivals" stream, served at the rate of its server's treatment at service
/// start, so runs with equal rates coincide exactly.
[[nodiscard]] inline std::vector<PanelData> simulate_jsq_queue_coupled(std::size_t n_servers, const QueueConfig& cfg,
                                                                       std::span<const Matrix<double>> assignments,
                                                                       const StreamFactory& streams) {
    cfg.validate();
    if (n_servers < 1) throw config_error("queue: need at least one server");
    const std::size_t n = n_servers;
    const std::size_t horizon = cfg.design.horizon();
    for (const auto& w : assignments)
        if (w.rows() != horizon || w.cols() != n) throw std::invalid_argument("queue: assignment must be T x N");
    const auto& qp = cfg.params;
    const double arrival_rate = qp.arrival_rate_factor * static_cast<double>(n);
    const auto first_kept = static_cast<double>(cfg.burn_in);
    const double end = first_kept + static_cast<double>(horizon) + 1.0;

    std::vector<PanelData> panels;
    panels.reserve(assignments.size());
    for (const auto& w : assignments) {
        PanelData panel(n, horizon);
        panel.treatments = w;

        auto rate_at = [&](std::uint32_t s, double time) {
            const double k = std::floor(time) - first_kept;
            if (k < 1.0) return qp.base_service_rate;
            const auto t = static_cast<std::size_t>(k);
            return w(t - 1, s) == 1.0 ? qp.treated_service_rate : qp.base_service_rate;
        };
        auto add_busy = [&](std::uint32_t s, double a, double b) {
            for (double k = std::floor(a); k < b; k += 1.0) {
                const double overlap = std::min(b, k + 1.0) - std::max(a, k);
                const double col = k - first_kept;
                if (col >= 0.0 && overlap > 0.0) panel.outcomes(s, static_cast<std::size_t>(col)) += overlap;
            }
        };

        Rng rng = streams.spawn("arrivals");
        auto next_gap = [&] {
            return arrival_rate > 0.0 ? rng.exponential(arrival_rate) : std::numeric_limits<double>::infinity();
        };

        detail::JsqBuckets jsq(n);
        std::vector<std::deque<double>> waiting(n);
        std::vector<double> started(n, 0.0);
        using Event = std::pair<double, std::uint32_t>;
        std::priority_queue<Event, std::vector<Event>, std::greater<>> departures;
        std::size_t in_system = 0;

        auto start_service = [&](std::uint32_t s, double now, double work) {
            started[s] = now;
            departures.emplace(now + work / rate_at(s, now), s);
        };

        double next_arrival = next_gap();
        for (;;) {
            const double next_dep = departures.empty() ? std::numeric_limits<double>::infinity() : departures.top().first;
            if (std::min(next_arrival, next_dep) >= end) break;
            if (next_arrival <= next_dep) {
                const double now = next_arrival;
                const double work = rng.exponential(1.0);
                const std::uint32_t s = jsq.pick_shortest(rng.uniform());
                if (jsq.length(s) == 0)
                    start_service(s, now, work);
                else
                    waiting[s].push_back(work);
                jsq.increment(s);
                if (++in_system > cfg.max_jobs) throw instability_error("queue: job count exceeded budget");
                next_arrival = now + next_gap();
            } else {
                const auto [now, s] = departures.top();
                departures.pop();
                add_busy(s, started[s], now);
                jsq.decrement(s);
                --in_system;
                if (!waiting[s].empty()) {
                    const double work = waiting[s].front();
                    waiting[s].pop_front();
                    start_service(s, now, work);
                }
            }
        }
        for (std::uint32_t s = 0; s < n; ++s)
            if (jsq.length(s) > 0) add_busy(s, started[s], end);
        // back-to-back services can sum to one ulp above the interval length
        for (double& v : panel.outcomes.data()) v = std::min(v, 1.0);
        panels.push_back(std::move(panel));
    }
    return panels;
}

[[nodiscard]] inline PanelData simulate_jsq_queue(std::size_t n_servers, const QueueConfig& cfg,
                                                  const StreamFactory& streams) {
    return simulate_observed_with(cfg.design, n_servers, streams, [&](std::span<const Matrix<double>> w) {
        return simulate_jsq_queue_coupled(n_servers, cfg, w, streams);
    });
}

[[nodiscard]] inline CounterfactualPair scenario_counterfactual_pair(std::size_t n_servers, const QueueConfig& cfg,
                                                                     const StreamFactory& streams) {
    return counterfactual_pair_with(cfg.design, n_servers, [&](std::span<const Matrix<double>> w) {
        return simulate_jsq_queue_coupled(n_servers, cfg, w, streams);
    });
}

[[nodiscard]] inline TwinSimulation simulate_with_twins(std::size_t n_servers, const QueueConfig& cfg,
                                                        const StreamFactory& streams) {
    return simulate_twins_with(cfg.design, n_servers, streams, [&](std::span<const Matrix<double>> w) {
        return simulate_jsq_queue_coupled(n_servers, cfg, w, streams);
    });
}

}  // namespace netfx
