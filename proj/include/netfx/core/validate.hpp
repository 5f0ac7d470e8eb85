#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "netfx/core/types.hpp"

namespace netfx {

struct Violation {
    enum class Kind { Shape, NonFiniteOutcome, NonFiniteTreatment, NonBinaryTreatment };
    Kind kind;
    std::optional<std::size_t> row;
    std::optional<std::size_t> col;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;

    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return ok(); }
};

struct PanelCheckOptions {
    /// Require treatments in {0,1} (every design shipped here is Bernoulli).
    bool require_binary_treatments = true;
};

[[nodiscard]] inline ValidationResult validate_panel(const PanelData& panel, PanelCheckOptions opts = {}) {
    ValidationResult res;
    auto shape = [&](std::string msg) {
        res.violations.push_back({Violation::Kind::Shape, std::nullopt, std::nullopt, std::move(msg)});
    };

    const std::size_t n = panel.n_units;
    const std::size_t t = panel.horizon;
    if (n == 0) shape("n_units must be positive");
    if (t == 0) shape("horizon must be positive");
    if (panel.outcomes.rows() != n || panel.outcomes.cols() != t + 1)
        shape("outcomes must be " + std::to_string(n) + "x" + std::to_string(t + 1) + ", got " +
              std::to_string(panel.outcomes.rows()) + "x" + std::to_string(panel.outcomes.cols()));
    if (panel.treatments.rows() != t || panel.treatments.cols() != n)
        shape("treatments must be " + std::to_string(t) + "x" + std::to_string(n) + ", got " +
              std::to_string(panel.treatments.rows()) + "x" + std::to_string(panel.treatments.cols()));

    const auto& y = panel.outcomes;
    for (std::size_t c = 0; c < y.cols(); ++c)
        for (std::size_t r = 0; r < y.rows(); ++r)
            if (!std::isfinite(y(r, c)))
                res.violations.push_back({Violation::Kind::NonFiniteOutcome, r, c, "non-finite outcome"});

    const auto& w = panel.treatments;
    for (std::size_t c = 0; c < w.cols(); ++c)
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double v = w(r, c);
            if (!std::isfinite(v))
                res.violations.push_back({Violation::Kind::NonFiniteTreatment, r, c, "non-finite treatment"});
            else if (opts.require_binary_treatments && v != 0.0 && v != 1.0)
                res.violations.push_back({Violation::Kind::NonBinaryTreatment, r, c, "treatment not in {0,1}"});
        }
    return res;
}

}  // namespace netfx
