#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace netfx {

/// Base of every recoverable failure raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Outcome dynamics left the representable range. `time_index` is the
/// panel time being produced (negative during burn-in) when known.
class divergence_error : public error {
public:
    explicit divergence_error(const std::string& what) : error(what) {}
    divergence_error(const std::string& what, long time_index)
        : error(what + " (t=" + std::to_string(time_index) + ")"), time_index_(time_index) {}

    [[nodiscard]] std::optional<long> time_index() const noexcept { return time_index_; }

private:
    std::optional<long> time_index_;
};

class singular_fit_error : public error {
public:
    using error::error;
};

/// Design cannot separate the treatment channels (pi1 == pi2).
class identifiability_error : public error {
public:
    using error::error;
};

class inference_error : public error {
public:
    using error::error;
};

/// Queue simulation exceeded its job budget.
class instability_error : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

class io_error : public error {
public:
    using error::error;
};

}  // namespace netfx
