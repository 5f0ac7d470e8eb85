#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace netfx {

namespace detail {

constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Single-owner random stream. Engine and distributions are fully specified
/// (mt19937_64 + seed_seq + Boost.Random), so draws are bit-identical across
/// platforms and standard libraries.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::seed_seq& seq) : engine_(seq) {}

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Uniform on [0, 1).
    double uniform() { return uniform_(engine_); }
    bool bernoulli(double p) { return uniform() < p; }
    double exponential(double rate) {
        return boost::random::exponential_distribution<double>(rate)(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

    engine_type& engine() noexcept { return engine_; }

private:
    engine_type engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
    boost::random::uniform_01<double> uniform_{};
};

/// Deterministic sub-stream for (master_seed, label).
[[nodiscard]] inline Rng spawn_stream(std::uint64_t master_seed, std::string_view label) {
    const std::uint64_t h1 = detail::fnv1a64(label, 0xcbf29ce484222325ULL);
    const std::uint64_t h2 = detail::fnv1a64(label, 0x84222325cbf29ce4ULL);
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(master_seed), hi(master_seed), lo(h1), hi(h1), lo(h2), hi(h2),
                      static_cast<std::uint32_t>(label.size())};
    return Rng(seq);
}

/// Seed plus hierarchical label prefix; hands out named streams.
class StreamFactory {
public:
    explicit StreamFactory(std::uint64_t seed, std::string prefix = {})
        : seed_(seed), prefix_(std::move(prefix)) {}

    [[nodiscard]] Rng spawn(std::string_view label) const { return spawn_stream(seed_, qualify(label)); }

    [[nodiscard]] StreamFactory child(std::string_view label) const { return StreamFactory(seed_, qualify(label)); }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] const std::string& prefix() const noexcept { return prefix_; }

private:
    [[nodiscard]] std::string qualify(std::string_view label) const {
        if (prefix_.empty()) return std::string(label);
        std::string s = prefix_;
        s += '/';
        s += label;
        return s;
    }

    std::uint64_t seed_;
    std::string prefix_;
};

}  // namespace netfx
