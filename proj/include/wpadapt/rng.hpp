#pragma once

#include <cstdint>
#include <random>

namespace wpadapt {

/// Seeded normal/uniform source with one independent stream per
/// (seed, stream) pair. Monte Carlo replication r uses stream r, so every
/// replication can be regenerated in isolation and in any order.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(make_engine(seed, stream)) {}

    double normal() { return normal_(engine_); }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    engine_type& engine() { return engine_; }

private:
    static engine_type make_engine(std::uint64_t seed, std::uint64_t stream) {
        const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
        const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
        std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), 0x5744u};
        return engine_type(seq);
    }

    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace wpadapt
