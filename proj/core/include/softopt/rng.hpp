#pragma once

#include <cstdint>
#include <random>

namespace softopt {

/// Mixes a master seed with stream coordinates into an independent 64-bit seed.
/// Used so that every individual / probe owns its own generator and results
/// never depend on evaluation order or worker count.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// mt19937_64 with a platform-independent conversion to doubles.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n > 0.
    std::uint64_t index(std::uint64_t n);

    bool coin(double p) { return uniform() < p; }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace softopt
