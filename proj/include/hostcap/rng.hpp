#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hostcap {

/// Seeded random source with portable derived distributions.
///
/// std::mt19937_64 output is pinned by the standard, but the standard
/// distribution adaptors are not, so the helpers below implement the few
/// distributions this project needs directly on the raw 64-bit stream.
/// Identical seeds give identical draws on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling to remove modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return r % n;
    }

    /// Poisson draw by Knuth's product method. Intended for the small
    /// adoption rates used here (lambda of order 1); cost grows with lambda.
    int poisson(double lambda) {
        const double threshold = std::exp(-lambda);
        int k = 0;
        double product = uniform();
        while (product > threshold) {
            ++k;
            product *= uniform();
        }
        return k;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace hostcap
