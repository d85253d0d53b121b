#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace seir {

/// PCG32 (XSH-RR output, 64-bit LCG state), O'Neill 2014.
///
/// Streams: the increment of the underlying LCG is derived from a 64-bit
/// stream id, so (seed, stream) pairs give statistically independent
/// sequences. Replicate i of any Monte Carlo loop uses stream i of the
/// run seed; nothing else in the library consumes streams.
class Pcg32 {
public:
    using result_type = std::uint32_t;

    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : inc_((stream << 1u) | 1u) {
        state_ = 0;
        next();
        state_ += seed;
        next();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        const std::uint64_t hi = next() >> 5;  // 27 bits
        const std::uint64_t lo = next() >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1).
    double uniform_open() noexcept {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

private:
    result_type next() noexcept {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t state_;
    std::uint64_t inc_;
};

/// Standard normal draws by the Box-Muller transform, caching the second
/// variate of each pair.
class NormalSampler {
public:
    explicit NormalSampler(Pcg32& rng) noexcept : rng_(&rng) {}

    double operator()() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = rng_->uniform_open();
        const double u2 = rng_->uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Pcg32* rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline constexpr const char* kRngAlgorithm = "pcg32-xsh-rr/box-muller";

}  // namespace seir
