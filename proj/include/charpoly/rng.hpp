#pragma once

// Counter-based random numbers: Philox-4x32-10 (Salmon et al. 2011).
// Every (seed, stream, index) triple maps to an independent 128-bit block,
// so parallel sampling is reproducible regardless of scheduling.

#include <array>
#include <cmath>
#include <cstdint>

namespace charpoly {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> ctr) {
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, k0, k1);
        k0 += W0;
        k1 += W1;
    }
    return ctr;
}

// 53-bit uniform in (0,1] from two 32-bit words (never 0, so log is safe).
inline double u01_open(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t x =
        (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    return (static_cast<double>(x >> 11) + 1.0) * 0x1p-53;
}

}  // namespace detail

/// Stateless generator keyed by (seed, stream); each index yields fresh
/// variates. normal() consumes one whole Philox block per call.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::array<std::uint32_t, 4> block(std::uint64_t index) const {
        return detail::philox4x32(
            seed_, {static_cast<std::uint32_t>(stream_),
                    static_cast<std::uint32_t>(stream_ >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)});
    }

    /// Standard normal via Box-Muller on words of block(index).
    double normal(std::uint64_t index) const {
        const auto w = block(index);
        const double u1 = detail::u01_open(w[0], w[1]);
        const double u2 = detail::u01_open(w[2], w[3]);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.28318530717958647692 * u2);
    }

    /// Pair of independent uniforms in (0,1] from one block.
    std::array<double, 2> uniform2(std::uint64_t index) const {
        const auto w = block(index);
        return {detail::u01_open(w[0], w[1]), detail::u01_open(w[2], w[3])};
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace charpoly
