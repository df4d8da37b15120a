#pragma once

#include <cmath>
#include <cstdint>

namespace clockauct {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Deterministic pseudo-random stream (xoshiro256**). Every consumer of
/// randomness takes an explicit stream; there is no ambient RNG anywhere.
/// Streams derived from (master seed, index...) are independent enough for
/// Monte-Carlo use and identical across platforms, which is what makes the
/// reports byte-reproducible.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = x = detail::splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool coin() { return (next_u64() & 1ULL) != 0; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Stream for (master, index): used to give each Monte-Carlo trial its own
/// stream so that results do not depend on worker count or scheduling.
inline RngStream derive_stream(std::uint64_t master, std::uint64_t index) {
    return RngStream(detail::splitmix64(master ^ detail::splitmix64(index + 0x51ed2701a0b5e3d7ULL)));
}

inline RngStream derive_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_stream(detail::splitmix64(master ^ detail::splitmix64(a * 0x9e3779b97f4a7c15ULL + 1)), b);
}

} // namespace clockauct
