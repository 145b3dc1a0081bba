#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace kljn {

namespace detail {

// SplitMix64 finaliser. Bijective, so distinct keys never collide.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic random stream identified by a 64-bit key.
///
/// Streams are never advanced to produce children: `derive` and `split` are
/// pure functions of the key, so trial k of a sweep can be regenerated in
/// isolation and the result does not depend on scheduling. The generator
/// itself is xoshiro256** seeded from the key through SplitMix64.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t key = 0) noexcept : key_(key) {
        std::uint64_t s = key;
        for (auto& word : state_) {
            s += 0x9e3779b97f4a7c15ULL;
            word = detail::mix64(s);
        }
    }

    /// Stream for (master seed, purpose, trial, sub-index).
    static RngStream derive(std::uint64_t master_seed, std::string_view purpose,
                            std::uint64_t trial = 0, std::uint64_t sub = 0) noexcept {
        std::uint64_t k = detail::mix64(master_seed);
        k = detail::mix64(k ^ detail::fnv1a(purpose));
        k = detail::mix64(k ^ detail::mix64(trial + 0x5851f42d4c957f2dULL));
        k = detail::mix64(k ^ detail::mix64(sub + 0x14057b7ef767814fULL));
        return RngStream(k);
    }

    /// Child stream keyed on this stream's identity, not its position.
    [[nodiscard]] RngStream split(std::string_view purpose, std::uint64_t sub = 0) const noexcept {
        return derive(key_, purpose, 0, sub);
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t out = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return out;
    }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace kljn
