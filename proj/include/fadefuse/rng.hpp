#pragma once

// Counter-based random numbers (Philox4x32-10).
//
// A draw is a pure function of (seed, stream index, position), so Monte Carlo
// trials can be evaluated in any order on any number of workers and still
// produce identical values. Each trial owns one stream; positions within the
// stream are assigned by the caller (for example 2k for the fading draw of
// sensor k).

#include <array>
#include <cmath>
#include <cstdint>

namespace fadefuse {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox 4x32 block function.
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

class RngStream {
public:
    constexpr RngStream(std::uint64_t seed, std::uint64_t stream_index) noexcept
        : seed_(seed), stream_(stream_index) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_index() const noexcept { return stream_; }

    constexpr PhiloxCounter block(std::uint64_t position) const noexcept {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                                static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(position >> 32)};
        const PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        return philox4x32_10(ctr, key);
    }

    /// Uniform on (0, 1] with 53 random bits.
    double uniform(std::uint64_t position) const noexcept {
        const auto b = block(position);
        const std::uint64_t bits = ((std::uint64_t{b[0]} << 32) | b[1]) >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    /// Exponential with unit mean, by inversion.
    double exponential(std::uint64_t position) const noexcept { return -std::log(uniform(position)); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace fadefuse
