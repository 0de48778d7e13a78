#pragma once

// Counter-based Philox4x32-10. A draw depends only on (seed, counter), so a
// path's increments can be regenerated in any order on any thread.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace scc {

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
            counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                       static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return counter;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Standard normal stream for one simulated path. Normal j comes from lane
/// j mod 4 of the Philox block j / 4, with the path index in the upper counter
/// words; each block feeds two Box-Muller pairs.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path_index) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path_index)),
          path_hi_(static_cast<std::uint32_t>(path_index >> 32)) {}

    double operator()(std::uint64_t j) noexcept {
        const std::uint64_t block = j >> 2;
        if (block != block_) refill(block);
        return cache_[j & 3u];
    }

private:
    void refill(std::uint64_t block) noexcept {
        const auto r = Philox4x32::generate(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), path_lo_, path_hi_}, key_);
        box_muller(r[0], r[1], cache_[0], cache_[1]);
        box_muller(r[2], r[3], cache_[2], cache_[3]);
        block_ = block;
    }

    static void box_muller(std::uint32_t a, std::uint32_t b, double& z0, double& z1) noexcept {
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(a) + 1.0) * 0x1p-32;
        const double u2 = static_cast<double>(b) * 0x1p-32;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(th);
        z1 = r * std::sin(th);
    }

    Philox4x32::Key key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
    std::uint64_t block_ = ~std::uint64_t{0};
    std::array<double, 4> cache_{};
};

}  // namespace scc
