#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sgdlab {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Stateless: the output is a pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Sequential draws from the substream identified by (seed, stream, k).
///
/// Every value is a pure function of (seed, stream, k, draw index), so a
/// trajectory's k-th noise can be regenerated anywhere without replaying the
/// preceding iterations. The engine uses stream 0; Monte-Carlo probes use
/// streams >= 1.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t k) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          k_(k) {}

    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    double uniform() noexcept {
        if (cursor_ == 2) refill();
        const std::uint64_t bits = words_[cursor_++];
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (consumes two uniforms, uses one output).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    void refill() noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(k_), static_cast<std::uint32_t>(k_ >> 32),
                                      stream_, static_cast<std::uint32_t>(block_)};
        const auto out = Philox4x32::generate(ctr, key_);
        words_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        words_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        ++block_;
        cursor_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t k_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> words_{};
    int cursor_ = 2;
};

}  // namespace sgdlab
