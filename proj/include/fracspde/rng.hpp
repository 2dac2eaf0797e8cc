#pragma once

// Counter-based random streams. A stream is fully determined by (seed, stream
// index), so replicas can be generated in any order on any thread.

#include <array>
#include <cstdint>
#include <limits>

namespace fracspde::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Block philox4x32(Block counter, Key key) noexcept;

/// UniformRandomBitGenerator over one Philox stream. The key is the seed; the
/// counter holds the block index (low words) and the stream index (high words).
class Philox {
public:
    using result_type = std::uint32_t;

    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Block buffer_{};
    int used_ = 4;
};

}  // namespace fracspde::rng
