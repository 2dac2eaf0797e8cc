#include "fracspde/rng.hpp"

namespace fracspde::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

}  // namespace

Block philox4x32(Block c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

Philox::Philox(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

Philox::result_type Philox::operator()() noexcept {
    if (used_ == 4) {
        const Block counter = {std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(stream_),
                               std::uint32_t(stream_ >> 32)};
        buffer_ = philox4x32(counter, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
        ++block_;
        used_ = 0;
    }
    return buffer_[used_++];
}

double Philox::uniform() noexcept {
    const std::uint64_t a = (*this)() >> 5;
    const std::uint64_t b = (*this)() >> 6;
    return (double(a * 67108864u + b) + 0.5) * 0x1.0p-53;
}

}  // namespace fracspde::rng
