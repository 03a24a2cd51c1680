#include "coopstab/rng.hpp"

#include <cmath>

namespace coopstab {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void mul_hilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline double to_unit_interval(std::uint64_t bits) {
    // 53 significant bits, mapped to (0, 1] so logs are safe.
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> x = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mul_hilo(kMulA, x[0], lo0, hi0);
        mul_hilo(kMulB, x[2], lo1, hi1);
        x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
        k[0] += kWeylA;
        k[1] += kWeylB;
    }
    return x;
}

std::array<std::uint32_t, 4> RandomStream::raw_block(std::uint64_t block) const {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    return philox4x32(counter, key);
}

double RandomStream::normal(std::uint64_t index) const {
    const auto w = raw_block(index >> 1);
    const std::uint64_t b0 = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t b1 = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    const double u1 = to_unit_interval(b0);
    const double u2 = to_unit_interval(b1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    return (index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
}

void RandomStream::fill_normals(std::uint64_t first, Vec& out) const {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(first + i);
}

double RandomStream::uniform(std::uint64_t index) const {
    const auto w = raw_block(index);
    return to_unit_interval((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
}

}  // namespace coopstab
