#pragma once

// Counter-based randomness (Philox4x32-10). Every variate is addressed by
// (seed, stream, index), so ensembles are reproducible bit-for-bit no matter
// how work is scheduled across threads.

#include <array>
#include <cstdint>

#include "coopstab/types.hpp"

namespace coopstab {

/// One Philox4x32 block: 10 rounds over a 128-bit counter with a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

/// Addressable stream of standard normal / uniform variates. `stream`
/// typically indexes an ensemble member; `index` a position within the path.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    /// Standard normal variate number `index` (Box-Muller over one block).
    double normal(std::uint64_t index) const;

    /// Fills `out` with normals at indices first, first+1, ...
    void fill_normals(std::uint64_t first, Vec& out) const;

    /// Uniform variate in (0, 1].
    double uniform(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::array<std::uint32_t, 4> raw_block(std::uint64_t block) const;

    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace coopstab
