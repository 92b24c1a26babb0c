#pragma once

#include <bit>
#include <cstdint>

#include "zerobias/core.hpp"

namespace zerobias {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Stafford mix13 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// SplittableRandom-style gamma conditioning: odd, and with enough bit
// transitions that the additive sequence mixes well.
inline constexpr std::uint64_t mix_gamma(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xFF51AFD7ED558CCDULL;
    z ^= z >> 33;
    z *= 0xC4CEB9FE1A85EC53ULL;
    z ^= z >> 33;
    z |= 1ULL;
    if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xAAAAAAAAAAAAAAAAULL;
    return z;
}

}  // namespace detail

/// Reproducible uniform stream. Counter-based (SplitMix64 core): the state is
/// an additive counter and the per-stream increment is derived from the
/// stream id, so distinct (seed, stream_id) pairs give independent sequences
/// without coordination. Identical (seed, stream_id) replays identically.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed),
          stream_id_(stream_id),
          state_(detail::mix64(seed ^ detail::mix64(stream_id + detail::kGoldenGamma))),
          gamma_(detail::mix_gamma(stream_id * detail::kGoldenGamma + seed)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        state_ += gamma_;
        return detail::mix64(state_);
    }

    /// Uniform on [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi). Throws InvalidRange when lo >= hi.
    double uniform(double lo, double hi) {
        if (!(lo < hi)) throw InvalidRange("uniform draw requires lo < hi");
        double v = lo + next_double() * (hi - lo);
        if (v >= hi) v = std::nextafter(hi, lo);  // guard rare rounding up to hi
        return v;
    }

    AgentVector uniform_vector(std::size_t dim, double lo, double hi) {
        if (dim == 0) throw InvalidRange("uniform vector needs dimension >= 1");
        if (!(lo < hi)) throw InvalidRange("uniform draw requires lo < hi");
        AgentVector out(dim);
        for (std::size_t d = 0; d < dim; ++d) out[d] = uniform(lo, hi);
        return out;
    }

    /// Independent substream addressed by (seed, derived id). Does not
    /// consume state from this stream.
    RandomStream substream(std::uint64_t id) const {
        return RandomStream(seed_, detail::mix64(stream_id_ + detail::kGoldenGamma) ^ id);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
    std::uint64_t gamma_;
};

/// Fresh i.i.d. uniform coordinates on [lo, hi).
inline AgentVector draw_uniform(RandomStream& stream, std::size_t dim, double lo, double hi) {
    return stream.uniform_vector(dim, lo, hi);
}

}  // namespace zerobias
