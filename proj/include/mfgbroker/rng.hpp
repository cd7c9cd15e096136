#pragma once

#include <cmath>
#include <cstdint>

namespace mfgb {

// Counter-based pseudo-random streams. Every draw is a pure function of
// (seed, stream, path, counter), so path i's draws do not depend on how work
// is scheduled across threads. The mixer is the splitmix64 finalizer applied
// to a keyed counter.

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t key3(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t path) {
    std::uint64_t k = mix64(seed + 0x9e3779b97f4a7c15ULL);
    k = mix64(k ^ (stream + 0x9e3779b97f4a7c15ULL));
    k = mix64(k ^ (path + 0x9e3779b97f4a7c15ULL));
    return k;
}

}  // namespace detail

// One substream: a stateless indexed source of uniforms and standard normals.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t path)
        : key_(detail::key3(seed, stream, path)) {}

    // Uniform in (0, 1), never exactly 0.
    double uniform(std::uint64_t counter) const {
        const std::uint64_t bits =
            detail::mix64(key_ ^ (counter * 0xd1342543de82ef95ULL + 1));
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller on two keyed uniforms.
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::uint64_t key_;
};

// Stream ids used across the simulator; private streams for the finite-N game
// are offset by the trader index.
enum StreamId : std::uint64_t {
    kStreamAlpha = 0,     // common signal W^alpha
    kStreamPrivate = 1,   // private signal W^I
    kStreamPrice = 2,     // price noise W^S
    kStreamControl = 3,   // random controls / perturbation directions
    kStreamTypes = 4,     // trader type draws
    kStreamFiniteN = 16,  // base for per-trader private streams
};

}  // namespace mfgb
