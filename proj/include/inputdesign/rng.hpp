#ifndef INPUTDESIGN_RNG_HPP
#define INPUTDESIGN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace inputdesign {

// Splittable counter-style generator built on the splitmix64 mixing function.
// All randomized algorithms in the library draw from this generator, so a
// (seed, stream) pair reproduces bit-identical results on any platform with
// IEEE-754 doubles.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on (0, 1]; never returns 0 so log() below is safe
    double uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // standard normal via the Box-Muller transform (cosine branch only);
    // two uniforms per draw, fixed transform for cross-platform reproducibility
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    // deterministic derivation of an independent stream, e.g. one per
    // rounding candidate or per Monte Carlo run
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

} // namespace inputdesign

#endif
