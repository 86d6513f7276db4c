#pragma once

#include <cmath>
#include <cstdint>

namespace qdcart {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Derives an independent stream key from a seed and up to two tags.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag_a,
                                   std::uint64_t tag_b = 0) {
    std::uint64_t s = seed;
    std::uint64_t k = detail::splitmix64(s);
    s = k ^ (tag_a * 0xD6E8FEB86659FD93ULL);
    k = detail::splitmix64(s);
    s = k ^ (tag_b * 0xCA5A826395121157ULL);
    return detail::splitmix64(s);
}

/// Counter-based substream of random draws for one lattice cell. Each
/// (stream key, cell) pair owns an unbounded deterministic sequence, so
/// generation is reproducible under any parallel schedule and rejection
/// samplers may consume a variable number of draws.
class CellStream {
public:
    CellStream(std::uint64_t stream_key, std::uint64_t cell)
        : state_(stream_key ^ (0x9E3779B97F4A7C15ULL * (cell + 1))) {}

    /// Uniform draw strictly inside (0, 1).
    double uniform() {
        const std::uint64_t bits = detail::splitmix64(state_);
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; draws two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace qdcart
