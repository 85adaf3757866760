// Counter-based random number generation.  Every draw is a pure function of
// (seed, stream, counter), so Monte-Carlo workers can consume disjoint
// streams in any order and still produce bit-identical aggregates.

#pragma once

#include <cstdint>

namespace fblab::rng {

// SplitMix64 finalizer (Stafford mix 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Three chained mixing rounds over (seed, stream, counter).
constexpr std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (stream + 0xd1b54a32d192ed03ULL));
    h = mix64(h ^ (counter + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

// Substream namespaces.  A stream id packs (kind << 56) | index so that the
// message bits, channel noise, and initialization draws of one experiment
// never collide.
enum class StreamKind : std::uint64_t {
    message = 1,
    noise = 2,
    init = 3,
    construction = 4,
    train_noise = 5,
    train_message = 6,
};

constexpr std::uint64_t stream_id(StreamKind kind, std::uint64_t index) {
    return (static_cast<std::uint64_t>(kind) << 56) | index;
}

// Uniform double in [0, 1).
constexpr double uniform(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t counter) {
    return static_cast<double>(hash3(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as input to a logarithm.
constexpr double uniform_pos(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) {
    return static_cast<double>((hash3(seed, stream, counter) >> 11) + 1) * 0x1.0p-53;
}

// i-th standard normal draw of a stream, via Box-Muller on counters
// (2*(i>>1), 2*(i>>1)+1).
double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t i);

// i-th uniform bit of a stream (64 bits per hash).
constexpr int bit(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
    return static_cast<int>((hash3(seed, stream, i >> 6) >> (i & 63)) & 1);
}

}  // namespace fblab::rng
