#pragma once

#include <cstdint>
#include <random>

namespace riffle {

// Every random computation is split over a fixed number of virtual streams.
// The partition depends only on the seed and the stream count, never on the
// number of worker threads.
inline constexpr std::uint32_t kDefaultStreamCount = 1024;

using StreamRng = std::mt19937_64;

// Generator for stream `stream` of a run seeded with `seed`. `domain`
// separates unrelated uses of the same seed (e.g. deck draws vs. histograms).
inline StreamRng make_stream_rng(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t domain = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(domain >> 32)};
  return StreamRng(seq);
}

// SplitMix64 finalizer; derives child seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Number of work items assigned to stream `stream` when `total` items are
// spread over `streams` streams: contiguous, the first `total % streams` get one extra.
inline std::uint64_t stream_share(std::uint64_t total, std::uint32_t streams, std::uint32_t stream) {
  return total / streams + (stream < total % streams ? 1 : 0);
}

// Index of the first item owned by `stream`.
inline std::uint64_t stream_offset(std::uint64_t total, std::uint32_t streams, std::uint32_t stream) {
  const std::uint64_t base = total / streams, extra = total % streams;
  return base * stream + (stream < extra ? stream : extra);
}

}  // namespace riffle
