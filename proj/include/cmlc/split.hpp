#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace cmlc {

// Shuffle recipe recorded in run manifests. Both mt19937_64 and seed_seq are
// fully specified by the C++ standard, so partitions reproduce across builds
// and platforms.
inline constexpr const char* kShuffleAlgorithm =
    "mt19937_64(seed_seq{seed_lo,seed_hi,index_lo,index_hi}) + Fisher-Yates with "
    "rejection-sampled bounded draws";

struct SplitSpec {
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t split_index = 0;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;  // sorted ascending
  std::vector<std::size_t> test;   // sorted ascending
};

// Engine for split `stream` of the experiment seeded by `seed`.
std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t stream);

// Uniform draw from {0, ..., bound-1} by rejection sampling; bound >= 1.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// Deterministic uniform partition of {0..n_total-1}: Fisher-Yates shuffle,
// first n_train indices become the training set.
TrainTestSplit random_split(std::size_t n_total, const SplitSpec& spec);

}  // namespace cmlc
