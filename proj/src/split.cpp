#include "cmlc/split.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "cmlc/errors.hpp"

namespace cmlc {

std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Reject draws below 2^64 mod bound so the remainder is exactly uniform.
  const std::uint64_t threshold = (0ull - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

TrainTestSplit random_split(std::size_t n_total, const SplitSpec& spec) {
  if (spec.n_train == 0 || spec.n_train >= n_total)
    throw config_error("n_train must satisfy 0 < n_train < n_total (got n_train=" +
                       std::to_string(spec.n_train) + ", n_total=" + std::to_string(n_total) +
                       ")");

  std::vector<std::size_t> order(n_total);
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto rng = split_rng(spec.seed, spec.split_index);
  for (std::size_t i = n_total - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i + 1));
    std::swap(order[i], order[j]);
  }

  TrainTestSplit split;
  split.train.assign(order.begin(), order.begin() + spec.n_train);
  split.test.assign(order.begin() + spec.n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace cmlc
