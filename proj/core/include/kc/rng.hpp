#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace kc {

// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Seeded random stream. All draws go through explicit rejection sampling on
// top of mt19937_64 so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform(std::size_t n);
  // Uniform integer in [lo, hi], inclusive.
  std::size_t uniform_between(std::size_t lo, std::size_t hi);
  // Uniform double in [0, 1).
  double uniform01();

  Rng fork(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform(i)]);
    }
  }

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[uniform(items.size())];
  }

  // k distinct elements drawn uniformly, returned in source order.
  template <typename T>
  std::vector<T> sample(std::span<const T> items, std::size_t k) {
    auto idx = sample_indices(items.size(), k);
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(items[i]);
    return out;
  }

  // k distinct indices from [0, n), ascending. k is clamped to n.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace kc
