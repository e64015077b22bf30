#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace alphagp {

// Deterministic RNG used by every randomized component. mt19937_64 output
// is pinned by the standard; the derived draws below are hand-rolled
// because std::uniform_int_distribution and friends are not bit-stable
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  int UniformInt(int lo, int hi);

  // Uniform in [0, 1) with 53 random bits.
  double UniformReal();

  // Uniform in [lo, hi).
  double UniformReal(double lo, double hi);

  bool Bernoulli(double p) { return UniformReal() < p; }

  // First k entries of a Fisher-Yates pass over 0..n-1.
  std::vector<int> SampleWithoutReplacement(int n, int k);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
      int j = UniformInt(0, i);
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace alphagp
