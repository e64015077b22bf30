#include "alphagp/rng.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace alphagp {

int Rng::UniformInt(int lo, int hi) {
  if (lo > hi) {
    throw std::invalid_argument("UniformInt: empty range");
  }
  std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (range == 0) {
    // lo == INT_MIN, hi == INT_MAX; every draw is valid.
    return static_cast<int>(NextU64());
  }
  std::uint64_t x, r;
  do {
    x = NextU64();
    r = x % range;
  } while (x - r > std::numeric_limits<std::uint64_t>::max() - (range - 1));
  return static_cast<int>(static_cast<std::int64_t>(lo) + static_cast<std::int64_t>(r));
}

double Rng::UniformReal() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::UniformReal(double lo, double hi) {
  return lo + (hi - lo) * UniformReal();
}

std::vector<int> Rng::SampleWithoutReplacement(int n, int k) {
  if (k < 0 || k > n) {
    throw std::invalid_argument("SampleWithoutReplacement: k out of range");
  }
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    int j = UniformInt(i, n - 1);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace alphagp
