#include "alphagp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alphagp {

std::vector<double> AverageTieRanks(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i) + j) / 2.0 + 1.0;
    for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> PearsonCorr(std::span<const double> a,
                                  std::span<const double> b) {
  const int n = static_cast<int>(a.size());
  if (n < 2 || static_cast<int>(b.size()) != n) return std::nullopt;
  double ma = Mean(a), mb = Mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> SampleStd(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return std::nullopt;
  double m = Mean(values);
  double ss = 0.0;
  for (double v : values) {
    double d = v - m;
    ss += d * d;
  }
  return std::sqrt(ss / (n - 1));
}

double Mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

}  // namespace alphagp
