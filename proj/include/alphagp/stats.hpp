#pragma once

#include <optional>
#include <span>
#include <vector>

namespace alphagp {

// 1-based ranks with ties sharing their average rank:
// {30, 10, 20} -> {3, 1, 2}; {5, 5, 1} -> {2.5, 2.5, 1}.
std::vector<double> AverageTieRanks(std::span<const double> values);

// Pearson correlation; nullopt when fewer than two points or either side
// has zero variance.
std::optional<double> PearsonCorr(std::span<const double> a,
                                  std::span<const double> b);

// Sample standard deviation (n - 1); nullopt when fewer than two points.
std::optional<double> SampleStd(std::span<const double> values);

double Mean(std::span<const double> values);

}  // namespace alphagp
