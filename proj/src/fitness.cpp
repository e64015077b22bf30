#include "alphagp/fitness.hpp"

#include <cmath>

#include "alphagp/stats.hpp"

namespace alphagp {

namespace {

// Cells where both rows have values.
void CompletePairs(std::span<const double> a, std::span<const double> b,
                   std::vector<double>& xa, std::vector<double>& xb) {
  xa.clear();
  xb.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!IsMissing(a[i]) && !IsMissing(b[i])) {
      xa.push_back(a[i]);
      xb.push_back(b[i]);
    }
  }
}

std::optional<double> PairCorr(std::span<const double> a,
                               std::span<const double> b, int min_count,
                               bool spearman) {
  thread_local std::vector<double> xa, xb;
  CompletePairs(a, b, xa, xb);
  if (static_cast<int>(xa.size()) < min_count) return std::nullopt;
  if (spearman) {
    std::vector<double> ra = AverageTieRanks(xa);
    std::vector<double> rb = AverageTieRanks(xb);
    return PearsonCorr(ra, rb);
  }
  return PearsonCorr(xa, xb);
}

std::span<const double> MatrixRow(const Matrix& m, int t) {
  return {m.Data().data() + static_cast<std::size_t>(t) * m.Cols(),
          static_cast<std::size_t>(m.Cols())};
}

std::optional<double> SeriesIr(const std::vector<double>& series) {
  std::optional<double> sd = SampleStd(series);
  if (!sd || *sd <= 0.0) return std::nullopt;
  return Mean(series) / *sd;
}

}  // namespace

std::optional<double> DailyPearson(std::span<const double> alpha,
                                   std::span<const double> fwd,
                                   int min_count) {
  return PairCorr(alpha, fwd, min_count, /*spearman=*/false);
}

std::optional<double> DailySpearman(std::span<const double> alpha,
                                    std::span<const double> fwd,
                                    int min_count) {
  return PairCorr(alpha, fwd, min_count, /*spearman=*/true);
}

FitnessReport ComputeFitness(const AlphaMatrix& alpha,
                             const ForwardReturns& fwd, DateRange range,
                             const FitnessOptions& options) {
  if (!alpha.values.SameShape(fwd.values)) {
    throw InputError("alpha and forward returns have different shapes");
  }
  if (range.first < 0 || range.last >= alpha.values.Rows() ||
      range.first > range.last) {
    throw InputError("date range outside panel");
  }

  FitnessReport report;
  for (int t = range.first; t <= range.last; ++t) {
    std::span<const double> a = MatrixRow(alpha.values, t);
    std::span<const double> r = MatrixRow(fwd.values, t);
    std::optional<double> ic = DailyPearson(a, r, options.min_cross_section);
    std::optional<double> rank_ic =
        DailySpearman(a, r, options.min_cross_section);
    // The Pearson and Spearman skip conditions coincide: the same complete
    // pairs are used, and a constant side has constant ranks.
    if (!ic || !rank_ic) continue;
    report.date_indices.push_back(t);
    report.daily_ic.push_back(*ic);
    report.daily_rank_ic.push_back(*rank_ic);
  }
  if (report.date_indices.empty()) {
    throw FitnessError(FitnessError::Kind::NoValidDates,
                       "no date in range has a usable cross-section");
  }
  report.n_dates_used = static_cast<int>(report.date_indices.size());
  if (report.n_dates_used < options.min_dates) {
    throw FitnessError(FitnessError::Kind::NoValidDates,
                       "only " + std::to_string(report.n_dates_used) +
                           " usable dates, fewer than the floor of " +
                           std::to_string(options.min_dates));
  }

  double raw_ic = Mean(report.daily_ic);
  report.sign = raw_ic < 0.0 ? -1 : 1;
  if (report.sign < 0) {
    for (double& v : report.daily_ic) v = -v;
    for (double& v : report.daily_rank_ic) v = -v;
  }
  report.ic = Mean(report.daily_ic);
  report.rank_ic = Mean(report.daily_rank_ic);
  report.icir = SeriesIr(report.daily_ic);
  report.rank_icir = SeriesIr(report.daily_rank_ic);
  return report;
}

CorrelationSummary AlphaCorrelationMatrix(std::span<const AlphaMatrix> alphas,
                                          DateRange range,
                                          const FitnessOptions& options) {
  const int n = static_cast<int>(alphas.size());
  if (n < 2) {
    throw InputError("correlation matrix needs at least two alphas");
  }
  for (int i = 1; i < n; ++i) {
    if (!alphas[i].values.SameShape(alphas[0].values)) {
      throw InputError("alphas cover different panel shapes");
    }
  }
  if (range.first < 0 || range.last >= alphas[0].values.Rows() ||
      range.first > range.last) {
    throw InputError("date range outside panel");
  }

  CorrelationSummary summary;
  summary.corr = Matrix(n, n, 1.0);
  double abs_sum = 0.0;
  int n_pairs = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double sum = 0.0;
      int count = 0;
      for (int t = range.first; t <= range.last; ++t) {
        std::optional<double> rho = DailySpearman(
            MatrixRow(alphas[i].values, t), MatrixRow(alphas[j].values, t),
            options.min_cross_section);
        if (rho) {
          sum += *rho;
          ++count;
        }
      }
      if (count == 0) {
        throw FitnessError(FitnessError::Kind::NoValidDates,
                           "alpha pair " + std::to_string(i) + "/" +
                               std::to_string(j) + " shares no usable date");
      }
      double value = sum / count;
      summary.corr.At(i, j) = value;
      summary.corr.At(j, i) = value;
      abs_sum += std::fabs(value);
      ++n_pairs;
    }
  }
  summary.mean_abs_off_diagonal = n_pairs > 0 ? abs_sum / n_pairs : 0.0;
  return summary;
}

}  // namespace alphagp
