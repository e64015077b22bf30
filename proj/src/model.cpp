#include "alphagp/model.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "alphagp/errors.hpp"

namespace alphagp {
namespace {

// A date's cross-section is degenerate below this spread; z-scores there
// are undefined rather than amplified noise.
constexpr double kMinCrossStd = 1e-12;
constexpr double kPivotTolerance = 1e-10;

void ZScoreRow(const Matrix& values, int t, std::vector<double>& out) {
  const int n = values.Cols();
  out.assign(n, Missing());
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const double v = values.At(t, i);
    if (!IsMissing(v)) {
      sum += v;
      ++count;
    }
  }
  if (count < 2) return;
  const double mean = sum / count;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = values.At(t, i);
    if (!IsMissing(v)) ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / (count - 1));
  if (sd < kMinCrossStd) return;
  for (int i = 0; i < n; ++i) {
    const double v = values.At(t, i);
    if (!IsMissing(v)) out[i] = (v - mean) / sd;
  }
}

// Gaussian elimination with partial pivoting on the (p+1)-dim normal
// equations. Returns the column whose pivot degenerates, or -1 and the
// solution in b.
int SolveNormalEquations(std::vector<std::vector<double>>& a,
                         std::vector<double>& b) {
  const int dim = static_cast<int>(b.size());
  for (int col = 0; col < dim; ++col) {
    int pivot = col;
    for (int r = col + 1; r < dim; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < kPivotTolerance) return col;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < dim; ++r) {
      const double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (int c = col; c < dim; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  for (int col = dim - 1; col >= 0; --col) {
    double acc = b[col];
    for (int c = col + 1; c < dim; ++c) acc -= a[col][c] * b[c];
    b[col] = acc / a[col][col];
  }
  return -1;
}

void CheckFeatureShapes(std::span<const AlphaMatrix> features,
                        const Matrix& reference) {
  if (features.empty()) throw InputError("model needs at least one feature");
  for (const AlphaMatrix& f : features)
    if (!f.values.SameShape(reference))
      throw InputError("feature shapes disagree");
}

}  // namespace

LinearAlphaModel FitLinearModel(std::span<const AlphaMatrix> features,
                                const ForwardReturns& fwd,
                                DateRange train_range) {
  CheckFeatureShapes(features, fwd.values);
  if (train_range.first < 0 || train_range.last >= fwd.values.Rows() ||
      train_range.first > train_range.last)
    throw InputError("train range does not fit the panel");

  const int p = static_cast<int>(features.size());
  const int dim = p + 1;  // intercept first
  std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
  std::vector<double> xty(dim, 0.0);
  std::vector<std::vector<double>> z(p);
  std::vector<double> row(dim, 1.0);
  long long n_rows = 0;

  for (int t = train_range.first; t <= train_range.last; ++t) {
    for (int f = 0; f < p; ++f) ZScoreRow(features[f].values, t, z[f]);
    for (int i = 0; i < fwd.values.Cols(); ++i) {
      const double y = fwd.values.At(t, i);
      if (IsMissing(y)) continue;
      bool complete = true;
      for (int f = 0; f < p && complete; ++f) complete = !IsMissing(z[f][i]);
      if (!complete) continue;
      for (int f = 0; f < p; ++f) row[f + 1] = z[f][i];
      for (int a = 0; a < dim; ++a) {
        for (int b = a; b < dim; ++b) xtx[a][b] += row[a] * row[b];
        xty[a] += row[a] * y;
      }
      ++n_rows;
    }
  }
  if (n_rows == 0)
    throw ModelError(ModelError::Kind::NoTrainingRows,
                     "no training cell has all features and a forward return");

  // Normalize so the pivot tolerance is scale-free, and mirror the upper
  // triangle before eliminating.
  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      xtx[a][b] /= static_cast<double>(n_rows);
      xtx[b][a] = xtx[a][b];
    }
    xty[a] /= static_cast<double>(n_rows);
  }
  const int bad = SolveNormalEquations(xtx, xty);
  if (bad >= 0) {
    const std::string which =
        bad == 0 ? "the intercept column"
                 : "feature " + std::to_string(bad - 1);
    throw ModelError(ModelError::Kind::SingularDesign,
                     which + " is collinear with an earlier column");
  }

  LinearAlphaModel model;
  model.feature_exprs.reserve(p);
  for (const AlphaMatrix& f : features) model.feature_exprs.push_back(f.source);
  model.intercept = xty[0];
  model.coefficients.assign(xty.begin() + 1, xty.end());
  model.train_range = train_range;
  return model;
}

std::vector<double> PredictScores(const LinearAlphaModel& model,
                                  std::span<const AlphaMatrix> features,
                                  int date_index) {
  if (static_cast<int>(features.size()) !=
      static_cast<int>(model.coefficients.size()))
    throw InputError("feature count does not match the model");
  CheckFeatureShapes(features, features[0].values);
  if (date_index < 0 || date_index >= features[0].values.Rows())
    throw InputError("prediction date is outside the feature matrices");

  const int n = features[0].values.Cols();
  std::vector<double> scores(n, model.intercept);
  std::vector<double> z;
  for (std::size_t f = 0; f < features.size(); ++f) {
    ZScoreRow(features[f].values, date_index, z);
    for (int i = 0; i < n; ++i) {
      if (IsMissing(scores[i])) continue;
      if (IsMissing(z[i]))
        scores[i] = Missing();
      else
        scores[i] += model.coefficients[f] * z[i];
    }
  }
  return scores;
}

}  // namespace alphagp
