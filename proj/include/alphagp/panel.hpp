#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "alphagp/errors.hpp"

namespace alphagp {

// Missing cells are quiet NaN. All panel arithmetic treats NaN as "no
// value"; infinities never appear in valid panels or alpha matrices.
inline double Missing() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool IsMissing(double x) { return std::isnan(x); }

// Dense dates x stocks matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = Missing())
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int Rows() const { return rows_; }
  int Cols() const { return cols_; }

  double& At(int t, int i) { return data_[static_cast<std::size_t>(t) * cols_ + i]; }
  double At(int t, int i) const {
    return data_[static_cast<std::size_t>(t) * cols_ + i];
  }

  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  const std::vector<double>& Data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

class BoolMatrix {
 public:
  BoolMatrix() = default;
  BoolMatrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, 0) {}

  int Rows() const { return rows_; }
  int Cols() const { return cols_; }

  void Set(int t, int i, bool value) {
    data_[static_cast<std::size_t>(t) * cols_ + i] = value ? 1 : 0;
  }
  bool At(int t, int i) const {
    return data_[static_cast<std::size_t>(t) * cols_ + i] != 0;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> data_;
};

// Closed index range [first, last] into a panel's date axis.
struct DateRange {
  int first = 0;
  int last = 0;

  int Length() const { return last - first + 1; }
};

// Names of the numeric fields every panel carries, in storage order.
// "returns" is derived from close on finalize and is not part of CSV I/O.
const std::vector<std::string>& PanelFieldNames();

// Daily panel: date axis, stock axis, one dense matrix per field, and four
// flag planes. Dates are strictly increasing ISO-8601 strings; stock ids
// are unique. Construct via synthesis, CSV load, or aggregate-init plus
// FinalizePanel.
struct MarketPanel {
  std::string id;
  std::vector<std::string> dates;
  std::vector<std::string> stocks;
  std::vector<Matrix> fields;  // parallel to PanelFieldNames()
  BoolMatrix limit_up;
  BoolMatrix limit_down;
  BoolMatrix suspended;
  BoolMatrix st;

  int NumDates() const { return static_cast<int>(dates.size()); }
  int NumStocks() const { return static_cast<int>(stocks.size()); }

  const Matrix& Field(const std::string& name) const;
  const Matrix& Field(int field_index) const;

  // Eligible cross-section membership: close present and not suspended.
  bool InUniverse(int t, int i) const;

  // Index of an exact ISO date, or -1.
  int DateIndex(const std::string& date) const;
};

// Derives returns from close, validates shapes, ordering, uniqueness, and
// positivity of prices and volume. Throws PanelError. Every constructor
// path funnels through this.
void FinalizePanel(MarketPanel& panel);

struct ForwardReturns {
  int horizon_days = 5;
  Matrix values;
};

// values(t, i) = vwap(t + h + 1, i) / vwap(t + 1, i) - 1: the return of an
// order filled at the next day's volume-weighted price and held h days.
// Missing when either fill is missing or t + h + 1 is past the panel.
ForwardReturns ComputeForwardReturns(const MarketPanel& panel,
                                     int horizon_days = 5);

// Resolves an ISO date pair to a closed index range: first index with
// date >= begin through last index with date <= end. Throws PanelError if
// the result is empty.
DateRange ResolveRange(const MarketPanel& panel, const std::string& begin,
                       const std::string& end);

}  // namespace alphagp
