#include "alphagp/panel.hpp"

#include <algorithm>
#include <set>

namespace alphagp {

const std::vector<std::string>& PanelFieldNames() {
  static const std::vector<std::string> names = {
      "open", "high", "low", "close", "vwap", "volume", "turnover", "returns"};
  return names;
}

const Matrix& MarketPanel::Field(const std::string& name) const {
  const auto& names = PanelFieldNames();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return fields[i];
  }
  throw PanelError(PanelError::Kind::MissingField, "no such field: " + name);
}

const Matrix& MarketPanel::Field(int field_index) const {
  if (field_index < 0 || field_index >= static_cast<int>(fields.size())) {
    throw PanelError(PanelError::Kind::MissingField,
                     "field index out of range: " + std::to_string(field_index));
  }
  return fields[field_index];
}

bool MarketPanel::InUniverse(int t, int i) const {
  static const int kClose = 3;
  return !IsMissing(fields[kClose].At(t, i)) && !suspended.At(t, i);
}

int MarketPanel::DateIndex(const std::string& date) const {
  for (int t = 0; t < NumDates(); ++t) {
    if (dates[t] == date) return t;
  }
  return -1;
}

namespace {

bool IsIsoDate(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace

void FinalizePanel(MarketPanel& panel) {
  const int n_dates = panel.NumDates();
  const int n_stocks = panel.NumStocks();
  if (n_dates == 0 || n_stocks == 0) {
    throw PanelError(PanelError::Kind::EmptyInput, "panel has no cells");
  }
  if (panel.id.empty()) panel.id = "panel";

  for (int t = 0; t < n_dates; ++t) {
    if (!IsIsoDate(panel.dates[t])) {
      throw PanelError(PanelError::Kind::MalformedRow,
                       "bad ISO date: " + panel.dates[t]);
    }
    if (t > 0 && !(panel.dates[t - 1] < panel.dates[t])) {
      throw PanelError(PanelError::Kind::MalformedRow,
                       "dates not strictly increasing at " + panel.dates[t]);
    }
  }
  {
    std::set<std::string> seen;
    for (const auto& s : panel.stocks) {
      if (s.empty()) {
        throw PanelError(PanelError::Kind::MalformedRow, "empty stock id");
      }
      if (!seen.insert(s).second) {
        throw PanelError(PanelError::Kind::DuplicateCell,
                         "duplicate stock id: " + s);
      }
    }
  }

  const auto& names = PanelFieldNames();
  if (panel.fields.size() != names.size()) {
    throw PanelError(PanelError::Kind::MalformedRow,
                     "panel must carry " + std::to_string(names.size()) +
                         " field matrices");
  }
  auto check_shape = [&](int rows, int cols, const std::string& what) {
    if (rows != n_dates || cols != n_stocks) {
      throw PanelError(PanelError::Kind::MalformedRow,
                       what + " shape does not match panel axes");
    }
  };
  for (std::size_t f = 0; f < names.size(); ++f) {
    check_shape(panel.fields[f].Rows(), panel.fields[f].Cols(), names[f]);
  }
  check_shape(panel.limit_up.Rows(), panel.limit_up.Cols(), "limit_up");
  check_shape(panel.limit_down.Rows(), panel.limit_down.Cols(), "limit_down");
  check_shape(panel.suspended.Rows(), panel.suspended.Cols(), "suspended");
  check_shape(panel.st.Rows(), panel.st.Cols(), "st");

  // Prices and volume must be positive where present; nothing may be
  // infinite.
  for (std::size_t f = 0; f < names.size(); ++f) {
    if (names[f] == "returns") continue;
    bool positive_required = names[f] != "turnover";
    const Matrix& m = panel.fields[f];
    for (int t = 0; t < n_dates; ++t) {
      for (int i = 0; i < n_stocks; ++i) {
        double v = m.At(t, i);
        if (IsMissing(v)) continue;
        if (!std::isfinite(v) || (positive_required && v <= 0.0) || v < 0.0) {
          throw PanelError(PanelError::Kind::MalformedRow,
                           "bad " + names[f] + " value at " + panel.dates[t] +
                               "/" + panel.stocks[i]);
        }
      }
    }
  }

  const Matrix& close = panel.Field("close");
  Matrix returns(n_dates, n_stocks);
  for (int t = 1; t < n_dates; ++t) {
    for (int i = 0; i < n_stocks; ++i) {
      double prev = close.At(t - 1, i);
      double cur = close.At(t, i);
      if (!IsMissing(prev) && !IsMissing(cur)) {
        returns.At(t, i) = cur / prev - 1.0;
      }
    }
  }
  panel.fields[7] = std::move(returns);
}

ForwardReturns ComputeForwardReturns(const MarketPanel& panel,
                                     int horizon_days) {
  if (horizon_days < 1) {
    throw PanelError(PanelError::Kind::MalformedRow,
                     "horizon must be at least one day");
  }
  const Matrix& vwap = panel.Field("vwap");
  const int n_dates = panel.NumDates();
  const int n_stocks = panel.NumStocks();
  ForwardReturns fwd;
  fwd.horizon_days = horizon_days;
  fwd.values = Matrix(n_dates, n_stocks);
  for (int t = 0; t + horizon_days + 1 < n_dates; ++t) {
    for (int i = 0; i < n_stocks; ++i) {
      double entry = vwap.At(t + 1, i);
      double exit = vwap.At(t + horizon_days + 1, i);
      if (!IsMissing(entry) && !IsMissing(exit)) {
        fwd.values.At(t, i) = exit / entry - 1.0;
      }
    }
  }
  return fwd;
}

DateRange ResolveRange(const MarketPanel& panel, const std::string& begin,
                       const std::string& end) {
  int first = -1, last = -1;
  for (int t = 0; t < panel.NumDates(); ++t) {
    if (first < 0 && panel.dates[t] >= begin) first = t;
    if (panel.dates[t] <= end) last = t;
  }
  if (first < 0 || last < first) {
    throw PanelError(PanelError::Kind::EmptyInput,
                     "date range [" + begin + ", " + end +
                         "] selects no panel dates");
  }
  return {first, last};
}

}  // namespace alphagp
