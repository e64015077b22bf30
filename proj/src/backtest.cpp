#include "alphagp/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "alphagp/errors.hpp"

namespace alphagp {
namespace {

// Splits avail cash over the deficits as equally as possible: everyone
// gets deficit + adjust for one shared adjust, and stocks whose share
// would go negative drop out (water-filling). deficits and the result are
// parallel to stocks; a zero buy means no fill.
std::vector<double> AllocateBuys(double avail,
                                 const std::vector<int>& stocks,
                                 const std::vector<double>& deficits) {
  std::vector<bool> live(stocks.size(), true);
  int n_live = static_cast<int>(stocks.size());
  while (n_live > 0) {
    double total = 0.0;
    for (std::size_t k = 0; k < stocks.size(); ++k)
      if (live[k]) total += deficits[k];
    const double adjust = (avail - total) / n_live;
    bool dropped = false;
    for (std::size_t k = 0; k < stocks.size(); ++k) {
      if (live[k] && deficits[k] + adjust < 0.0) {
        live[k] = false;
        --n_live;
        dropped = true;
      }
    }
    if (dropped) continue;
    std::vector<double> buys(stocks.size(), 0.0);
    for (std::size_t k = 0; k < stocks.size(); ++k)
      if (live[k]) buys[k] = deficits[k] + adjust;
    return buys;
  }
  return std::vector<double>(stocks.size(), 0.0);
}

double SampleStd(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace

PerfSummary Summarize(const BacktestReport& report) {
  return {report.ar, report.sr};
}

BacktestReport RunBacktest(const LinearAlphaModel& model,
                           const MarketPanel& panel,
                           std::span<const AlphaMatrix> features,
                           DateRange test_range,
                           const BacktestOptions& options) {
  if (options.hold_size < 1) throw InputError("hold_size must be at least 1");
  if (options.rebalance_days < 1)
    throw InputError("rebalance_days must be at least 1");
  if (options.cost_rate < 0.0 || options.cost_rate >= 1.0)
    throw InputError("cost_rate must lie in [0, 1)");
  if (static_cast<int>(features.size()) !=
      static_cast<int>(model.coefficients.size()))
    throw InputError("feature count does not match the model");
  for (const AlphaMatrix& f : features)
    if (f.values.Rows() != panel.NumDates() ||
        f.values.Cols() != panel.NumStocks())
      throw InputError("feature shape does not match the panel");
  if (test_range.first < 0 || test_range.last >= panel.NumDates() ||
      test_range.first > test_range.last)
    throw BacktestError(BacktestError::Kind::DateRangeOutOfPanel,
                        "test range does not fit the panel");
  if (test_range.first <= model.train_range.last)
    throw InputError("test range must start after the training range");

  const Matrix& vwap = panel.Field("vwap");
  const int n = panel.NumStocks();

  BacktestReport report;
  report.test_range = test_range;
  report.daily_value.reserve(test_range.Length() + 1);
  report.daily_value.push_back(1.0);

  double cash = 1.0;
  std::vector<double> shares(n, 0.0);
  std::vector<double> last_mark(n, Missing());

  for (int t = test_range.first; t <= test_range.last; ++t) {
    for (int i = 0; i < n; ++i)
      if (!IsMissing(vwap.At(t, i))) last_mark[i] = vwap.At(t, i);

    if ((t - test_range.first) % options.rebalance_days == 0) {
      RebalanceRecord rec;
      rec.date_index = t;

      const std::vector<double> scores = PredictScores(model, features, t - 1);
      std::vector<int> eligible;
      for (int i = 0; i < n; ++i)
        if (!IsMissing(scores[i]) && panel.InUniverse(t, i) && !panel.st.At(t, i))
          eligible.push_back(i);
      std::sort(eligible.begin(), eligible.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
      });
      if (static_cast<int>(eligible.size()) > options.hold_size)
        eligible.resize(options.hold_size);
      rec.target = eligible;
      std::vector<bool> in_target(n, false);
      for (int i : rec.target) in_target[i] = true;

      // Exits: everything outside the target leaves at today's vwap when
      // the market allows, and is carried to the next rebalance when not.
      for (int i = 0; i < n; ++i) {
        if (shares[i] <= 0.0 || in_target[i]) continue;
        const double price = vwap.At(t, i);
        const bool sellable = !IsMissing(price) && !panel.limit_down.At(t, i) &&
                              !panel.suspended.At(t, i);
        if (!sellable) {
          rec.blocked_sells.push_back(i);
          continue;
        }
        const double notional = shares[i] * price;
        const double fee = notional * options.cost_rate;
        cash += notional - fee;
        report.cost_paid += fee;
        shares[i] = 0.0;
        rec.sells.push_back({i, notional, price, fee});
      }

      // Buys: fill every priced target to an equal slice of the invested
      // value; blocked slices spread over the rest.
      std::vector<int> grp;
      for (int i : rec.target)
        if (!IsMissing(vwap.At(t, i))) grp.push_back(i);
      if (grp.empty()) {
        rec.insufficient_eligible = true;
      } else {
        double invested = cash;
        for (int i : grp) invested += shares[i] * vwap.At(t, i);
        const double per = invested / static_cast<double>(grp.size());
        for (int i : grp) {
          const double price = vwap.At(t, i);
          const double held = shares[i] * price;
          const bool sellable =
              !panel.limit_down.At(t, i) && !panel.suspended.At(t, i);
          if (held > per && sellable) {
            const double notional = held - per;
            const double fee = notional * options.cost_rate;
            cash += notional - fee;
            report.cost_paid += fee;
            shares[i] -= notional / price;
            rec.sells.push_back({i, notional, price, fee});
          }
        }
        std::vector<int> want;
        std::vector<double> deficits;
        for (int i : grp) {
          const double held = shares[i] * vwap.At(t, i);
          if (held >= per) continue;
          if (panel.limit_up.At(t, i)) {
            rec.blocked_buys.push_back(i);
          } else {
            want.push_back(i);
            deficits.push_back(per - held);
          }
        }
        if (want.empty()) {
          if (!rec.blocked_buys.empty() || grp.size() < rec.target.size())
            rec.insufficient_eligible = true;
        } else {
          std::vector<std::pair<int, double>> fills;
          for (std::size_t k = 0; k < want.size(); ++k) fills.push_back({want[k], 0.0});
          const std::vector<double> buys =
              AllocateBuys(cash / (1.0 + options.cost_rate), want, deficits);
          for (std::size_t k = 0; k < want.size(); ++k) fills[k].second = buys[k];
          std::sort(fills.begin(), fills.end());
          for (const auto& [i, notional] : fills) {
            if (notional <= 0.0) continue;
            const double price = vwap.At(t, i);
            const double fee = notional * options.cost_rate;
            cash -= notional + fee;
            report.cost_paid += fee;
            shares[i] += notional / price;
            rec.buys.push_back({i, notional, price, fee});
          }
        }
      }
      report.rebalances.push_back(std::move(rec));
    }

    double value = cash;
    for (int i = 0; i < n; ++i)
      if (shares[i] > 0.0) value += shares[i] * last_mark[i];
    report.daily_value.push_back(value);
  }

  const int n_days = test_range.Length();
  report.ar = std::pow(report.daily_value.back(), 252.0 / n_days) - 1.0;
  std::vector<double> rets(n_days);
  for (int k = 0; k < n_days; ++k)
    rets[k] = report.daily_value[k + 1] / report.daily_value[k] - 1.0;
  report.sigma_p = SampleStd(rets) * std::sqrt(252.0);
  if (report.sigma_p > 0.0) report.sr = report.ar / report.sigma_p;
  return report;
}

}  // namespace alphagp
