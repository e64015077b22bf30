#pragma once

#include <optional>
#include <span>
#include <vector>

#include "alphagp/model.hpp"
#include "alphagp/panel.hpp"

namespace alphagp {

struct BacktestOptions {
  int hold_size = 10;
  int rebalance_days = 5;
  double cost_rate = 0.0006;  // charged on notional, each side
};

// One executed trade: notional is the cash value at the vwap fill price,
// fee the transaction cost on top of (sell) or in addition to (buy) it.
struct TradeFill {
  int stock = 0;
  double notional = 0.0;
  double price = 0.0;
  double fee = 0.0;
};

struct RebalanceRecord {
  int date_index = 0;
  std::vector<int> target;        // chosen stocks, best score first
  std::vector<TradeFill> sells;
  std::vector<TradeFill> buys;
  std::vector<int> blocked_sells;  // exits refused by limit-down/suspension
  std::vector<int> blocked_buys;   // targets refused by limit-up
  // Cash was left to buy but nothing was buyable this rebalance.
  bool insufficient_eligible = false;
};

struct BacktestReport {
  DateRange test_range;
  // Close-of-day portfolio value per test date, preceded by the initial
  // 1.0, so daily_value.size() == test_range.Length() + 1.
  std::vector<double> daily_value;
  std::vector<RebalanceRecord> rebalances;
  double ar = 0.0;       // (final / initial)^(252 / n_days) - 1
  double sigma_p = 0.0;  // sample std of daily returns, annualized
  std::optional<double> sr;  // ar / sigma_p, absent when sigma_p is zero
  double cost_paid = 0.0;    // total fees across the run
};

struct PerfSummary {
  double ar = 0.0;
  std::optional<double> sr;
};

PerfSummary Summarize(const BacktestReport& report);

// Simulates a top-N equal-weight portfolio over test_range.
//
// Every rebalance_days (anchored at the first test date) the model ranks
// stocks by the previous date's scores; the top hold_size stocks with a
// defined score that are in the universe and not ST form the target.
// Positions outside the target are sold at the day's vwap unless the
// stock is limit-down or suspended, in which case they are carried and
// retried at the next rebalance; ST holdings leave the target and are
// force-sold by the same rule. Buys fill each target to an equal share of
// the invested value at the day's vwap; a limit-up target cannot be
// bought and its share is spread equally over the remaining buyable
// targets (never beyond them). When nothing is buyable the cash stays in
// the portfolio and the rebalance is flagged insufficient_eligible.
// Costs are cost_rate * notional on every fill, both sides. Between
// rebalances positions are marked at vwap, or at the last seen vwap while
// a stock halts.
//
// Throws InputError when the options are out of range, the features do
// not match the model, or test_range does not start after the model's
// training range; BacktestError: DateRangeOutOfPanel when test_range
// falls outside the panel.
BacktestReport RunBacktest(const LinearAlphaModel& model,
                           const MarketPanel& panel,
                           std::span<const AlphaMatrix> features,
                           DateRange test_range,
                           const BacktestOptions& options = {});

}  // namespace alphagp
