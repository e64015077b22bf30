#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "alphagp/backtest.hpp"
#include "alphagp/model.hpp"
#include "alphagp/parser.hpp"
#include "test_util.hpp"

using namespace alphagp;

namespace {

const Dsl& StockDsl() {
  static Dsl dsl = MakeDefaultDsl();
  return dsl;
}

// Panel with every price field pinned to the vwap table; a missing entry
// halts the whole stock-day. Flags are set by the caller afterwards.
MarketPanel TablePanel(const std::vector<std::vector<double>>& vwap,
                       const std::string& id) {
  const int n_dates = static_cast<int>(vwap.size());
  const int n_stocks = static_cast<int>(vwap[0].size());
  MarketPanel panel;
  panel.id = id;
  for (int t = 0; t < n_dates; ++t)
    panel.dates.push_back(testutil::DateForIndex(t));
  for (int i = 0; i < n_stocks; ++i)
    panel.stocks.push_back("S" + std::to_string(i));
  panel.fields.assign(PanelFieldNames().size(), Matrix(n_dates, n_stocks));
  panel.limit_up = BoolMatrix(n_dates, n_stocks);
  panel.limit_down = BoolMatrix(n_dates, n_stocks);
  panel.suspended = BoolMatrix(n_dates, n_stocks);
  panel.st = BoolMatrix(n_dates, n_stocks);
  for (int t = 0; t < n_dates; ++t) {
    for (int i = 0; i < n_stocks; ++i) {
      const double price = vwap[t][i];
      if (IsMissing(price)) continue;
      for (int f = 0; f <= 4; ++f) panel.fields[f].At(t, i) = price;
      panel.fields[5].At(t, i) = 1000.0;
      panel.fields[6].At(t, i) = price * 1000.0;
    }
  }
  FinalizePanel(panel);
  return panel;
}

// Twelve dates, three stocks, one feature, two rebalances. The second
// rebalance blocks every stock differently: S0 suspends mid-hold, S1
// turns ST, S2 goes limit-up.
struct LedgerCase {
  MarketPanel panel;
  ForwardReturns fwd;
  std::vector<AlphaMatrix> features;
  LinearAlphaModel model;
};

const LedgerCase& Ledger() {
  static const LedgerCase fixture = [] {
    const double na = Missing();
    LedgerCase l;
    l.panel = TablePanel(
        {{100, 100, 100},
         {100, 100, 100},
         {100, 100, 100},
         {100, 100, 100},
         {100, 100, 100},
         {100, 100, 100},
         {120, 100, 80},
         {100, 120, 80},
         {80, 100, 120},
         {120, 80, 100},
         {na, 90, 110},
         {130, 95, 105}},
        "ledger");
    l.panel.suspended.Set(10, 0, true);
    l.panel.st.Set(10, 1, true);
    l.panel.st.Set(11, 1, true);
    l.panel.limit_up.Set(10, 2, true);
    l.fwd = ComputeForwardReturns(l.panel, 5);

    Matrix f(12, 3);
    for (int t = 0; t < 12; ++t)
      for (int i = 0; i < 3; ++i) f.At(t, i) = 0.3 - 0.1 * i;
    for (int t = 0; t <= 3; ++t)
      for (int i = 0; i < 3; ++i) f.At(t, i) = l.fwd.values.At(t, i);
    f.At(4, 0) = 0.9;
    f.At(4, 1) = 0.5;
    f.At(4, 2) = 0.1;
    f.At(9, 0) = 0.1;
    f.At(9, 1) = 0.5;
    f.At(9, 2) = 0.9;
    l.features.push_back(
        testutil::AsAlpha(std::move(f), Parse("close", StockDsl()), l.panel.id));
    l.model = FitLinearModel(l.features, l.fwd, {0, 3});
    return l;
  }();
  return fixture;
}

// Frozen by tests/oracles/backtest_ledger_oracle.py.
constexpr double kLedgerCoef = 0.19999999999999996;
constexpr double kLedgerValues[8] = {
    1.0,
    0.9994003597841296,
    1.0993403957625425,
    1.0993403957625425,
    0.8994603238057166,
    0.9994003597841294,
    1.0491005396761943,
    1.0990705576654007,
};
constexpr double kLedgerCost = 0.0008694783130121927;
constexpr double kLedgerAr = 28.986146812279728;
constexpr double kLedgerSigma = 1.5590962054909427;
constexpr double kLedgerSr = 18.59163450606456;
constexpr double kLedgerBuyNotional = 0.4997001798920648;
constexpr double kLedgerSellNotional = 0.4497301619028583;

// Sixty dates, twelve stocks, two random features, flags sprinkled in.
struct Scenario {
  MarketPanel panel;
  ForwardReturns fwd;
  std::vector<AlphaMatrix> features;
  LinearAlphaModel model;
  DateRange test;
  BacktestOptions options;
};

Scenario RandomScenario(std::uint64_t seed) {
  Scenario s;
  s.panel = testutil::RandomPanel(60, 12, seed, 0.02);
  Rng rng(seed * 7919 + 11);
  for (int t = 0; t < 60; ++t) {
    for (int i = 0; i < 12; ++i) {
      const double u = rng.UniformReal();
      if (u < 0.03) {
        s.panel.limit_up.Set(t, i, true);
      } else if (u < 0.06) {
        s.panel.limit_down.Set(t, i, true);
      } else if (u < 0.08) {
        s.panel.suspended.Set(t, i, true);
      }
    }
  }
  const int st_stock = static_cast<int>(seed % 12);
  for (int t = 40; t < 60; ++t) s.panel.st.Set(t, st_stock, true);

  Matrix f1 = testutil::RandomValues(60, 12, rng, 0.05);
  Matrix f2 = testutil::RandomValues(60, 12, rng, 0.05);
  s.features.push_back(
      testutil::AsAlpha(std::move(f1), Parse("close", StockDsl()), s.panel.id));
  s.features.push_back(
      testutil::AsAlpha(std::move(f2), Parse("open", StockDsl()), s.panel.id));
  s.fwd = ComputeForwardReturns(s.panel, 5);
  s.model = FitLinearModel(s.features, s.fwd, {5, 30});
  s.test = {31, 55};
  s.options = {4, 7, 0.002};
  return s;
}

void CheckSameRecord(const RebalanceRecord& a, const RebalanceRecord& b) {
  CHECK(a.date_index == b.date_index);
  CHECK(a.target == b.target);
  CHECK(a.blocked_sells == b.blocked_sells);
  CHECK(a.blocked_buys == b.blocked_buys);
  CHECK(a.insufficient_eligible == b.insufficient_eligible);
  REQUIRE(a.sells.size() == b.sells.size());
  REQUIRE(a.buys.size() == b.buys.size());
  for (std::size_t k = 0; k < a.sells.size(); ++k) {
    CHECK(a.sells[k].stock == b.sells[k].stock);
    CHECK(a.sells[k].notional == b.sells[k].notional);
    CHECK(a.sells[k].price == b.sells[k].price);
  }
  for (std::size_t k = 0; k < a.buys.size(); ++k) {
    CHECK(a.buys[k].stock == b.buys[k].stock);
    CHECK(a.buys[k].notional == b.buys[k].notional);
    CHECK(a.buys[k].price == b.buys[k].price);
  }
}

// Same per-date standardization convention as the library, restated for
// the orthogonality check.
std::vector<double> ZRow(const Matrix& m, int t) {
  std::vector<double> out(m.Cols(), Missing());
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < m.Cols(); ++i)
    if (!IsMissing(m.At(t, i))) {
      sum += m.At(t, i);
      ++count;
    }
  if (count < 2) return out;
  const double mean = sum / count;
  double ss = 0.0;
  for (int i = 0; i < m.Cols(); ++i)
    if (!IsMissing(m.At(t, i)))
      ss += (m.At(t, i) - mean) * (m.At(t, i) - mean);
  const double sd = std::sqrt(ss / (count - 1));
  if (sd < 1e-12) return out;
  for (int i = 0; i < m.Cols(); ++i)
    if (!IsMissing(m.At(t, i))) out[i] = (m.At(t, i) - mean) / sd;
  return out;
}

}  // namespace

TEST_CASE("the ledger model recovers the planted coefficient") {
  const LedgerCase& l = Ledger();
  REQUIRE(l.model.coefficients.size() == 1);
  CHECK(std::fabs(l.model.coefficients[0] - kLedgerCoef) < 1e-12);
  CHECK(std::fabs(l.model.intercept) < 1e-12);
  CHECK(l.model.train_range.first == 0);
  CHECK(l.model.train_range.last == 3);
  REQUIRE(l.model.feature_exprs.size() == 1);
}

TEST_CASE("prediction scores on the ledger dates") {
  const LedgerCase& l = Ledger();
  const std::vector<double> d4 = PredictScores(l.model, l.features, 4);
  const std::vector<double> d9 = PredictScores(l.model, l.features, 9);
  REQUIRE(d4.size() == 3);
  CHECK(std::fabs(d4[0] - kLedgerCoef) < 1e-12);
  CHECK(std::fabs(d4[1]) < 1e-12);
  CHECK(std::fabs(d4[2] + kLedgerCoef) < 1e-12);
  CHECK(std::fabs(d9[0] + kLedgerCoef) < 1e-12);
  CHECK(std::fabs(d9[1]) < 1e-12);
  CHECK(std::fabs(d9[2] - kLedgerCoef) < 1e-12);
}

TEST_CASE("hand ledger replays to ten decimal places") {
  const LedgerCase& l = Ledger();
  const BacktestReport report =
      RunBacktest(l.model, l.panel, l.features, {5, 11}, {2, 5, 0.0006});

  REQUIRE(report.daily_value.size() == 8);
  for (int k = 0; k < 8; ++k) {
    CAPTURE(k);
    CHECK(std::fabs(report.daily_value[k] - kLedgerValues[k]) < 1e-10);
  }
  CHECK(std::fabs(report.cost_paid - kLedgerCost) < 1e-10);
  CHECK(std::fabs(report.ar - kLedgerAr) < 1e-10);
  CHECK(std::fabs(report.sigma_p - kLedgerSigma) < 1e-10);
  REQUIRE(report.sr.has_value());
  CHECK(std::fabs(*report.sr - kLedgerSr) < 1e-10);

  REQUIRE(report.rebalances.size() == 2);
  const RebalanceRecord& first = report.rebalances[0];
  CHECK(first.date_index == 5);
  CHECK(first.target == std::vector<int>{0, 1});
  CHECK(first.sells.empty());
  REQUIRE(first.buys.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(first.buys[k].stock == k);
    CHECK(first.buys[k].price == 100.0);
    CHECK(std::fabs(first.buys[k].notional - kLedgerBuyNotional) < 1e-12);
  }
  CHECK(first.blocked_sells.empty());
  CHECK(first.blocked_buys.empty());
  CHECK_FALSE(first.insufficient_eligible);

  const RebalanceRecord& second = report.rebalances[1];
  CHECK(second.date_index == 10);
  CHECK(second.target == std::vector<int>{2});
  REQUIRE(second.sells.size() == 1);
  CHECK(second.sells[0].stock == 1);
  CHECK(second.sells[0].price == 90.0);
  CHECK(std::fabs(second.sells[0].notional - kLedgerSellNotional) < 1e-12);
  CHECK(second.buys.empty());
  CHECK(second.blocked_sells == std::vector<int>{0});
  CHECK(second.blocked_buys == std::vector<int>{2});
  CHECK(second.insufficient_eligible);
}

TEST_CASE("a feature equal to an already standardized target fits exactly") {
  Matrix f(5, 3);
  for (int t = 0; t < 5; ++t) {
    f.At(t, t % 3) = -1.0;
    f.At(t, (t + 1) % 3) = 0.0;
    f.At(t, (t + 2) % 3) = 1.0;
  }
  ForwardReturns fwd;
  fwd.horizon_days = 5;
  fwd.values = f;
  std::vector<AlphaMatrix> features = {
      testutil::AsAlpha(std::move(f), Parse("close", StockDsl()), "p")};
  const LinearAlphaModel model = FitLinearModel(features, fwd, {0, 4});
  REQUIRE(model.coefficients.size() == 1);
  CHECK(std::fabs(model.coefficients[0] - 1.0) < 1e-8);
  CHECK(std::fabs(model.intercept) < 1e-8);
}

TEST_CASE("ols residuals are orthogonal to the design") {
  Rng rng(314);
  std::vector<Matrix> raw;
  for (int f = 0; f < 3; ++f)
    raw.push_back(testutil::RandomValues(50, 30, rng, 0.1));
  ForwardReturns fwd;
  fwd.horizon_days = 5;
  fwd.values = testutil::RandomValues(50, 30, rng, 0.1);
  std::vector<AlphaMatrix> features;
  for (const Matrix& m : raw)
    features.push_back(testutil::AsAlpha(m, Parse("close", StockDsl()), "p"));
  const LinearAlphaModel model = FitLinearModel(features, fwd, {0, 49});

  double sum_r = 0.0;
  double sum_rz[3] = {0.0, 0.0, 0.0};
  int n_rows = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> z;
    for (const Matrix& m : raw) z.push_back(ZRow(m, t));
    for (int i = 0; i < 30; ++i) {
      const double y = fwd.values.At(t, i);
      if (IsMissing(y) || IsMissing(z[0][i]) || IsMissing(z[1][i]) ||
          IsMissing(z[2][i]))
        continue;
      double resid = y - model.intercept;
      for (int f = 0; f < 3; ++f) resid -= model.coefficients[f] * z[f][i];
      sum_r += resid;
      for (int f = 0; f < 3; ++f) sum_rz[f] += resid * z[f][i];
      ++n_rows;
    }
  }
  CHECK(n_rows > 900);
  CHECK(std::fabs(sum_r) < 1e-8);
  for (int f = 0; f < 3; ++f) CHECK(std::fabs(sum_rz[f]) < 1e-8);
}

TEST_CASE("single-feature fit matches the closed-form slope") {
  Rng rng(2718);
  Matrix raw = testutil::RandomValues(20, 10, rng);
  ForwardReturns fwd;
  fwd.horizon_days = 5;
  fwd.values = testutil::RandomValues(20, 10, rng);
  std::vector<AlphaMatrix> features = {
      testutil::AsAlpha(raw, Parse("close", StockDsl()), "p")};
  const LinearAlphaModel model = FitLinearModel(features, fwd, {0, 19});

  double sz = 0.0, sy = 0.0, szz = 0.0, szy = 0.0;
  int n_rows = 0;
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> z = ZRow(raw, t);
    for (int i = 0; i < 10; ++i) {
      if (IsMissing(z[i]) || IsMissing(fwd.values.At(t, i))) continue;
      const double y = fwd.values.At(t, i);
      sz += z[i];
      sy += y;
      szz += z[i] * z[i];
      szy += z[i] * y;
      ++n_rows;
    }
  }
  const double mean_z = sz / n_rows;
  const double mean_y = sy / n_rows;
  const double coef =
      (szy - n_rows * mean_z * mean_y) / (szz - n_rows * mean_z * mean_z);
  const double intercept = mean_y - coef * mean_z;
  REQUIRE(model.coefficients.size() == 1);
  CHECK(std::fabs(model.coefficients[0] - coef) < 1e-8);
  CHECK(std::fabs(model.intercept - intercept) < 1e-8);
}

TEST_CASE("collinear features are rejected with the culprit named") {
  Rng rng(99);
  Matrix f1 = testutil::RandomValues(10, 8, rng);
  Matrix affine(10, 8);
  for (int t = 0; t < 10; ++t)
    for (int i = 0; i < 8; ++i) affine.At(t, i) = 2.0 * f1.At(t, i) + 3.0;
  ForwardReturns fwd;
  fwd.values = testutil::RandomValues(10, 8, rng);
  const AlphaMatrix a1 = testutil::AsAlpha(f1, Parse("close", StockDsl()), "p");

  SUBCASE("identical copies") {
    std::vector<AlphaMatrix> features = {a1, a1};
    try {
      FitLinearModel(features, fwd, {0, 9});
      FAIL("expected SingularDesign");
    } catch (const ModelError& e) {
      CHECK(e.kind() == ModelError::Kind::SingularDesign);
      CHECK(std::string(e.what()).find("feature 1") != std::string::npos);
    }
  }
  SUBCASE("affine image standardizes to the same column") {
    std::vector<AlphaMatrix> features = {
        a1, testutil::AsAlpha(affine, Parse("open", StockDsl()), "p")};
    try {
      FitLinearModel(features, fwd, {0, 9});
      FAIL("expected SingularDesign");
    } catch (const ModelError& e) {
      CHECK(e.kind() == ModelError::Kind::SingularDesign);
      CHECK(std::string(e.what()).find("feature 1") != std::string::npos);
    }
  }
}

TEST_CASE("degenerate training data reports NoTrainingRows") {
  Rng rng(5);
  ForwardReturns fwd;
  fwd.values = testutil::RandomValues(6, 5, rng);

  SUBCASE("constant feature never standardizes") {
    Matrix flat(6, 5, 5.0);
    std::vector<AlphaMatrix> features = {
        testutil::AsAlpha(std::move(flat), Parse("close", StockDsl()), "p")};
    try {
      FitLinearModel(features, fwd, {0, 5});
      FAIL("expected NoTrainingRows");
    } catch (const ModelError& e) {
      CHECK(e.kind() == ModelError::Kind::NoTrainingRows);
    }
  }
  SUBCASE("all-missing target") {
    std::vector<AlphaMatrix> features = {testutil::AsAlpha(
        testutil::RandomValues(6, 5, rng), Parse("close", StockDsl()), "p")};
    ForwardReturns empty;
    empty.values = Matrix(6, 5);
    try {
      FitLinearModel(features, empty, {0, 5});
      FAIL("expected NoTrainingRows");
    } catch (const ModelError& e) {
      CHECK(e.kind() == ModelError::Kind::NoTrainingRows);
    }
  }
}

TEST_CASE("fit input validation") {
  Rng rng(6);
  ForwardReturns fwd;
  fwd.values = testutil::RandomValues(6, 5, rng);
  const AlphaMatrix good = testutil::AsAlpha(testutil::RandomValues(6, 5, rng),
                                             Parse("close", StockDsl()), "p");

  CHECK_THROWS_AS(FitLinearModel({}, fwd, {0, 5}), InputError);
  const AlphaMatrix narrow = testutil::AsAlpha(
      testutil::RandomValues(6, 4, rng), Parse("close", StockDsl()), "p");
  std::vector<AlphaMatrix> mismatched = {good, narrow};
  CHECK_THROWS_AS(FitLinearModel(mismatched, fwd, {0, 5}), InputError);
  std::vector<AlphaMatrix> ok = {good};
  CHECK_THROWS_AS(FitLinearModel(ok, fwd, {0, 6}), InputError);
  CHECK_THROWS_AS(FitLinearModel(ok, fwd, {4, 2}), InputError);
  CHECK_THROWS_AS(FitLinearModel(ok, fwd, {-1, 5}), InputError);
}

TEST_CASE("prediction by hand") {
  LinearAlphaModel model;
  model.coefficients = {0.5};
  model.intercept = 0.25;
  model.train_range = {0, 0};

  Matrix f(3, 3);
  f.At(0, 0) = 3.0;
  f.At(0, 1) = 5.0;
  f.At(0, 2) = 7.0;
  for (int i = 0; i < 3; ++i) f.At(1, i) = 4.0;
  f.At(2, 1) = 7.0;
  std::vector<AlphaMatrix> features = {
      testutil::AsAlpha(std::move(f), Parse("close", StockDsl()), "p")};

  SUBCASE("z-scores feed the linear form") {
    const std::vector<double> s = PredictScores(model, features, 0);
    CHECK(std::fabs(s[0] + 0.25) < 1e-12);
    CHECK(std::fabs(s[1] - 0.25) < 1e-12);
    CHECK(std::fabs(s[2] - 0.75) < 1e-12);
  }
  SUBCASE("a missing cell drops only that stock") {
    features[0].values.At(0, 1) = Missing();
    const std::vector<double> s = PredictScores(model, features, 0);
    const double half = 0.5 / std::sqrt(2.0);
    CHECK(std::fabs(s[0] - (0.25 - half)) < 1e-12);
    CHECK(IsMissing(s[1]));
    CHECK(std::fabs(s[2] - (0.25 + half)) < 1e-12);
  }
  SUBCASE("degenerate cross-sections blank the date") {
    for (double v : PredictScores(model, features, 1)) CHECK(IsMissing(v));
    for (double v : PredictScores(model, features, 2)) CHECK(IsMissing(v));
  }
  SUBCASE("count and range validation") {
    std::vector<AlphaMatrix> two = {features[0], features[0]};
    CHECK_THROWS_AS(PredictScores(model, two, 0), InputError);
    CHECK_THROWS_AS(PredictScores(model, features, -1), InputError);
    CHECK_THROWS_AS(PredictScores(model, features, 3), InputError);
  }
}

TEST_CASE("overweight positions are sold down to the equal slice") {
  MarketPanel panel = TablePanel(
      {{100, 100},
       {100, 100},
       {100, 100},
       {100, 100},
       {100, 100},
       {100, 100},
       {150, 100},
       {150, 100},
       {150, 100},
       {150, 100},
       {200, 100},
       {200, 100}},
      "downsize");
  const ForwardReturns fwd = ComputeForwardReturns(panel, 5);
  Matrix f(12, 2);
  for (int t = 0; t < 12; ++t) {
    f.At(t, 0) = 1.0;
    f.At(t, 1) = 2.0;
  }
  std::vector<AlphaMatrix> features = {
      testutil::AsAlpha(std::move(f), Parse("close", StockDsl()), panel.id)};
  const LinearAlphaModel model = FitLinearModel(features, fwd, {0, 3});
  const BacktestReport report =
      RunBacktest(model, panel, features, {5, 11}, {2, 5, 0.0});

  const double expected[8] = {1.0, 1.0, 1.25, 1.25, 1.25, 1.25, 1.5, 1.5};
  REQUIRE(report.daily_value.size() == 8);
  for (int k = 0; k < 8; ++k) {
    CAPTURE(k);
    CHECK(std::fabs(report.daily_value[k] - expected[k]) < 1e-12);
  }
  REQUIRE(report.rebalances.size() == 2);
  const RebalanceRecord& second = report.rebalances[1];
  REQUIRE(second.sells.size() == 1);
  CHECK(second.sells[0].stock == 0);
  CHECK(second.sells[0].price == 200.0);
  CHECK(std::fabs(second.sells[0].notional - 0.25) < 1e-12);
  REQUIRE(second.buys.size() == 1);
  CHECK(second.buys[0].stock == 1);
  CHECK(second.buys[0].price == 100.0);
  CHECK(std::fabs(second.buys[0].notional - 0.25) < 1e-12);
  CHECK(second.blocked_sells.empty());
  CHECK(second.blocked_buys.empty());
  CHECK_FALSE(second.insufficient_eligible);
  CHECK(report.cost_paid == 0.0);
}

TEST_CASE("the trade log replays into the daily values") {
  for (int seed = 11; seed <= 20; ++seed) {
    CAPTURE(seed);
    const Scenario s = RandomScenario(static_cast<std::uint64_t>(seed));
    const BacktestReport report =
        RunBacktest(s.model, s.panel, s.features, s.test, s.options);
    REQUIRE(static_cast<int>(report.daily_value.size()) == s.test.Length() + 1);
    CHECK(report.daily_value[0] == 1.0);

    const Matrix& vwap = s.panel.Field("vwap");
    const int n = s.panel.NumStocks();
    double cash = 1.0;
    double fees = 0.0;
    std::vector<double> shares(n, 0.0);
    std::vector<double> mark(n, Missing());
    std::size_t next_rec = 0;

    for (int t = s.test.first; t <= s.test.last; ++t) {
      for (int i = 0; i < n; ++i)
        if (!IsMissing(vwap.At(t, i))) mark[i] = vwap.At(t, i);

      if (next_rec < report.rebalances.size() &&
          report.rebalances[next_rec].date_index == t) {
        const RebalanceRecord& rec = report.rebalances[next_rec++];
        for (const TradeFill& fill : rec.sells) {
          CHECK(std::fabs(fill.fee - fill.notional * s.options.cost_rate) <
                1e-12);
          shares[fill.stock] -= fill.notional / fill.price;
          CHECK(shares[fill.stock] >= -1e-12);
          cash += fill.notional - fill.fee;
          fees += fill.fee;
        }
        for (const TradeFill& fill : rec.buys) {
          CHECK(fill.notional > 0.0);
          CHECK(std::fabs(fill.fee - fill.notional * s.options.cost_rate) <
                1e-12);
          shares[fill.stock] += fill.notional / fill.price;
          cash -= fill.notional + fill.fee;
          fees += fill.fee;
        }
        CHECK(cash >= -1e-9);
      }

      double position_value = 0.0;
      for (int i = 0; i < n; ++i)
        if (std::fabs(shares[i]) > 1e-13) position_value += shares[i] * mark[i];
      const double value = cash + position_value;
      CAPTURE(t);
      CHECK(std::fabs(value - report.daily_value[t - s.test.first + 1]) <
            1e-10);
      CHECK(position_value <= value + 1e-9);
    }
    CHECK(next_rec == report.rebalances.size());
    CHECK(std::fabs(fees - report.cost_paid) < 1e-12);

    if (report.sr.has_value()) {
      CHECK(report.sigma_p > 0.0);
      CHECK(*report.sr == report.ar / report.sigma_p);
    } else {
      CHECK(report.sigma_p == 0.0);
    }
  }
}

TEST_CASE("steady growth matches the closed-form annualization") {
  std::vector<std::vector<double>> vwap(14, std::vector<double>(3));
  for (int t = 0; t < 14; ++t)
    for (int i = 0; i < 3; ++i) vwap[t][i] = 100.0 * std::pow(1.0001, t);
  MarketPanel panel = TablePanel(vwap, "growth");
  const ForwardReturns fwd = ComputeForwardReturns(panel, 5);
  Matrix f(14, 3);
  for (int t = 0; t < 14; ++t)
    for (int i = 0; i < 3; ++i) f.At(t, i) = 1.0 + i;
  std::vector<AlphaMatrix> features = {
      testutil::AsAlpha(std::move(f), Parse("close", StockDsl()), panel.id)};
  const LinearAlphaModel model = FitLinearModel(features, fwd, {0, 3});
  const BacktestReport report =
      RunBacktest(model, panel, features, {4, 13}, {1, 20, 0.0});

  // One uninterrupted position riding a constant 1bp daily drift; the
  // entry day itself returns zero, so nine growth days span ten dates.
  REQUIRE(report.rebalances.size() == 1);
  CHECK(report.rebalances[0].buys.size() == 1);
  for (int k = 1; k < static_cast<int>(report.daily_value.size()) - 1; ++k) {
    const double ret = report.daily_value[k + 1] / report.daily_value[k] - 1.0;
    CHECK(std::fabs(ret - 0.0001) < 1e-12);
  }
  const double final_value = std::pow(1.0001, 9.0);
  const double want_ar = std::pow(final_value, 252.0 / 10.0) - 1.0;
  std::vector<double> rets(10, 0.0001);
  rets[0] = 0.0;
  double mean = 0.0;
  for (double r : rets) mean += r;
  mean /= 10.0;
  double ss = 0.0;
  for (double r : rets) ss += (r - mean) * (r - mean);
  const double want_sigma = std::sqrt(ss / 9.0) * std::sqrt(252.0);
  CHECK(std::fabs(report.ar - want_ar) < 1e-9);
  CHECK(std::fabs(report.sigma_p - want_sigma) < 1e-9);
  REQUIRE(report.sr.has_value());
  CHECK(std::fabs(*report.sr - want_ar / want_sigma) < 1e-6);
}

TEST_CASE("later panel data cannot reach earlier decisions") {
  const Scenario base = RandomScenario(42);
  const BacktestReport ref =
      RunBacktest(base.model, base.panel, base.features, base.test,
                  base.options);

  for (int cutoff : {36, 45}) {
    CAPTURE(cutoff);
    Scenario alt = RandomScenario(42);
    Rng noise(1000 + cutoff);
    for (int t = cutoff + 1; t < alt.panel.NumDates(); ++t) {
      for (int i = 0; i < alt.panel.NumStocks(); ++i) {
        for (std::size_t f = 0; f < alt.panel.fields.size(); ++f)
          if (!IsMissing(alt.panel.fields[f].At(t, i)) && f != 5u)
            alt.panel.fields[f].At(t, i) *= 1.37;
        alt.panel.limit_up.Set(t, i, noise.UniformReal() < 0.5);
        alt.panel.suspended.Set(t, i, noise.UniformReal() < 0.2);
        for (AlphaMatrix& feature : alt.features)
          feature.values.At(t, i) = noise.UniformReal(-1.0, 1.0);
      }
    }
    const BacktestReport out =
        RunBacktest(alt.model, alt.panel, alt.features, alt.test, alt.options);

    const int keep = cutoff - alt.test.first + 1;
    for (int k = 0; k <= keep; ++k) {
      CAPTURE(k);
      CHECK(out.daily_value[k] == ref.daily_value[k]);
    }
    std::size_t n_kept = 0;
    for (const RebalanceRecord& rec : ref.rebalances) {
      if (rec.date_index > cutoff) continue;
      REQUIRE(n_kept < out.rebalances.size());
      CheckSameRecord(out.rebalances[n_kept], rec);
      ++n_kept;
    }
    CHECK(n_kept >= 1);
  }
}

TEST_CASE("transaction costs bite monotonically") {
  Scenario s = RandomScenario(7);
  BacktestOptions cheap = s.options, mid = s.options, dear = s.options;
  cheap.cost_rate = 0.0;
  mid.cost_rate = 0.0006;
  dear.cost_rate = 0.005;
  const BacktestReport r0 =
      RunBacktest(s.model, s.panel, s.features, s.test, cheap);
  const BacktestReport r1 =
      RunBacktest(s.model, s.panel, s.features, s.test, mid);
  const BacktestReport r2 =
      RunBacktest(s.model, s.panel, s.features, s.test, dear);

  CHECK(r0.cost_paid == 0.0);
  CHECK(r1.cost_paid > 0.0);
  CHECK(r2.cost_paid > r1.cost_paid);
  CHECK(r0.daily_value.back() > r1.daily_value.back());
  CHECK(r1.daily_value.back() > r2.daily_value.back());
}

TEST_CASE("flat prices with no costs hold value constant") {
  MarketPanel panel = TablePanel(std::vector<std::vector<double>>(
                                     10, std::vector<double>(3, 100.0)),
                                 "flat");
  const ForwardReturns fwd = ComputeForwardReturns(panel, 5);
  Matrix f(10, 3);
  for (int t = 0; t < 10; ++t)
    for (int i = 0; i < 3; ++i) f.At(t, i) = 1.0 + i;
  std::vector<AlphaMatrix> features = {
      testutil::AsAlpha(std::move(f), Parse("close", StockDsl()), panel.id)};
  const LinearAlphaModel model = FitLinearModel(features, fwd, {0, 3});
  CHECK(std::fabs(model.coefficients[0]) < 1e-12);
  CHECK(std::fabs(model.intercept) < 1e-12);

  SUBCASE("whole range") {
    const BacktestReport report =
        RunBacktest(model, panel, features, {4, 9}, {2, 3, 0.0});
    for (double v : report.daily_value) CHECK(v == 1.0);
    CHECK(report.ar == 0.0);
    CHECK(report.sigma_p == 0.0);
    CHECK_FALSE(report.sr.has_value());
    const PerfSummary summary = Summarize(report);
    CHECK(summary.ar == 0.0);
    CHECK_FALSE(summary.sr.has_value());
  }
  SUBCASE("a single test date has no sharpe") {
    const BacktestReport report =
        RunBacktest(model, panel, features, {4, 4}, {2, 3, 0.0});
    CHECK(report.daily_value.size() == 2);
    CHECK(report.ar == 0.0);
    CHECK(report.sigma_p == 0.0);
    CHECK_FALSE(report.sr.has_value());
  }
}

TEST_CASE("backtest validation") {
  const LedgerCase& l = Ledger();
  CHECK_THROWS_AS(
      RunBacktest(l.model, l.panel, l.features, {3, 11}, {2, 5, 0.0006}),
      InputError);
  CHECK_THROWS_AS(
      RunBacktest(l.model, l.panel, l.features, {5, 11}, {0, 5, 0.0006}),
      InputError);
  CHECK_THROWS_AS(
      RunBacktest(l.model, l.panel, l.features, {5, 11}, {2, 0, 0.0006}),
      InputError);
  CHECK_THROWS_AS(
      RunBacktest(l.model, l.panel, l.features, {5, 11}, {2, 5, -0.1}),
      InputError);
  CHECK_THROWS_AS(
      RunBacktest(l.model, l.panel, l.features, {5, 11}, {2, 5, 1.0}),
      InputError);
  std::vector<AlphaMatrix> two = {l.features[0], l.features[0]};
  CHECK_THROWS_AS(RunBacktest(l.model, l.panel, two, {5, 11}, {2, 5, 0.0006}),
                  InputError);

  try {
    RunBacktest(l.model, l.panel, l.features, {5, 12}, {2, 5, 0.0006});
    FAIL("expected DateRangeOutOfPanel");
  } catch (const BacktestError& e) {
    CHECK(e.kind() == BacktestError::Kind::DateRangeOutOfPanel);
  }
  CHECK_THROWS_AS(
      RunBacktest(l.model, l.panel, l.features, {11, 5}, {2, 5, 0.0006}),
      BacktestError);
}
