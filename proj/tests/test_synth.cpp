#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "alphagp/evaluator.hpp"
#include "alphagp/fitness.hpp"
#include "alphagp/parser.hpp"
#include "alphagp/random_expr.hpp"
#include "alphagp/synth.hpp"
#include "test_util.hpp"

using namespace alphagp;

namespace {

const Dsl& StockDsl() {
  static Dsl dsl = MakeDefaultDsl();
  return dsl;
}

SynthSpec SmallSpec(std::uint64_t seed) {
  SynthSpec spec;
  spec.n_dates = 60;
  spec.n_stocks = 20;
  spec.seed = seed;
  return spec;
}

double PlantedIc(const std::string& target, double rho, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_dates = 250;
  spec.n_stocks = 100;
  spec.seed = seed;
  AlphaExpr expr = Parse(target, StockDsl());
  if (rho > 0.0) spec.plant = PlantSpec{expr, rho};
  MarketPanel panel = SynthPanel(spec, StockDsl());
  ForwardReturns fwd = ComputeForwardReturns(panel, 5);
  AlphaMatrix alpha = Evaluate(expr, panel, StockDsl());
  FitnessReport report =
      ComputeFitness(alpha, fwd, {0, panel.NumDates() - 1});
  return report.sign * report.ic;
}

}  // namespace

TEST_CASE("trading calendar skips weekends") {
  MarketPanel panel = SynthPanel(SmallSpec(1), StockDsl());
  // 2020-01-06 was a Monday.
  std::vector<std::string> want = {"2020-01-06", "2020-01-07", "2020-01-08",
                                   "2020-01-09", "2020-01-10", "2020-01-13",
                                   "2020-01-14", "2020-01-15", "2020-01-16",
                                   "2020-01-17"};
  for (std::size_t k = 0; k < want.size(); ++k) {
    CHECK(panel.dates[k] == want[k]);
  }
  CHECK(panel.NumDates() == 60);
  CHECK(panel.NumStocks() == 20);
  CHECK(panel.id == "synth-1");
}

TEST_CASE("calendar handles leap february and weekend starts") {
  SynthSpec spec = SmallSpec(2);
  spec.n_dates = 5;
  spec.start_date = "2020-02-26";
  MarketPanel panel = SynthPanel(spec, StockDsl());
  // 2020-02-29 fell on a Saturday.
  std::vector<std::string> want = {"2020-02-26", "2020-02-27", "2020-02-28",
                                   "2020-03-02", "2020-03-03"};
  CHECK(panel.dates == want);

  spec.start_date = "2020-01-04";  // a Saturday
  MarketPanel snapped = SynthPanel(spec, StockDsl());
  CHECK(snapped.dates[0] == "2020-01-06");

  spec.start_date = "2020-13-01";
  CHECK_THROWS_AS(SynthPanel(spec, StockDsl()), PanelError);
}

TEST_CASE("prices are coherent") {
  MarketPanel panel = SynthPanel(SmallSpec(3), StockDsl());
  const Matrix& open = panel.Field("open");
  const Matrix& high = panel.Field("high");
  const Matrix& low = panel.Field("low");
  const Matrix& close = panel.Field("close");
  const Matrix& vwap = panel.Field("vwap");
  const Matrix& volume = panel.Field("volume");
  const Matrix& turnover = panel.Field("turnover");
  const Matrix& returns = panel.Field("returns");
  for (int t = 0; t < panel.NumDates(); ++t) {
    for (int i = 0; i < panel.NumStocks(); ++i) {
      if (IsMissing(close.At(t, i))) continue;
      CHECK(low.At(t, i) > 0.0);
      CHECK(high.At(t, i) >= std::max(open.At(t, i), close.At(t, i)));
      CHECK(low.At(t, i) <= std::min(open.At(t, i), close.At(t, i)));
      CHECK(vwap.At(t, i) >= low.At(t, i));
      CHECK(vwap.At(t, i) <= high.At(t, i));
      CHECK(volume.At(t, i) >= 1.0);
      CHECK(volume.At(t, i) == std::round(volume.At(t, i)));
      CHECK(turnover.At(t, i) ==
            doctest::Approx(vwap.At(t, i) * volume.At(t, i)).epsilon(1e-12));
    }
  }
  // Returns follow the close path across a present pair.
  int checked = 0;
  for (int t = 1; t < panel.NumDates() && checked < 50; ++t) {
    for (int i = 0; i < panel.NumStocks() && checked < 50; ++i) {
      if (IsMissing(close.At(t, i)) || IsMissing(close.At(t - 1, i))) continue;
      CHECK(returns.At(t, i) ==
            doctest::Approx(close.At(t, i) / close.At(t - 1, i) - 1.0)
                .epsilon(1e-12));
      ++checked;
    }
  }
  CHECK(checked == 50);
}

TEST_CASE("same seed reproduces the panel bit for bit") {
  MarketPanel a = SynthPanel(SmallSpec(11), StockDsl());
  MarketPanel b = SynthPanel(SmallSpec(11), StockDsl());
  CHECK(a.dates == b.dates);
  CHECK(a.stocks == b.stocks);
  for (std::size_t f = 0; f < a.fields.size(); ++f) {
    CHECK(testutil::BitIdentical(a.fields[f], b.fields[f]));
  }

  MarketPanel c = SynthPanel(SmallSpec(12), StockDsl());
  bool any_diff = false;
  const Matrix& ac = a.Field("close");
  const Matrix& cc = c.Field("close");
  for (int t = 0; t < a.NumDates() && !any_diff; ++t) {
    for (int i = 0; i < a.NumStocks(); ++i) {
      if (IsMissing(ac.At(t, i)) != IsMissing(cc.At(t, i)) ||
          (!IsMissing(ac.At(t, i)) && ac.At(t, i) != cc.At(t, i))) {
        any_diff = true;
        break;
      }
    }
  }
  CHECK(any_diff);
}

TEST_CASE("flags behave") {
  SynthSpec spec = SmallSpec(21);
  spec.n_dates = 120;
  spec.suspended_rate = 0.05;
  spec.limit_up_rate = 0.05;
  spec.limit_down_rate = 0.05;
  spec.st_rate = 0.3;
  MarketPanel panel = SynthPanel(spec, StockDsl());

  int suspended_cells = 0, limit_cells = 0, st_stocks = 0;
  for (int i = 0; i < panel.NumStocks(); ++i) {
    bool seen_st = false;
    for (int t = 0; t < panel.NumDates(); ++t) {
      if (panel.suspended.At(t, i)) {
        ++suspended_cells;
        // No trading: no prices and no limit flags.
        for (const Matrix& field : panel.fields) {
          CHECK(IsMissing(field.At(t, i)));
        }
        CHECK(!panel.limit_up.At(t, i));
        CHECK(!panel.limit_down.At(t, i));
        CHECK(!panel.InUniverse(t, i));
      } else {
        CHECK(panel.InUniverse(t, i));
      }
      CHECK(!(panel.limit_up.At(t, i) && panel.limit_down.At(t, i)));
      if (panel.limit_up.At(t, i) || panel.limit_down.At(t, i)) ++limit_cells;
      // ST status never clears once entered.
      if (seen_st) CHECK(panel.st.At(t, i));
      seen_st = seen_st || panel.st.At(t, i);
    }
    if (seen_st) ++st_stocks;
  }
  CHECK(suspended_cells > 0);
  CHECK(limit_cells > 0);
  CHECK(st_stocks > 0);

  SynthSpec quiet = SmallSpec(22);
  quiet.suspended_rate = 0.0;
  quiet.limit_up_rate = 0.0;
  quiet.limit_down_rate = 0.0;
  quiet.st_rate = 0.0;
  MarketPanel calm = SynthPanel(quiet, StockDsl());
  for (int t = 0; t < calm.NumDates(); ++t) {
    for (int i = 0; i < calm.NumStocks(); ++i) {
      CHECK(!calm.suspended.At(t, i));
      CHECK(!calm.limit_up.At(t, i));
      CHECK(!calm.limit_down.At(t, i));
      CHECK(!calm.st.At(t, i));
      CHECK(!IsMissing(calm.Field("close").At(t, i)));
    }
  }
}

TEST_CASE("planted signal lands in the target band") {
  double ic = PlantedIc("neg(ts_mean(returns,5))", 0.3, 1);
  CHECK(ic >= 0.2);
  CHECK(ic <= 0.4);
}

TEST_CASE("planted signal strength is monotone in rho") {
  double low = PlantedIc("neg(ts_mean(returns,5))", 0.1, 1);
  double mid = PlantedIc("neg(ts_mean(returns,5))", 0.3, 1);
  double high = PlantedIc("neg(ts_mean(returns,5))", 0.5, 1);
  CHECK(low < mid);
  CHECK(mid < high);
  // And planting beats not planting at all.
  double null_ic = std::fabs(PlantedIc("neg(ts_mean(returns,5))", 0.0, 1));
  CHECK(null_ic < low);
}

TEST_CASE("unplanted panels carry no signal") {
  SynthSpec spec;
  spec.n_dates = 250;
  spec.n_stocks = 100;
  spec.seed = 5;
  MarketPanel panel = SynthPanel(spec, StockDsl());
  ForwardReturns fwd = ComputeForwardReturns(panel, 5);
  GenOptions gen;
  gen.max_depth = 4;
  Rng rng(99);
  double total = 0.0;
  int count = 0;
  int attempts = 0;
  while (count < 200 && attempts < 2000) {
    ++attempts;
    AlphaExpr expr = RandomExpr(rng, StockDsl(), gen);
    try {
      AlphaMatrix alpha = Evaluate(expr, panel, StockDsl());
      FitnessReport report =
          ComputeFitness(alpha, fwd, {0, panel.NumDates() - 1});
      total += report.ic;  // already the absolute value via the sign flip
      ++count;
    } catch (const Error&) {
      continue;  // degenerate sample (constant alpha, overflow); redraw
    }
  }
  REQUIRE(count == 200);
  CHECK(total / 200.0 < 0.02);
}

TEST_CASE("rho zero plants nothing") {
  SynthSpec plain = SmallSpec(31);
  SynthSpec zero = SmallSpec(31);
  zero.plant = PlantSpec{Parse("neg(ts_mean(returns,5))", StockDsl()), 0.0};
  MarketPanel a = SynthPanel(plain, StockDsl());
  MarketPanel b = SynthPanel(zero, StockDsl());
  for (std::size_t f = 0; f < a.fields.size(); ++f) {
    CHECK(testutil::BitIdentical(a.fields[f], b.fields[f]));
  }
}

TEST_CASE("planted panels are deterministic") {
  SynthSpec spec = SmallSpec(32);
  spec.plant = PlantSpec{Parse("neg(ts_mean(returns,5))", StockDsl()), 0.3};
  MarketPanel a = SynthPanel(spec, StockDsl());
  MarketPanel b = SynthPanel(spec, StockDsl());
  for (std::size_t f = 0; f < a.fields.size(); ++f) {
    CHECK(testutil::BitIdentical(a.fields[f], b.fields[f]));
  }
}

TEST_CASE("spec validation") {
  SynthSpec spec = SmallSpec(41);
  spec.plant = PlantSpec{Parse("close", StockDsl()), -0.1};
  CHECK_THROWS_AS(SynthPanel(spec, StockDsl()), PanelError);
  spec.plant->rho = 1.0;
  CHECK_THROWS_AS(SynthPanel(spec, StockDsl()), PanelError);
  spec.plant->rho = 1.5;
  try {
    SynthPanel(spec, StockDsl());
    FAIL("expected PanelError");
  } catch (const PanelError& e) {
    CHECK(e.kind() == PanelError::Kind::InvalidPlantStrength);
  }

  SynthSpec bad = SmallSpec(42);
  bad.n_dates = 0;
  CHECK_THROWS_AS(SynthPanel(bad, StockDsl()), PanelError);
  bad = SmallSpec(43);
  bad.daily_vol = 0.0;
  CHECK_THROWS_AS(SynthPanel(bad, StockDsl()), PanelError);
  bad = SmallSpec(44);
  bad.limit_up_rate = 1.0;
  CHECK_THROWS_AS(SynthPanel(bad, StockDsl()), PanelError);
}
