#include "alphagp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alphagp/evaluator.hpp"
#include "alphagp/rng.hpp"

namespace alphagp {

namespace {

// Scales the planted tilt so the measured IC of the target lands near the
// requested rho on a 250-date, 100-stock panel.
constexpr double kPlantCalibration = 0.35;

struct Ymd {
  int y, m, d;
};

bool IsLeap(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int DaysInMonth(int y, int m) {
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && IsLeap(y)) return 29;
  return days[m - 1];
}

int DayOfWeek(const Ymd& date) {
  // Sakamoto's method; 0 = Sunday.
  static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  int y = date.y - (date.m < 3);
  return (y + y / 4 - y / 100 + y / 400 + t[date.m - 1] + date.d) % 7;
}

Ymd NextDay(Ymd date) {
  if (++date.d > DaysInMonth(date.y, date.m)) {
    date.d = 1;
    if (++date.m > 12) {
      date.m = 1;
      ++date.y;
    }
  }
  return date;
}

Ymd ParseYmd(const std::string& iso) {
  Ymd date{};
  if (std::sscanf(iso.c_str(), "%4d-%2d-%2d", &date.y, &date.m, &date.d) != 3 ||
      date.m < 1 || date.m > 12 || date.d < 1 ||
      date.d > DaysInMonth(date.y, date.m)) {
    throw PanelError(PanelError::Kind::MalformedRow,
                     "bad start_date: " + iso);
  }
  return date;
}

std::string FormatYmd(const Ymd& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", date.y, date.m, date.d);
  return buf;
}

std::vector<std::string> TradingCalendar(const std::string& start, int n) {
  Ymd date = ParseYmd(start);
  while (DayOfWeek(date) == 0 || DayOfWeek(date) == 6) date = NextDay(date);
  std::vector<std::string> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    out.push_back(FormatYmd(date));
    do {
      date = NextDay(date);
    } while (DayOfWeek(date) == 0 || DayOfWeek(date) == 6);
  }
  return out;
}

// All stochastic inputs, drawn once so the planting iterations rebuild
// prices from identical noise.
struct Draws {
  std::vector<double> base_price;   // per stock
  std::vector<double> base_volume;  // per stock
  Matrix shock;                     // N(0, 1) close log-return shocks
  Matrix gap;                       // overnight gap shocks
  Matrix ext_high;                  // |N(0, 1)| high extension
  Matrix ext_low;                   // |N(0, 1)| low extension
  Matrix vwap_pos;                  // U(0, 1) position of vwap in [low, high]
  Matrix vol_shock;                 // N(0, 1) volume shocks
};

double Normal(Rng& rng) {
  // Box-Muller, cosine branch only, so each normal costs exactly two
  // uniform draws.
  double u1 = 1.0 - rng.UniformReal();
  double u2 = rng.UniformReal();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

Draws DrawAll(Rng& rng, int n_dates, int n_stocks) {
  Draws d;
  d.base_price.resize(n_stocks);
  d.base_volume.resize(n_stocks);
  for (int i = 0; i < n_stocks; ++i) {
    d.base_price[i] = std::exp(rng.UniformReal(std::log(5.0), std::log(200.0)));
    d.base_volume[i] = std::exp(rng.UniformReal(std::log(1e5), std::log(1e7)));
  }
  auto fill = [&](Matrix& m, auto gen) {
    m = Matrix(n_dates, n_stocks);
    for (int t = 0; t < n_dates; ++t) {
      for (int i = 0; i < n_stocks; ++i) m.At(t, i) = gen();
    }
  };
  fill(d.shock, [&] { return Normal(rng); });
  fill(d.gap, [&] { return Normal(rng); });
  fill(d.ext_high, [&] { return std::fabs(Normal(rng)); });
  fill(d.ext_low, [&] { return std::fabs(Normal(rng)); });
  fill(d.vwap_pos, [&] { return rng.UniformReal(); });
  fill(d.vol_shock, [&] { return Normal(rng); });
  return d;
}

struct Flags {
  BoolMatrix limit_up, limit_down, suspended, st;
};

Flags DrawFlags(Rng& rng, const SynthSpec& spec) {
  const int T = spec.n_dates, N = spec.n_stocks;
  Flags f;
  f.limit_up = BoolMatrix(T, N);
  f.limit_down = BoolMatrix(T, N);
  f.suspended = BoolMatrix(T, N);
  f.st = BoolMatrix(T, N);
  for (int i = 0; i < N; ++i) {
    if (rng.Bernoulli(spec.st_rate)) {
      int start = rng.UniformInt(T / 3, T - 1);
      for (int t = start; t < T; ++t) f.st.Set(t, i, true);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      bool up = rng.Bernoulli(spec.limit_up_rate);
      bool down = rng.Bernoulli(spec.limit_down_rate);
      f.limit_up.Set(t, i, up);
      f.limit_down.Set(t, i, down && !up);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < T; ++t) {
      if (f.suspended.At(t, i)) continue;
      if (rng.Bernoulli(spec.suspended_rate)) {
        int len = rng.UniformInt(1, 5);
        for (int k = 0; k < len && t + k < T; ++k) {
          f.suspended.Set(t + k, i, true);
        }
      }
    }
  }
  // A suspended day has no trading, so no limit flags.
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      if (f.suspended.At(t, i)) {
        f.limit_up.Set(t, i, false);
        f.limit_down.Set(t, i, false);
      }
    }
  }
  return f;
}

// Builds the panel over the first dates.size() trading days; draws, flags,
// and log_returns may extend further and are read row by row.
MarketPanel BuildPanel(const SynthSpec& spec, const Draws& draws,
                       const Flags& flags, const Matrix& log_returns,
                       const std::vector<std::string>& dates) {
  const int T = static_cast<int>(dates.size()), N = spec.n_stocks;
  MarketPanel panel;
  panel.id = "synth-" + std::to_string(spec.seed);
  panel.dates = dates;
  panel.stocks.reserve(N);
  for (int i = 0; i < N; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%04d", i);
    panel.stocks.push_back(buf);
  }
  panel.fields.assign(PanelFieldNames().size(), Matrix(T, N));
  auto slice = [T, N](const BoolMatrix& full) {
    BoolMatrix out(T, N);
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < N; ++i) out.Set(t, i, full.At(t, i));
    }
    return out;
  };
  panel.limit_up = slice(flags.limit_up);
  panel.limit_down = slice(flags.limit_down);
  panel.suspended = slice(flags.suspended);
  panel.st = slice(flags.st);

  Matrix& open = panel.fields[0];
  Matrix& high = panel.fields[1];
  Matrix& low = panel.fields[2];
  Matrix& close = panel.fields[3];
  Matrix& vwap = panel.fields[4];
  Matrix& volume = panel.fields[5];
  Matrix& turnover = panel.fields[6];

  const double sigma = spec.daily_vol;
  for (int i = 0; i < N; ++i) {
    double path = draws.base_price[i];
    for (int t = 0; t < T; ++t) {
      double prev = path;
      path *= std::exp(log_returns.At(t, i));
      if (flags.suspended.At(t, i)) continue;
      double o = prev * std::exp(0.3 * sigma * draws.gap.At(t, i));
      double c = path;
      double h = std::max(o, c) * std::exp(0.5 * sigma * draws.ext_high.At(t, i));
      double l = std::min(o, c) * std::exp(-0.5 * sigma * draws.ext_low.At(t, i));
      double vw = l + draws.vwap_pos.At(t, i) * (h - l);
      double vol = std::max(1.0, std::round(draws.base_volume[i] *
                                            std::exp(0.5 * draws.vol_shock.At(t, i))));
      open.At(t, i) = o;
      high.At(t, i) = h;
      low.At(t, i) = l;
      close.At(t, i) = c;
      vwap.At(t, i) = vw;
      volume.At(t, i) = vol;
      turnover.At(t, i) = vw * vol;
    }
  }
  FinalizePanel(panel);
  return panel;
}

// Per-date z-scores of alpha rows [first, last), written into out. Undefined
// cells and degenerate dates give 0 so they contribute no tilt. Evaluate
// already masked the alpha to the universe.
void ZScoreRowsInto(const AlphaMatrix& alpha, int first, int last,
                    Matrix& out) {
  const int N = alpha.values.Cols();
  std::vector<double> cells;
  for (int t = first; t < last; ++t) {
    cells.clear();
    for (int i = 0; i < N; ++i) {
      double v = alpha.values.At(t, i);
      if (!IsMissing(v)) cells.push_back(v);
    }
    if (cells.size() < 2) continue;
    double m = 0.0;
    for (double v : cells) m += v;
    m /= static_cast<double>(cells.size());
    double ss = 0.0;
    for (double v : cells) ss += (v - m) * (v - m);
    double sd = std::sqrt(ss / (static_cast<double>(cells.size()) - 1));
    if (sd < 1e-12) continue;
    for (int i = 0; i < N; ++i) {
      double v = alpha.values.At(t, i);
      if (!IsMissing(v)) out.At(t, i) = (v - m) / sd;
    }
  }
}

}  // namespace

MarketPanel SynthPanel(const SynthSpec& spec, const Dsl& dsl) {
  if (spec.n_dates < 1 || spec.n_stocks < 1) {
    throw PanelError(PanelError::Kind::EmptyInput,
                     "synthetic panel needs at least one date and one stock");
  }
  if (spec.daily_vol <= 0.0) {
    throw PanelError(PanelError::Kind::MalformedRow, "daily_vol must be positive");
  }
  for (double rate : {spec.limit_up_rate, spec.limit_down_rate,
                      spec.suspended_rate, spec.st_rate}) {
    if (rate < 0.0 || rate >= 1.0) {
      throw PanelError(PanelError::Kind::MalformedRow,
                       "flag rates must lie in [0, 1)");
    }
  }
  if (spec.plant) {
    if (!(spec.plant->rho >= 0.0 && spec.plant->rho < 1.0)) {
      throw PanelError(PanelError::Kind::InvalidPlantStrength,
                       "plant rho must lie in [0, 1)");
    }
    ValidateExpr(spec.plant->target, dsl);
  }

  Rng rng(spec.seed);
  Draws draws = DrawAll(rng, spec.n_dates, spec.n_stocks);
  Flags flags = DrawFlags(rng, spec);
  std::vector<std::string> dates = TradingCalendar(spec.start_date, spec.n_dates);

  const int T = spec.n_dates, N = spec.n_stocks;
  const double sigma = spec.daily_vol;
  const double drift = 0.0002;
  Matrix base(T, N);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      base.At(t, i) = drift + sigma * draws.shock.At(t, i);
    }
  }

  if (!spec.plant || spec.plant->rho == 0.0) {
    return BuildPanel(spec, draws, flags, base, dates);
  }

  // Tilt strength sized for the default 5-day horizon; the leading constant
  // is an empirical calibration against the realized information
  // coefficient (overlapping forward windows make neighbouring signal rows
  // leak into each date's correlation, so the naive noise budget is off).
  const double rho = spec.plant->rho;
  const int horizon = 5;
  const double beta = kPlantCalibration * rho * sigma * std::sqrt(5.0) /
                      std::sqrt(1.0 - rho * rho);

  // The alpha reads the prices it tilts, so the panel is built causally,
  // two dates at a time. Every DSL operator only looks backward, and the
  // day-u tilt only needs signal rows at dates u-2 and older, so each
  // block's drive is computed from rows that are already final. The
  // finished panel therefore satisfies the plant exactly; there is no
  // fixed-point iteration to converge.
  Matrix tilted = base;
  Matrix signal(T, N, 0.0);
  MarketPanel panel;
  for (int u0 = 0; u0 < T; u0 += 2) {
    const int u1 = std::min(u0 + 2, T);
    for (int u = u0; u < u1; ++u) {
      for (int i = 0; i < N; ++i) {
        // The day-u return is inside the forward window of alpha dates
        // u - horizon - 1 through u - 2.
        double s = 0.0;
        int count = 0;
        for (int back = 2; back <= horizon + 1; ++back) {
          if (u - back >= 0) {
            s += signal.At(u - back, i);
            ++count;
          }
        }
        if (count > 0) {
          tilted.At(u, i) += beta * (s / count);
        }
      }
    }
    std::vector<std::string> prefix(dates.begin(), dates.begin() + u1);
    panel = BuildPanel(spec, draws, flags, tilted, prefix);
    AlphaMatrix alpha = Evaluate(spec.plant->target, panel, dsl);
    ZScoreRowsInto(alpha, u0, u1, signal);
  }
  // The last block's prefix covered every date.
  return panel;
}

}  // namespace alphagp
