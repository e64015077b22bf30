#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "alphagp/expr.hpp"
#include "alphagp/panel.hpp"

namespace alphagp {

// Injects a tradable signal: the alpha's per-date z-score, averaged over
// the days it would act on, tilts subsequent log returns so that the alpha
// predicts forward returns with roughly the requested correlation.
struct PlantSpec {
  AlphaExpr target;
  double rho = 0.3;  // must lie in (0, 1)
};

struct SynthSpec {
  int n_dates = 250;
  int n_stocks = 100;
  std::uint64_t seed = 0;
  std::string start_date = "2020-01-06";  // a Monday; dates skip weekends
  double daily_vol = 0.02;
  double limit_up_rate = 0.004;
  double limit_down_rate = 0.004;
  double suspended_rate = 0.004;
  double st_rate = 0.01;  // per-stock chance of a flagged tail episode
  std::optional<PlantSpec> plant;
};

// Deterministic synthetic market panel: geometric random walks with
// plausible open/high/low/vwap/volume/turnover, sparse limit and
// suspension flags, sticky ST episodes. Suspended cells have all numeric
// fields missing. With a plant spec, forward returns gain a component
// aligned with the target alpha; rho = 0 disables planting. Throws
// PanelError (InvalidPlantStrength for rho outside [0, 1)) and ExprError
// if the planted alpha does not fit the language.
MarketPanel SynthPanel(const SynthSpec& spec, const Dsl& dsl);

}  // namespace alphagp
