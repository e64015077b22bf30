#include "alphagp/serialize.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "alphagp/errors.hpp"
#include "alphagp/parser.hpp"

namespace alphagp {
namespace {

// Quotes a CSV field only when it needs it.
std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// CSV number cell: shortest round-trip decimal, empty for missing.
std::string Num(double x) {
  return IsMissing(x) ? std::string() : FormatDouble(x);
}

std::string Num(const std::optional<double>& x) {
  return x ? Num(*x) : std::string();
}

Json RangeJson(DateRange range, const MarketPanel* panel) {
  Json j;
  j["first"] = range.first;
  j["last"] = range.last;
  if (panel != nullptr) {
    j["begin_date"] = panel->dates[range.first];
    j["end_date"] = panel->dates[range.last];
  }
  return j;
}

Json FillJson(const TradeFill& fill, const MarketPanel& panel) {
  Json j;
  j["stock"] = panel.stocks[fill.stock];
  j["notional"] = fill.notional;
  j["price"] = fill.price;
  j["fee"] = fill.fee;
  return j;
}

}  // namespace

std::string JsonBytes(const Json& doc) { return doc.dump(2) + "\n"; }

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return buf.str();
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("cannot write " + path);
}

Json ToJsonSummary(const FitnessReport& report) {
  Json j;
  j["ic"] = report.ic;
  j["icir"] = report.icir ? Json(*report.icir) : Json(nullptr);
  j["rank_ic"] = report.rank_ic;
  j["rank_icir"] = report.rank_icir ? Json(*report.rank_icir) : Json(nullptr);
  j["sign"] = report.sign;
  j["n_dates_used"] = report.n_dates_used;
  return j;
}

Json ToJson(const FitnessReport& report) {
  Json j = ToJsonSummary(report);
  j["date_indices"] = report.date_indices;
  j["daily_ic"] = report.daily_ic;
  j["daily_rank_ic"] = report.daily_rank_ic;
  return j;
}

Json ToJson(const GpRun& run, const Dsl& dsl) {
  Json config;
  config["n_pop"] = run.config.n_pop;
  config["p_crossover"] = run.config.p_crossover;
  config["p_point"] = run.config.p_point;
  config["tournament_size"] = run.config.tournament_size;
  config["max_generations"] = run.config.max_generations;
  config["stagnation_patience"] = run.config.stagnation_patience;
  config["min_improvement"] = run.config.min_improvement;
  config["dedup_attempt_cap"] = run.config.DedupCap();
  config["rng_seed"] = run.config.rng_seed;
  config["n_threads"] = run.config.n_threads;
  config["min_cross_section"] = run.config.fitness.min_cross_section;
  config["min_dates"] = run.config.fitness.min_dates;
  config["gen"] = {{"max_depth", run.config.gen.max_depth},
                   {"terminal_prob", run.config.gen.terminal_prob},
                   {"const_mutation_scale", run.config.gen.const_mutation_scale}};

  Json generations = Json::array();
  for (std::size_t g = 0; g < run.generations.size(); ++g) {
    const Individual& best = run.generations[g].Best();
    Json entry;
    entry["generation"] = g;
    entry["population"] = run.generations[g].population.size();
    entry["best_alpha"] = best.printed;
    entry["best_fitness"] = best.fitness;
    entry["best"] = best.report ? ToJsonSummary(*best.report) : Json(nullptr);
    generations.push_back(std::move(entry));
  }

  const Individual& best = run.Best();
  Json j;
  j["config"] = std::move(config);
  j["seed_alpha"] =
      run.seed_alpha ? Json(Print(*run.seed_alpha, dsl)) : Json(nullptr);
  j["terminated_reason"] = ToString(run.terminated_reason);
  j["dedup_rejections"] = run.dedup_rejections;
  j["depth_rejections"] = run.depth_rejections;
  j["generations"] = std::move(generations);
  j["best"] = {{"alpha", best.printed},
               {"fitness", best.fitness},
               {"report", best.report ? ToJson(*best.report) : Json(nullptr)}};
  return j;
}

Json ToJson(const SparsityReport& report) {
  Json j;
  j["n_samples"] = report.n_samples;
  j["threshold"] = report.threshold;
  j["effective_fraction"] = report.effective_fraction;
  j["bin_edges"] = report.bin_edges;
  j["histogram"] = report.histogram;
  return j;
}

Json ToJson(const CorrelationSummary& summary,
            std::span<const std::string> names) {
  Json matrix = Json::array();
  for (int r = 0; r < summary.corr.Rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < summary.corr.Cols(); ++c)
      row.push_back(summary.corr.At(r, c));
    matrix.push_back(std::move(row));
  }
  Json j;
  j["alphas"] = std::vector<std::string>(names.begin(), names.end());
  j["mean_abs_off_diagonal"] = summary.mean_abs_off_diagonal;
  j["matrix"] = std::move(matrix);
  return j;
}

Json ToJson(const LinearAlphaModel& model, const Dsl& dsl) {
  std::vector<std::string> features;
  for (const AlphaExpr& expr : model.feature_exprs)
    features.push_back(Print(expr, dsl));
  Json j;
  j["features"] = features;
  j["coefficients"] = model.coefficients;
  j["intercept"] = model.intercept;
  j["train_range"] = RangeJson(model.train_range, nullptr);
  return j;
}

Json ToJson(const BacktestReport& report, const MarketPanel& panel) {
  Json rebalances = Json::array();
  for (const RebalanceRecord& rec : report.rebalances) {
    Json sells = Json::array();
    for (const TradeFill& fill : rec.sells)
      sells.push_back(FillJson(fill, panel));
    Json buys = Json::array();
    for (const TradeFill& fill : rec.buys) buys.push_back(FillJson(fill, panel));
    std::vector<std::string> target, blocked_sells, blocked_buys;
    for (int i : rec.target) target.push_back(panel.stocks[i]);
    for (int i : rec.blocked_sells) blocked_sells.push_back(panel.stocks[i]);
    for (int i : rec.blocked_buys) blocked_buys.push_back(panel.stocks[i]);

    Json entry;
    entry["date"] = panel.dates[rec.date_index];
    entry["date_index"] = rec.date_index;
    entry["target"] = target;
    entry["sells"] = std::move(sells);
    entry["buys"] = std::move(buys);
    entry["blocked_sells"] = blocked_sells;
    entry["blocked_buys"] = blocked_buys;
    entry["insufficient_eligible"] = rec.insufficient_eligible;
    rebalances.push_back(std::move(entry));
  }

  Json j;
  j["test_range"] = RangeJson(report.test_range, &panel);
  j["final_value"] = report.daily_value.back();
  j["ar"] = report.ar;
  j["sigma_p"] = report.sigma_p;
  j["sr"] = report.sr ? Json(*report.sr) : Json(nullptr);
  j["cost_paid"] = report.cost_paid;
  j["daily_value"] = report.daily_value;
  j["rebalances"] = std::move(rebalances);
  return j;
}

void WriteFitnessCsv(std::span<const FitnessRow> rows, std::ostream& out) {
  out << "alpha,split,ic,icir,rank_ic,rank_icir,sign,n_dates\n";
  for (const FitnessRow& row : rows) {
    out << CsvField(row.alpha) << ',' << CsvField(row.split) << ','
        << Num(row.report.ic) << ','
        << Num(row.report.icir) << ','
        << Num(row.report.rank_ic) << ','
        << Num(row.report.rank_icir) << ',' << row.report.sign
        << ',' << row.report.n_dates_used << '\n';
  }
}

void WriteConvergenceCsv(const GpRun& run, const Dsl& dsl, std::ostream& out) {
  (void)dsl;
  out << "generation,population,best_fitness,best_alpha\n";
  for (std::size_t g = 0; g < run.generations.size(); ++g) {
    const Individual& best = run.generations[g].Best();
    out << g << ',' << run.generations[g].population.size() << ','
        << Num(best.fitness) << ',' << CsvField(best.printed) << '\n';
  }
}

void WriteSparsityCsv(const SparsityReport& unconstrained,
                      const SparsityReport& same_structure,
                      std::ostream& out) {
  out << "mode,bin_lo,bin_hi,count\n";
  const auto dump = [&out](const char* mode, const SparsityReport& report) {
    for (std::size_t k = 0; k < report.histogram.size(); ++k) {
      out << mode << ',' << Num(report.bin_edges[k]) << ','
          << Num(report.bin_edges[k + 1]) << ','
          << report.histogram[k] << '\n';
    }
  };
  dump("unconstrained", unconstrained);
  dump("same_structure", same_structure);
}

void WriteCorrelationCsv(const CorrelationSummary& summary,
                         std::span<const std::string> names,
                         std::ostream& out) {
  out << "alpha";
  for (const std::string& name : names) out << ',' << CsvField(name);
  out << '\n';
  for (int r = 0; r < summary.corr.Rows(); ++r) {
    out << CsvField(names[r]);
    for (int c = 0; c < summary.corr.Cols(); ++c)
      out << ',' << Num(summary.corr.At(r, c));
    out << '\n';
  }
}

void WriteValueCurveCsv(const BacktestReport& report, const MarketPanel& panel,
                        std::ostream& out) {
  out << "date,value\n";
  const int first = report.test_range.first;
  out << (first > 0 ? panel.dates[first - 1] : std::string("initial")) << ','
      << Num(report.daily_value[0]) << '\n';
  for (int t = first; t <= report.test_range.last; ++t) {
    out << panel.dates[t] << ','
        << Num(report.daily_value[t - first + 1]) << '\n';
  }
}

void WriteHoldingsCsv(const BacktestReport& report, const MarketPanel& panel,
                      std::ostream& out) {
  out << "date,stock_id,event,rank,notional,price,fee\n";
  for (const RebalanceRecord& rec : report.rebalances) {
    const std::string& date = panel.dates[rec.date_index];
    for (std::size_t r = 0; r < rec.target.size(); ++r) {
      out << date << ',' << CsvField(panel.stocks[rec.target[r]])
          << ",target," << r + 1 << ",,,\n";
    }
    for (const TradeFill& fill : rec.sells) {
      out << date << ',' << CsvField(panel.stocks[fill.stock]) << ",sell,,"
          << Num(fill.notional) << ',' << Num(fill.price)
          << ',' << Num(fill.fee) << '\n';
    }
    for (const TradeFill& fill : rec.buys) {
      out << date << ',' << CsvField(panel.stocks[fill.stock]) << ",buy,,"
          << Num(fill.notional) << ',' << Num(fill.price)
          << ',' << Num(fill.fee) << '\n';
    }
    for (int i : rec.blocked_sells)
      out << date << ',' << CsvField(panel.stocks[i]) << ",blocked_sell,,,,\n";
    for (int i : rec.blocked_buys)
      out << date << ',' << CsvField(panel.stocks[i]) << ",blocked_buy,,,,\n";
    if (rec.insufficient_eligible)
      out << date << ",,insufficient_eligible,,,,\n";
  }
}

void WritePerfSummaryCsv(
    std::span<const std::pair<int, const BacktestReport*>> reports,
    std::ostream& out) {
  out << "hold_size,final_value,ar,sigma_p,sr,cost_paid,n_rebalances\n";
  for (const auto& [hold_size, report] : reports) {
    out << hold_size << ',' << Num(report->daily_value.back()) << ','
        << Num(report->ar) << ',' << Num(report->sigma_p)
        << ',' << Num(report->sr) << ','
        << Num(report->cost_paid) << ','
        << report->rebalances.size() << '\n';
  }
}

}  // namespace alphagp
