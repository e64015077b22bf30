#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "alphagp/backtest.hpp"
#include "alphagp/baseline.hpp"
#include "alphagp/fitness.hpp"
#include "alphagp/gp.hpp"
#include "alphagp/model.hpp"

namespace alphagp {

// Insertion-ordered so identical inputs serialize to identical bytes.
using Json = nlohmann::ordered_json;

// The byte format of every JSON artifact: two-space indent plus a
// trailing newline.
std::string JsonBytes(const Json& doc);

// Whole-file helpers. Throws IoError.
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& content);

// Full report including the daily series; null stands for absent.
Json ToJson(const FitnessReport& report);
// ic/icir/rank_ic/rank_icir/sign/n_dates_used only.
Json ToJsonSummary(const FitnessReport& report);

// Configuration echo, termination, rejection counters, and per-generation
// bests; populations are summarized by size, not dumped.
Json ToJson(const GpRun& run, const Dsl& dsl);

Json ToJson(const SparsityReport& report);

Json ToJson(const CorrelationSummary& summary,
            std::span<const std::string> names);

Json ToJson(const LinearAlphaModel& model, const Dsl& dsl);

Json ToJson(const BacktestReport& report, const MarketPanel& panel);

// One Table-style line: an alpha, the range it was scored on, its report.
struct FitnessRow {
  std::string alpha;
  std::string split;
  FitnessReport report;
};

// alpha,split,ic,icir,rank_ic,rank_icir,sign,n_dates
void WriteFitnessCsv(std::span<const FitnessRow> rows, std::ostream& out);

// generation,population,best_fitness,best_alpha
void WriteConvergenceCsv(const GpRun& run, const Dsl& dsl, std::ostream& out);

// Long-format overlay of the two modes: mode,bin_lo,bin_hi,count.
void WriteSparsityCsv(const SparsityReport& unconstrained,
                      const SparsityReport& same_structure, std::ostream& out);

// Square matrix with a header row and row labels.
void WriteCorrelationCsv(const CorrelationSummary& summary,
                         std::span<const std::string> names,
                         std::ostream& out);

// date,value; the first row carries the pre-test date and the initial 1.0.
void WriteValueCurveCsv(const BacktestReport& report, const MarketPanel& panel,
                        std::ostream& out);

// date,stock_id,event,rank,notional,price,fee with one row per target
// membership, fill, and blocked trade.
void WriteHoldingsCsv(const BacktestReport& report, const MarketPanel& panel,
                      std::ostream& out);

// hold_size,final_value,ar,sigma_p,sr,cost_paid,n_rebalances
void WritePerfSummaryCsv(
    std::span<const std::pair<int, const BacktestReport*>> reports,
    std::ostream& out);

}  // namespace alphagp
