// alphagp command-line tool: drives the library end to end from a JSON
// run manifest. Every command writes its artifacts into one output
// directory and is byte-deterministic given the manifest and rng seed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "alphagp/backtest.hpp"
#include "alphagp/baseline.hpp"
#include "alphagp/errors.hpp"
#include "alphagp/evaluator.hpp"
#include "alphagp/fitness.hpp"
#include "alphagp/gp.hpp"
#include "alphagp/model.hpp"
#include "alphagp/panel.hpp"
#include "alphagp/panel_io.hpp"
#include "alphagp/parser.hpp"
#include "alphagp/serialize.hpp"
#include "alphagp/synth.hpp"

namespace fs = std::filesystem;

namespace {

using alphagp::AlphaExpr;
using alphagp::AlphaMatrix;
using alphagp::DateRange;
using alphagp::Dsl;
using alphagp::InputError;
using alphagp::IoError;
using alphagp::Json;
using alphagp::MarketPanel;

// Everything a command needs: the parsed manifest, resolved directories,
// and the shared knobs every command honors.
struct Context {
  Json manifest;
  fs::path manifest_dir;
  fs::path out_dir;
  std::uint64_t rng_seed = 0;
  int horizon_days = 5;
  int n_threads = 0;
  alphagp::FitnessOptions fitness;
};

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

Context BuildContext(const std::string& manifest_path,
                     const std::string& output_override,
                     const std::optional<std::uint64_t>& seed_override) {
  Context ctx;
  const std::string text = alphagp::ReadTextFile(manifest_path);
  try {
    ctx.manifest = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!ctx.manifest.is_object()) {
    throw InputError("manifest must be a JSON object");
  }
  ctx.manifest_dir = fs::absolute(fs::path(manifest_path)).parent_path();

  ctx.rng_seed = ctx.manifest.value("rng_seed", std::uint64_t{0});
  if (seed_override) ctx.rng_seed = *seed_override;
  ctx.horizon_days = ctx.manifest.value("horizon_days", 5);
  ctx.n_threads = ctx.manifest.value("n_threads", 0);
  if (ctx.manifest.contains("fitness")) {
    ctx.fitness.min_cross_section =
        ctx.manifest["fitness"].value("min_cross_section",
                                      ctx.fitness.min_cross_section);
    ctx.fitness.min_dates =
        ctx.manifest["fitness"].value("min_dates", ctx.fitness.min_dates);
  }

  if (!output_override.empty()) {
    ctx.out_dir = fs::path(output_override);
  } else if (ctx.manifest.contains("output_dir")) {
    ctx.out_dir =
        Resolve(ctx.manifest_dir, ctx.manifest["output_dir"].get<std::string>());
  } else {
    throw InputError(
        "no output directory: set output_dir in the manifest or pass --output");
  }
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + ctx.out_dir.string() +
                  ": " + ec.message());
  }
  return ctx;
}

Dsl BuildDsl(const Context& ctx) {
  if (!ctx.manifest.contains("dsl")) return alphagp::MakeDefaultDsl();
  const fs::path path =
      Resolve(ctx.manifest_dir, ctx.manifest["dsl"].get<std::string>());
  return alphagp::LoadDslFromJson(alphagp::ReadTextFile(path.string()));
}

alphagp::SynthSpec SynthSpecFromJson(const Json& j, const Dsl& dsl,
                                     std::uint64_t default_seed) {
  alphagp::SynthSpec spec;
  spec.n_dates = j.value("n_dates", spec.n_dates);
  spec.n_stocks = j.value("n_stocks", spec.n_stocks);
  spec.seed = j.value("seed", default_seed);
  spec.start_date = j.value("start_date", spec.start_date);
  spec.daily_vol = j.value("daily_vol", spec.daily_vol);
  spec.limit_up_rate = j.value("limit_up_rate", spec.limit_up_rate);
  spec.limit_down_rate = j.value("limit_down_rate", spec.limit_down_rate);
  spec.suspended_rate = j.value("suspended_rate", spec.suspended_rate);
  spec.st_rate = j.value("st_rate", spec.st_rate);
  if (j.contains("plant")) {
    alphagp::PlantSpec plant;
    plant.target = alphagp::Parse(j["plant"].at("alpha").get<std::string>(), dsl);
    plant.rho = j["plant"].value("rho", plant.rho);
    spec.plant = std::move(plant);
  }
  return spec;
}

MarketPanel BuildPanel(const Context& ctx, const Dsl& dsl) {
  if (!ctx.manifest.contains("panel")) {
    throw InputError("manifest needs a panel entry (panel.csv or panel.synth)");
  }
  const Json& p = ctx.manifest["panel"];
  if (p.contains("csv")) {
    const Json& c = p["csv"];
    std::vector<std::string> paths;
    if (c.is_string()) {
      paths.push_back(Resolve(ctx.manifest_dir, c.get<std::string>()).string());
    } else {
      for (const Json& entry : c) {
        paths.push_back(
            Resolve(ctx.manifest_dir, entry.get<std::string>()).string());
      }
    }
    if (paths.empty()) throw InputError("panel.csv lists no files");
    return alphagp::LoadPanelCsv(paths);
  }
  if (p.contains("synth")) {
    return alphagp::SynthPanel(SynthSpecFromJson(p["synth"], dsl, ctx.rng_seed),
                               dsl);
  }
  throw InputError("panel entry needs either a csv or a synth key");
}

// DSL-text alphas from the manifest's "alphas" array.
std::vector<AlphaExpr> ParseAlphaList(const Context& ctx, const Dsl& dsl,
                                      int min_count, const char* purpose) {
  std::vector<AlphaExpr> out;
  if (ctx.manifest.contains("alphas")) {
    for (const Json& entry : ctx.manifest["alphas"]) {
      out.push_back(alphagp::Parse(entry.get<std::string>(), dsl));
    }
  }
  if (static_cast<int>(out.size()) < min_count) {
    throw InputError(std::string(purpose) + " needs at least " +
                     std::to_string(min_count) + " entries under alphas, got " +
                     std::to_string(out.size()));
  }
  return out;
}

std::optional<DateRange> RangeFromKey(const Context& ctx,
                                      const MarketPanel& panel,
                                      const char* key) {
  if (!ctx.manifest.contains(key)) return std::nullopt;
  const Json& j = ctx.manifest[key];
  if (!j.is_array() || j.size() != 2) {
    throw InputError(std::string(key) +
                     " must be a [begin_date, end_date] pair");
  }
  return alphagp::ResolveRange(panel, j[0].get<std::string>(),
                               j[1].get<std::string>());
}

DateRange TrainOrFull(const Context& ctx, const MarketPanel& panel) {
  if (auto r = RangeFromKey(ctx, panel, "train")) return *r;
  return DateRange{0, panel.NumDates() - 1};
}

alphagp::GenOptions GenFromJson(const Json& j) {
  alphagp::GenOptions gen;
  gen.max_depth = j.value("max_depth", gen.max_depth);
  gen.terminal_prob = j.value("terminal_prob", gen.terminal_prob);
  gen.const_mutation_scale =
      j.value("const_mutation_scale", gen.const_mutation_scale);
  return gen;
}

// Overlays the manifest's gp block on config, which carries the
// command's own defaults (warm start and baseline differ on p_point).
void ApplyGpManifest(const Context& ctx, alphagp::GpConfig& config) {
  if (ctx.manifest.contains("gp")) {
    const Json& j = ctx.manifest["gp"];
    config.n_pop = j.value("n_pop", config.n_pop);
    config.p_crossover = j.value("p_crossover", config.p_crossover);
    config.p_point = j.value("p_point", config.p_point);
    config.tournament_size = j.value("tournament_size", config.tournament_size);
    config.max_generations = j.value("max_generations", config.max_generations);
    config.stagnation_patience =
        j.value("stagnation_patience", config.stagnation_patience);
    config.min_improvement = j.value("min_improvement", config.min_improvement);
    config.dedup_attempt_cap =
        j.value("dedup_attempt_cap", config.dedup_attempt_cap);
    if (j.contains("gen")) config.gen = GenFromJson(j["gen"]);
  }
  config.rng_seed = ctx.rng_seed;
  config.n_threads = ctx.n_threads;
  config.fitness = ctx.fitness;
}

Json RangeDoc(const MarketPanel& panel, DateRange range) {
  Json j;
  j["first"] = range.first;
  j["last"] = range.last;
  j["begin_date"] = panel.dates[range.first];
  j["end_date"] = panel.dates[range.last];
  return j;
}

void WriteArtifact(const fs::path& path, const std::string& bytes) {
  alphagp::WriteTextFile(path.string(), bytes);
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<AlphaMatrix> EvaluateAll(std::span<const AlphaExpr> exprs,
                                     const MarketPanel& panel, const Dsl& dsl) {
  std::vector<AlphaMatrix> out;
  out.reserve(exprs.size());
  for (const AlphaExpr& expr : exprs) {
    out.push_back(alphagp::Evaluate(expr, panel, dsl));
  }
  return out;
}

void CmdSynth(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  if (!ctx.manifest.contains("panel") ||
      !ctx.manifest["panel"].contains("synth")) {
    throw InputError("synth needs a panel.synth spec in the manifest");
  }
  const MarketPanel panel = alphagp::SynthPanel(
      SynthSpecFromJson(ctx.manifest["panel"]["synth"], dsl, ctx.rng_seed), dsl);
  const fs::path path = ctx.out_dir / "panel.csv";
  alphagp::WritePanelCsvFile(panel, path.string());
  std::cout << "wrote " << path.string() << "\n";
}

void CmdEval(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  const MarketPanel panel = BuildPanel(ctx, dsl);
  const auto fwd = alphagp::ComputeForwardReturns(panel, ctx.horizon_days);
  const std::vector<AlphaExpr> alphas = ParseAlphaList(ctx, dsl, 1, "eval");
  const DateRange train = TrainOrFull(ctx, panel);
  const std::optional<DateRange> test = RangeFromKey(ctx, panel, "test");

  Json doc;
  doc["horizon_days"] = ctx.horizon_days;
  doc["train"] = RangeDoc(panel, train);
  doc["test"] = test ? RangeDoc(panel, *test) : Json(nullptr);
  Json results = Json::array();
  std::vector<alphagp::FitnessRow> rows;
  for (const AlphaExpr& expr : alphas) {
    const std::string printed = alphagp::Print(expr, dsl);
    const AlphaMatrix matrix = alphagp::Evaluate(expr, panel, dsl);
    const auto in_sample =
        alphagp::ComputeFitness(matrix, fwd, train, ctx.fitness);
    Json entry;
    entry["alpha"] = printed;
    entry["in_sample"] = ToJson(in_sample);
    rows.push_back({printed, "in_sample", in_sample});
    if (test) {
      const auto out_sample =
          alphagp::ComputeFitness(matrix, fwd, *test, ctx.fitness);
      entry["out_of_sample"] = ToJson(out_sample);
      rows.push_back({printed, "out_of_sample", out_sample});
    } else {
      entry["out_of_sample"] = nullptr;
    }
    results.push_back(std::move(entry));
  }
  doc["results"] = std::move(results);

  WriteArtifact(ctx.out_dir / "fitness.json", alphagp::JsonBytes(doc));
  std::ostringstream csv;
  alphagp::WriteFitnessCsv(rows, csv);
  WriteArtifact(ctx.out_dir / "fitness.csv", csv.str());
}

void CmdEnhance(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  const MarketPanel panel = BuildPanel(ctx, dsl);
  const auto fwd = alphagp::ComputeForwardReturns(panel, ctx.horizon_days);
  const std::vector<AlphaExpr> seeds = ParseAlphaList(ctx, dsl, 1, "enhance");
  alphagp::GpConfig config;
  ApplyGpManifest(ctx, config);
  const DateRange train = TrainOrFull(ctx, panel);
  const std::optional<DateRange> test = RangeFromKey(ctx, panel, "test");

  const auto results =
      alphagp::RunMultiSeed(config, seeds, panel, fwd, train, dsl);

  std::vector<alphagp::FitnessRow> comparison;
  const auto add_rows = [&](const std::string& role, std::size_t k,
                            const AlphaExpr& expr) {
    const std::string printed = alphagp::Print(expr, dsl);
    const AlphaMatrix matrix = alphagp::Evaluate(expr, panel, dsl);
    const std::string tag = role + "_" + std::to_string(k);
    comparison.push_back(
        {printed, tag + "/in_sample",
         alphagp::ComputeFitness(matrix, fwd, train, ctx.fitness)});
    if (test) {
      comparison.push_back(
          {printed, tag + "/out_of_sample",
           alphagp::ComputeFitness(matrix, fwd, *test, ctx.fitness)});
    }
  };

  int failures = 0;
  std::string first_error;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::string suffix = std::to_string(k);
    if (!results[k].ok()) {
      ++failures;
      if (first_error.empty()) first_error = results[k].error;
      Json err;
      err["error"] = results[k].error;
      WriteArtifact(ctx.out_dir / ("run_" + suffix + ".json"),
                    alphagp::JsonBytes(err));
      continue;
    }
    const alphagp::GpRun& run = *results[k].run;
    WriteArtifact(ctx.out_dir / ("run_" + suffix + ".json"),
                  alphagp::JsonBytes(ToJson(run, dsl)));
    WriteArtifact(ctx.out_dir / ("best_" + suffix + ".txt"),
                  run.Best().printed + "\n");
    std::ostringstream conv;
    alphagp::WriteConvergenceCsv(run, dsl, conv);
    WriteArtifact(ctx.out_dir / ("convergence_" + suffix + ".csv"), conv.str());
    add_rows("seed", k, seeds[k]);
    add_rows("enhanced", k, run.Best().expr);
  }
  if (failures == static_cast<int>(results.size())) {
    throw alphagp::RunError("every seed run failed; first error: " +
                            first_error);
  }
  std::ostringstream csv;
  alphagp::WriteFitnessCsv(comparison, csv);
  WriteArtifact(ctx.out_dir / "comparison.csv", csv.str());
}

void CmdMineBaseline(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  const MarketPanel panel = BuildPanel(ctx, dsl);
  const auto fwd = alphagp::ComputeForwardReturns(panel, ctx.horizon_days);
  alphagp::BaselineGpConfig config;
  ApplyGpManifest(ctx, config.base);
  if (ctx.manifest.contains("baseline")) {
    const Json& j = ctx.manifest["baseline"];
    config.p_subtree = j.value("p_subtree", config.p_subtree);
    config.max_depth = j.value("max_depth", config.max_depth);
    config.n_init_pop = j.value("n_init_pop", config.n_init_pop);
  }
  const DateRange train = TrainOrFull(ctx, panel);

  const alphagp::GpRun run =
      alphagp::RunTraditionalGp(config, panel, fwd, train, dsl);
  WriteArtifact(ctx.out_dir / "run.json", alphagp::JsonBytes(ToJson(run, dsl)));
  WriteArtifact(ctx.out_dir / "best.txt", run.Best().printed + "\n");
  std::ostringstream conv;
  alphagp::WriteConvergenceCsv(run, dsl, conv);
  WriteArtifact(ctx.out_dir / "convergence.csv", conv.str());
}

void CmdSparsity(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  const MarketPanel panel = BuildPanel(ctx, dsl);
  const auto fwd = alphagp::ComputeForwardReturns(panel, ctx.horizon_days);
  const DateRange range = TrainOrFull(ctx, panel);

  alphagp::SparsityOptions options;
  options.rng_seed = ctx.rng_seed;
  options.n_threads = ctx.n_threads;
  options.fitness = ctx.fitness;
  std::optional<std::string> donor_text;
  if (ctx.manifest.contains("sparsity")) {
    const Json& j = ctx.manifest["sparsity"];
    options.n_samples = j.value("n_samples", options.n_samples);
    options.threshold = j.value("threshold", options.threshold);
    options.histogram_bins = j.value("histogram_bins", options.histogram_bins);
    if (j.contains("gen")) options.gen = GenFromJson(j["gen"]);
    if (j.contains("donor")) donor_text = j["donor"].get<std::string>();
  }
  AlphaExpr donor;
  if (donor_text) {
    donor = alphagp::Parse(*donor_text, dsl);
  } else {
    donor = ParseAlphaList(ctx, dsl, 1, "sparsity (donor fallback)").front();
  }

  alphagp::SparsityOptions unconstrained = options;
  unconstrained.mode = alphagp::SampleMode::Unconstrained;
  const auto base =
      alphagp::SparsityExperiment(unconstrained, panel, fwd, range, dsl);

  alphagp::SparsityOptions constrained = options;
  constrained.mode = alphagp::SampleMode::SameStructure;
  constrained.donor = donor;
  const auto structured =
      alphagp::SparsityExperiment(constrained, panel, fwd, range, dsl);

  Json doc;
  doc["donor"] = alphagp::Print(donor, dsl);
  doc["range"] = RangeDoc(panel, range);
  doc["unconstrained"] = ToJson(base);
  doc["same_structure"] = ToJson(structured);
  WriteArtifact(ctx.out_dir / "sparsity.json", alphagp::JsonBytes(doc));
  std::ostringstream csv;
  alphagp::WriteSparsityCsv(base, structured, csv);
  WriteArtifact(ctx.out_dir / "sparsity.csv", csv.str());
}

void CmdCorr(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  const MarketPanel panel = BuildPanel(ctx, dsl);
  const std::vector<AlphaExpr> alphas = ParseAlphaList(ctx, dsl, 2, "corr");
  const DateRange range = TrainOrFull(ctx, panel);

  const std::vector<AlphaMatrix> matrices = EvaluateAll(alphas, panel, dsl);
  std::vector<std::string> names;
  for (const AlphaExpr& expr : alphas) names.push_back(alphagp::Print(expr, dsl));
  const auto summary =
      alphagp::AlphaCorrelationMatrix(matrices, range, ctx.fitness);

  Json doc = ToJson(summary, names);
  doc["range"] = RangeDoc(panel, range);
  WriteArtifact(ctx.out_dir / "corr.json", alphagp::JsonBytes(doc));
  std::ostringstream csv;
  alphagp::WriteCorrelationCsv(summary, names, csv);
  WriteArtifact(ctx.out_dir / "corr.csv", csv.str());
}

void CmdBacktest(const Context& ctx) {
  const Dsl dsl = BuildDsl(ctx);
  const MarketPanel panel = BuildPanel(ctx, dsl);
  const auto fwd = alphagp::ComputeForwardReturns(panel, ctx.horizon_days);
  const std::vector<AlphaExpr> alphas = ParseAlphaList(ctx, dsl, 1, "backtest");

  const auto train = RangeFromKey(ctx, panel, "train");
  const auto test = RangeFromKey(ctx, panel, "test");
  if (!train || !test) {
    throw InputError("backtest needs explicit train and test date ranges");
  }

  alphagp::BacktestOptions base;
  std::vector<int> hold_sizes{10, 30, 100};
  if (ctx.manifest.contains("backtest")) {
    const Json& j = ctx.manifest["backtest"];
    hold_sizes = j.value("hold_sizes", hold_sizes);
    base.rebalance_days = j.value("rebalance_days", base.rebalance_days);
    base.cost_rate = j.value("cost_rate", base.cost_rate);
  }
  if (hold_sizes.empty()) throw InputError("backtest.hold_sizes is empty");

  const std::vector<AlphaMatrix> matrices = EvaluateAll(alphas, panel, dsl);
  const auto model = alphagp::FitLinearModel(matrices, fwd, *train);
  WriteArtifact(ctx.out_dir / "model.json",
                alphagp::JsonBytes(ToJson(model, dsl)));

  std::vector<alphagp::BacktestReport> reports;
  reports.reserve(hold_sizes.size());
  for (int hold : hold_sizes) {
    alphagp::BacktestOptions options = base;
    options.hold_size = hold;
    reports.push_back(
        alphagp::RunBacktest(model, panel, matrices, *test, options));
    const alphagp::BacktestReport& report = reports.back();
    const std::string suffix = std::to_string(hold);
    WriteArtifact(ctx.out_dir / ("backtest_" + suffix + ".json"),
                  alphagp::JsonBytes(ToJson(report, panel)));
    std::ostringstream curve;
    alphagp::WriteValueCurveCsv(report, panel, curve);
    WriteArtifact(ctx.out_dir / ("curve_" + suffix + ".csv"), curve.str());
    std::ostringstream holdings;
    alphagp::WriteHoldingsCsv(report, panel, holdings);
    WriteArtifact(ctx.out_dir / ("holdings_" + suffix + ".csv"),
                  holdings.str());
  }
  std::vector<std::pair<int, const alphagp::BacktestReport*>> pairs;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    pairs.emplace_back(hold_sizes[i], &reports[i]);
  }
  std::ostringstream summary;
  alphagp::WritePerfSummaryCsv(pairs, summary);
  WriteArtifact(ctx.out_dir / "summary.csv", summary.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warm-start genetic programming for alpha factors"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string output_override;
  std::uint64_t seed_value = 0;
  std::vector<CLI::Option*> seed_options;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "write a synthetic market panel CSV"},
      {"eval", "score alphas with the IC family, in and out of sample"},
      {"enhance", "warm-start GP runs, one per seed alpha"},
      {"mine-baseline", "traditional GP run from random initialization"},
      {"sparsity", "random-sampling effective-alpha experiment, both modes"},
      {"corr", "pairwise alpha correlation matrix"},
      {"backtest", "fit the linear model and simulate the portfolio"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--manifest", manifest_path, "run manifest JSON file")
        ->required();
    sub->add_option("--output", output_override,
                    "output directory (overrides manifest output_dir)");
    seed_options.push_back(sub->add_option(
        "--seed", seed_value, "rng seed (overrides manifest rng_seed)"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<std::uint64_t> seed_override;
  for (const CLI::Option* option : seed_options) {
    if (option->count() > 0) seed_override = seed_value;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  using Command = void (*)(const Context&);
  const std::vector<std::pair<std::string, Command>> dispatch = {
      {"synth", CmdSynth},         {"eval", CmdEval},
      {"enhance", CmdEnhance},     {"mine-baseline", CmdMineBaseline},
      {"sparsity", CmdSparsity},   {"corr", CmdCorr},
      {"backtest", CmdBacktest},
  };

  try {
    Context ctx = BuildContext(manifest_path, output_override, seed_override);
    for (const auto& [name, fn] : dispatch) {
      if (name == command) {
        fn(ctx);
        return 0;
      }
    }
    throw InputError("unknown command " + command);
  } catch (const Json::exception& e) {
    std::cerr << "error: manifest: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const alphagp::RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
