// fairsoc: run experiments, summarize run logs and draw consumption
// histograms.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or I/O
// error, 3 internal invariant violation.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fairsoc/config.hpp"
#include "fairsoc/errors.hpp"
#include "fairsoc/experiment.hpp"
#include "fairsoc/histogram.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2, kInvariant = 3 };

struct RunArgs {
  std::string config;
  std::optional<std::string> strategy;
  std::optional<int> societies;
  std::optional<int> generations;
  std::optional<int> agents;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> workers;
  bool quiet = false;
};

struct HistogramArgs {
  std::string in;
  std::string strategies = "0,Ab";
  std::string generation = "last";
  std::uint64_t society = 0;
  std::string out;
  bool raw = false;
};

int do_run(const RunArgs& args) {
  fairsoc::ConfigOverrides overrides;
  if (args.strategy) overrides["strategies"] = *args.strategy;
  if (args.societies) overrides["societies"] = std::to_string(*args.societies);
  if (args.generations) overrides["generations"] = std::to_string(*args.generations);
  if (args.agents) overrides["initial_population"] = std::to_string(*args.agents);
  if (args.seed) overrides["seed"] = std::to_string(*args.seed);
  if (args.out) overrides["output_dir"] = *args.out;
  if (args.format) overrides["format"] = *args.format;
  if (args.workers) overrides["workers"] = std::to_string(*args.workers);

  const fairsoc::ExperimentConfig config = fairsoc::load_config(args.config, overrides);
  std::mutex mu;
  std::size_t done = 0;
  const std::size_t total =
      static_cast<std::size_t>(config.societies) *
      (config.strategies.size() +
       (std::find(config.strategies.begin(), config.strategies.end(), fairsoc::StrategyKind::S0) ==
                config.strategies.end()
            ? 1
            : 0));
  fairsoc::ProgressFn progress;
  if (!args.quiet) {
    progress = [&](fairsoc::StrategyKind kind, std::uint64_t index) {
      std::lock_guard lock(mu);
      ++done;
      std::fprintf(stderr, "[%zu/%zu] strategy %s society %llu done\n", done, total,
                   std::string(fairsoc::strategy_name(kind)).c_str(), static_cast<unsigned long long>(index));
    };
  }
  const fairsoc::ExperimentResult result = fairsoc::run_and_write(config, progress);
  std::cout << fairsoc::format_report_table(result.report);
  std::cout << "outputs written to " << config.output_dir << "\n";
  return kOk;
}

int do_report(const std::string& in) {
  const fairsoc::ExperimentReport report = fairsoc::report_from_directory(in);
  fairsoc::write_report(report, in, fairsoc::detect_format(in));
  std::cout << fairsoc::format_report_table(report);
  return kOk;
}

int do_histogram(const HistogramArgs& args) {
  const auto kinds = fairsoc::parse_strategy_list(args.strategies);
  if (kinds.size() != 2) throw fairsoc::UsageError("--strategies needs exactly two strategies");
  int generation = -1;
  if (args.generation != "last") {
    try {
      std::size_t used = 0;
      generation = std::stoi(args.generation, &used);
      if (used != args.generation.size() || generation < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw fairsoc::UsageError("--generation must be 'last' or a non-negative integer");
    }
  }
  std::vector<fairsoc::HistogramSeries> series;
  for (fairsoc::StrategyKind kind : kinds) {
    series.push_back({"Strategy " + std::string(fairsoc::strategy_name(kind)),
                      fairsoc::read_consumption_sample(args.in, kind, args.society, generation)});
  }
  fairsoc::HistogramOptions options;
  options.normalize_by_mean = !args.raw;
  options.title = "Consumption, society " + std::to_string(args.society) + ", generation " +
                  args.generation;
  fairsoc::emit_histogram(series, args.out, options);
  std::cout << "histogram written to " << args.out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based society simulation under four allocation strategies"};
  app.set_version_flag("--version", std::string("fairsoc ") + FAIRSOC_VERSION);
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write logs and the report");
  run_cmd->add_option("--config", run.config, "Configuration file (key = value)");
  run_cmd->add_option("--strategy", run.strategy, "0, A, b, Ab, all, or a comma-separated list");
  run_cmd->add_option("--societies", run.societies, "Societies per strategy");
  run_cmd->add_option("--generations", run.generations, "Maximum generations per society");
  run_cmd->add_option("--agents", run.agents, "Founding population size");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--format", run.format, "csv or json");
  run_cmd->add_option("--workers", run.workers, "Worker threads (0: all cores)");
  run_cmd->add_flag("--quiet", run.quiet, "Suppress progress output");

  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "Summarize the run logs in a directory");
  report_cmd->add_option("--in", report_in, "Run output directory")->required();

  HistogramArgs hist;
  auto* hist_cmd = app.add_subcommand("histogram", "Overlay two consumption histograms as SVG");
  hist_cmd->add_option("--in", hist.in, "Run output directory")->required();
  hist_cmd->add_option("--strategies", hist.strategies, "Two strategies, e.g. 0,Ab");
  hist_cmd->add_option("--generation", hist.generation, "'last' or a generation number");
  hist_cmd->add_option("--society", hist.society, "Society index");
  hist_cmd->add_option("--out", hist.out, "SVG output path")->required();
  hist_cmd->add_flag("--raw", hist.raw, "Plot raw consumption instead of consumption / mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return do_run(run);
    if (*report_cmd) return do_report(report_in);
    if (*hist_cmd) return do_histogram(hist);
  } catch (const fairsoc::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const fairsoc::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const fairsoc::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const fairsoc::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
