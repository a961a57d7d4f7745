#include "fairsoc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "fairsoc/errors.hpp"
#include "json.hpp"

namespace fairsoc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Tabular files. Every artifact is a table with typed columns and a metadata
// header: `# key=value` comment lines in CSV, a "meta" object in JSON.

enum class ColumnKind { Integer, Real, Boolean };

struct Column {
  std::string name;
  ColumnKind kind;
};

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
};

std::string real_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_text(double v, ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Integer: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
      return buf;
    }
    case ColumnKind::Boolean:
      return v != 0.0 ? "true" : "false";
    case ColumnKind::Real:
      break;
  }
  return real_text(v);
}

json cell_json(double v, ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Integer:
      return static_cast<std::int64_t>(v);
    case ColumnKind::Boolean:
      return v != 0.0;
    case ColumnKind::Real:
      break;
  }
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string render_table(const Table& t, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    std::string out;
    for (const auto& [k, v] : t.meta) out += "# " + k + "=" + v + "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      out += (c ? "," : "") + t.columns[c].name;
    }
    out += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += cell_text(row[c], t.columns[c].kind);
      }
      out += "\n";
    }
    return out;
  }
  json meta = json::object();
  for (const auto& [k, v] : t.meta) meta[k] = v;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      obj[t.columns[c].name] = cell_json(row[c], t.columns[c].kind);
    }
    rows.push_back(std::move(obj));
  }
  json doc = json::object();
  doc["meta"] = std::move(meta);
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

double parse_cell(const std::string& text, const fs::path& path) {
  if (text == "true") return 1.0;
  if (text == "false") return 0.0;
  if (text == "nan" || text.empty()) return kNaN;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double v = 0.0;
  in >> v;
  if (in.fail() || !in.eof()) throw IoError("malformed value '" + text + "' in " + path.string());
  return v;
}

// Reads a table, keeping only the requested columns in the given order.
Table read_table(const fs::path& path, const std::vector<std::string>& wanted) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  Table t;
  for (const auto& name : wanted) t.columns.push_back({name, ColumnKind::Real});

  if (path.extension() == ".json") {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
    if (doc.contains("meta")) {
      for (const auto& [k, v] : doc["meta"].items()) {
        t.meta.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    if (!doc.contains("rows") || !doc["rows"].is_array()) {
      throw IoError("missing rows array in " + path.string());
    }
    for (const auto& obj : doc["rows"]) {
      std::vector<double> row;
      for (const auto& name : wanted) {
        if (!obj.contains(name)) throw IoError("missing column '" + name + "' in " + path.string());
        const json& cell = obj[name];
        if (cell.is_null()) {
          row.push_back(kNaN);
        } else if (cell.is_boolean()) {
          row.push_back(cell.get<bool>() ? 1.0 : 0.0);
        } else if (cell.is_number()) {
          row.push_back(cell.get<double>());
        } else {
          throw IoError("non-numeric column '" + name + "' in " + path.string());
        }
      }
      t.rows.push_back(std::move(row));
    }
    return t;
  }

  std::string line;
  std::vector<std::size_t> positions;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos && line.size() > 2) {
        t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      for (const auto& name : wanted) {
        const auto it = std::find(cells.begin(), cells.end(), name);
        if (it == cells.end()) throw IoError("missing column '" + name + "' in " + path.string());
        positions.push_back(static_cast<std::size_t>(it - cells.begin()));
      }
      have_header = true;
      continue;
    }
    std::vector<double> row;
    for (std::size_t p : positions) {
      if (p >= cells.size()) throw IoError("short row in " + path.string());
      row.push_back(parse_cell(cells[p], path));
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError("no header row in " + path.string());
  return t;
}

std::string meta_value(const Table& t, const std::string& key) {
  for (const auto& [k, v] : t.meta) {
    if (k == key) return v;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Schemas.

const std::vector<Column>& generation_columns() {
  static const std::vector<Column> cols = {
      {"society_index", ColumnKind::Integer},  {"generation", ColumnKind::Integer},
      {"population", ColumnKind::Integer},     {"births", ColumnKind::Integer},
      {"deaths", ColumnKind::Integer},         {"total_labor", ColumnKind::Real},
      {"total_output", ColumnKind::Real},      {"mean_consumption", ColumnKind::Real},
      {"consumption_cv", ColumnKind::Real},    {"consumption_skewness", ColumnKind::Real},
      {"min_utility", ColumnKind::Real},       {"mean_utility", ColumnKind::Real},
      {"mean_fertility", ColumnKind::Real},    {"failed", ColumnKind::Boolean},
      {"capped", ColumnKind::Boolean},
  };
  return cols;
}

const std::vector<Column>& sample_columns() {
  static const std::vector<Column> cols = {{"society_index", ColumnKind::Integer},
                                           {"generation", ColumnKind::Integer},
                                           {"consumption", ColumnKind::Real}};
  return cols;
}

std::vector<std::string> names_of(const std::vector<Column>& cols) {
  std::vector<std::string> out;
  for (const auto& c : cols) out.push_back(c.name);
  return out;
}

std::vector<std::pair<std::string, std::string>> header_meta(const ExperimentConfig& config,
                                                             const std::string& artifact) {
  return {{"artifact", artifact},
          {"version", std::string("fairsoc ") + FAIRSOC_VERSION},
          {"seed", std::to_string(config.master_seed)},
          {"config_digest", config.digest()}};
}

std::string extension(OutputFormat format) { return "." + format_name(format); }

fs::path strategy_dir(const fs::path& root, StrategyKind kind) {
  return root / strategy_dir_name(kind);
}

std::vector<StrategyKind> strategies_to_run(const ExperimentConfig& config) {
  std::vector<StrategyKind> out{StrategyKind::S0};
  for (StrategyKind k : config.strategies) {
    if (k != StrategyKind::S0) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SocietyRun run_one(const ExperimentConfig& config, StrategyKind strategy, std::uint64_t index) {
  Society society = found_society(index, strategy, config.evolution, config.master_seed);
  SocietyRun run;
  run.society_index = index;
  run.strategy = strategy;
  run.gamma = society.params.gamma;
  while (static_cast<int>(run.records.size()) < config.generations && !society.failed &&
         !society.capped) {
    run.records.push_back(step_generation(society, config.evolution));
    run.consumptions.push_back(society.last_consumptions);
  }
  return run;
}

SocietySummary summary_of(const SocietyRun& run) {
  return summarize(run.society_index, run.strategy, run.records,
                   run.consumptions.empty() ? std::vector<double>{} : run.consumptions.back());
}

ExperimentReport report_from_summaries(const std::vector<SocietySummary>& all) {
  std::vector<SocietySummary> baseline;
  for (const auto& s : all) {
    if (s.strategy == StrategyKind::S0) baseline.push_back(s);
  }
  if (baseline.empty()) throw StatisticError("no Strategy 0 societies: the baseline is required");
  ExperimentReport report = build_report(all, baseline);
  report.metadata["mortality"] = "deaths per agent-generation, indexed to Strategy 0 = 100";
  report.metadata["cv"] =
      "per-generation CV of consumption, averaged over generations then non-failed societies, "
      "indexed to Strategy 0 = 100";
  report.metadata["growth"] =
      "mean over non-failed societies of the mean generation-over-generation change in total "
      "consumption, percent";
  report.metadata["recessions"] = "runs of >= 3 negative growth values per 100 completed generations";
  report.metadata["failed"] = "percent of societies with fewer than two living agents";
  return report;
}

std::string optional_text(const std::optional<double>& v) { return v ? real_text(*v) : ""; }

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'" +
                  (ec ? ": " + ec.message() : std::string{}));
  }
}

}  // namespace

const StrategyRuns* ExperimentResult::runs_for(StrategyKind kind) const {
  for (const auto& r : runs) {
    if (r.strategy == kind) return &r;
  }
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.evolution.validate();
  if (config.societies < 1) throw ParameterError("societies must be positive");
  if (config.generations < 1) throw ParameterError("generations must be positive");

  const std::vector<StrategyKind> kinds = strategies_to_run(config);
  const std::size_t per = static_cast<std::size_t>(config.societies);
  const std::size_t jobs = kinds.size() * per;
  std::vector<SocietyRun> results(jobs);

  std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const StrategyKind kind = kinds[job / per];
      const std::uint64_t index = job % per;
      try {
        results[job] = run_one(config, kind, index);
        if (progress) progress(kind, index);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentResult out;
  out.config = config;
  std::vector<SocietySummary> summaries;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    StrategyRuns sr;
    sr.strategy = kinds[k];
    for (std::size_t i = 0; i < per; ++i) {
      SocietyRun& run = results[k * per + i];
      summaries.push_back(summary_of(run));
      sr.societies.push_back(std::move(run));
    }
    out.runs.push_back(std::move(sr));
  }
  out.report = report_from_summaries(summaries);
  out.report.metadata["seed"] = std::to_string(config.master_seed);
  out.report.metadata["config_digest"] = config.digest();
  return out;
}

ExperimentResult run_and_write(const ExperimentConfig& config, const ProgressFn& progress) {
  const fs::path root(config.output_dir);
  ensure_directory(root);
  const fs::path probe = root / ".write_probe";
  write_text_file(probe, "");
  std::error_code ec;
  fs::remove(probe, ec);

  ExperimentResult result = run_experiment(config, progress);
  write_outputs(result);
  return result;
}

void write_outputs(const ExperimentResult& result) {
  const ExperimentConfig& config = result.config;
  const fs::path root(config.output_dir);
  ensure_directory(root);

  for (const StrategyRuns& sr : result.runs) {
    const fs::path dir = strategy_dir(root, sr.strategy);
    ensure_directory(dir);

    Table gen;
    gen.meta = header_meta(config, "generation log");
    gen.meta.emplace_back("strategy", std::string(strategy_name(sr.strategy)));
    gen.columns = generation_columns();
    Table samples;
    samples.meta = header_meta(config, "consumption samples");
    samples.meta.emplace_back("strategy", std::string(strategy_name(sr.strategy)));
    samples.columns = sample_columns();

    for (const SocietyRun& run : sr.societies) {
      const auto idx = static_cast<double>(run.society_index);
      for (std::size_t g = 0; g < run.records.size(); ++g) {
        const GenerationRecord& r = run.records[g];
        gen.rows.push_back({idx, static_cast<double>(r.generation),
                            static_cast<double>(r.population), static_cast<double>(r.births),
                            static_cast<double>(r.deaths), r.total_labor, r.total_output,
                            r.mean_consumption, r.consumption_cv, r.consumption_skewness,
                            r.min_utility, r.mean_utility, r.mean_fertility,
                            r.failed ? 1.0 : 0.0, r.capped ? 1.0 : 0.0});
        for (double c : run.consumptions[g]) {
          samples.rows.push_back({idx, static_cast<double>(r.generation), c});
        }
      }
    }
    write_text_file(dir / ("generations" + extension(config.format)), render_table(gen, config.format));
    write_text_file(dir / ("consumption" + extension(config.format)),
                    render_table(samples, config.format));
  }

  write_report(result.report, root.string(), config.format);

  std::string cfg = "# effective configuration\n";
  for (const auto& [k, v] : header_meta(config, "effective configuration")) {
    if (k != "artifact") cfg += "# " + k + "=" + v + "\n";
  }
  cfg += config.to_text();
  write_text_file(root / "effective.cfg", cfg);

  json meta = json::object();
  for (const auto& [k, v] : header_meta(config, "run metadata")) meta[k] = v;
  meta["created_utc"] = timestamp_utc();
  meta["effective_config"] = config.to_text();
  json ran = json::array();
  for (const auto& sr : result.runs) ran.push_back(std::string(strategy_name(sr.strategy)));
  meta["strategies_run"] = ran;
  json defs = json::object();
  for (const auto& [k, v] : result.report.metadata) defs[k] = v;
  meta["report_metadata"] = defs;
  write_text_file(root / "meta.json", meta.dump(2) + "\n");
}

OutputFormat detect_format(const std::string& dir) {
  const fs::path root(dir);
  for (StrategyKind k : kAllStrategies) {
    if (fs::exists(strategy_dir(root, k) / "generations.csv")) return OutputFormat::Csv;
    if (fs::exists(strategy_dir(root, k) / "generations.json")) return OutputFormat::Json;
  }
  throw IoError("no generation logs under '" + dir + "'");
}

ExperimentReport report_from_directory(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw IoError("not a directory: '" + dir + "'");
  const OutputFormat format = detect_format(dir);
  const std::vector<std::string> wanted = names_of(generation_columns());

  std::vector<SocietySummary> summaries;
  std::string seed;
  std::string digest;
  for (StrategyKind kind : kAllStrategies) {
    const fs::path file = strategy_dir(root, kind) / ("generations" + extension(format));
    if (!fs::exists(file)) continue;
    const Table t = read_table(file, wanted);
    if (seed.empty()) {
      seed = meta_value(t, "seed");
      digest = meta_value(t, "config_digest");
    }
    std::map<std::uint64_t, std::vector<GenerationRecord>> by_society;
    for (const auto& row : t.rows) {
      GenerationRecord r;
      r.generation = static_cast<int>(row[1]);
      r.population = static_cast<std::int64_t>(row[2]);
      r.births = static_cast<std::int64_t>(row[3]);
      r.deaths = static_cast<std::int64_t>(row[4]);
      r.total_labor = row[5];
      r.total_output = row[6];
      r.mean_consumption = row[7];
      r.consumption_cv = row[8];
      r.consumption_skewness = row[9];
      r.min_utility = row[10];
      r.mean_utility = row[11];
      r.mean_fertility = row[12];
      r.failed = row[13] != 0.0;
      r.capped = row[14] != 0.0;
      by_society[static_cast<std::uint64_t>(row[0])].push_back(r);
    }
    for (auto& [index, records] : by_society) {
      std::sort(records.begin(), records.end(),
                [](const auto& a, const auto& b) { return a.generation < b.generation; });
      summaries.push_back(summarize(index, kind, records));
    }
  }
  ExperimentReport report = report_from_summaries(summaries);
  if (!seed.empty()) report.metadata["seed"] = seed;
  if (!digest.empty()) report.metadata["config_digest"] = digest;
  return report;
}

void write_report(const ExperimentReport& report, const std::string& dir, OutputFormat format) {
  const fs::path root(dir);
  ensure_directory(root);
  const auto get = [&](const char* key) {
    const auto it = report.metadata.find(key);
    return it == report.metadata.end() ? std::string{} : it->second;
  };
  const std::vector<std::pair<std::string, std::optional<double> StrategyRow::*>> metrics = {
      {"Growth", &StrategyRow::growth_pct},
      {"Recessions", &StrategyRow::recession_pct},
      {"Mortality", &StrategyRow::mortality_index},
      {"CV", &StrategyRow::cv_index},
      {"Pct. Failed", &StrategyRow::failed_pct},
  };

  std::string text;
  if (format == OutputFormat::Csv) {
    text += "# artifact=report\n";
    text += std::string("# version=fairsoc ") + FAIRSOC_VERSION + "\n";
    text += "# seed=" + get("seed") + "\n";
    text += "# config_digest=" + get("config_digest") + "\n";
    text += "metric";
    for (const auto& row : report.rows) text += ",strategy_" + std::string(strategy_name(row.strategy));
    text += "\n";
    for (const auto& [name, field] : metrics) {
      text += name;
      for (const auto& row : report.rows) text += "," + optional_text(row.*field);
      text += "\n";
    }
  } else {
    json doc = json::object();
    doc["meta"] = {{"artifact", "report"},
                   {"version", std::string("fairsoc ") + FAIRSOC_VERSION},
                   {"seed", get("seed")},
                   {"config_digest", get("config_digest")}};
    json defs = json::object();
    for (const auto& [k, v] : report.metadata) defs[k] = v;
    doc["definitions"] = defs;
    json rows = json::array();
    for (const auto& [name, field] : metrics) {
      json obj = json::object();
      obj["metric"] = name;
      for (const auto& row : report.rows) {
        const auto& v = row.*field;
        obj["strategy_" + std::string(strategy_name(row.strategy))] =
            v ? json(*v) : json(nullptr);
      }
      rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    text = doc.dump(2) + "\n";
  }
  write_text_file(root / ("report" + extension(format)), text);
}

std::string format_report_table(const ExperimentReport& report) {
  const auto cell = [](const std::optional<double>& v, bool indexed, bool baseline) {
    if (!v) return std::string("n/a");
    if (indexed && baseline) return std::string("ref.");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *v);
    return std::string(buf);
  };
  struct Line {
    const char* name;
    std::optional<double> StrategyRow::*field;
    bool indexed;
  };
  const Line lines[] = {{"Growth", &StrategyRow::growth_pct, false},
                        {"Recessions", &StrategyRow::recession_pct, false},
                        {"Mortality", &StrategyRow::mortality_index, true},
                        {"CV", &StrategyRow::cv_index, true},
                        {"Pct. Failed", &StrategyRow::failed_pct, false}};

  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-12s", "");
  out += buf;
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%14s", ("Strategy " + std::string(strategy_name(row.strategy))).c_str());
    out += buf;
  }
  out += "\n";
  for (const Line& line : lines) {
    std::snprintf(buf, sizeof buf, "%-12s", line.name);
    out += buf;
    for (const auto& row : report.rows) {
      std::snprintf(buf, sizeof buf, "%14s",
                    cell(row.*(line.field), line.indexed, row.strategy == StrategyKind::S0).c_str());
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<double> read_consumption_sample(const std::string& dir, StrategyKind strategy,
                                            std::uint64_t society_index, int generation) {
  const OutputFormat format = detect_format(dir);
  const fs::path file = strategy_dir(fs::path(dir), strategy) / ("consumption" + extension(format));
  if (!fs::exists(file)) {
    throw IoError("no consumption samples for strategy " + std::string(strategy_name(strategy)) +
                  " under '" + dir + "'");
  }
  const Table t = read_table(file, names_of(sample_columns()));
  int target = generation;
  if (target < 0) {
    for (const auto& row : t.rows) {
      if (static_cast<std::uint64_t>(row[0]) == society_index) {
        target = std::max(target, static_cast<int>(row[1]));
      }
    }
  }
  std::vector<double> out;
  for (const auto& row : t.rows) {
    if (static_cast<std::uint64_t>(row[0]) == society_index && static_cast<int>(row[1]) == target) {
      out.push_back(row[2]);
    }
  }
  return out;
}

}  // namespace fairsoc
