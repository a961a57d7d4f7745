#include "fairsoc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fairsoc/errors.hpp"

namespace fairsoc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError(key, "expected an integer, got '" + value + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key, "expected an unsigned 64-bit integer, got '" + value + "'");
  }
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (in.fail() || !in.eof() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite real number, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

int positive_int(const std::string& key, const std::string& value, long long min = 1) {
  const long long v = to_integer(key, value);
  if (v < min || v > 1'000'000'000) {
    throw ConfigError(key, "must be an integer >= " + std::to_string(min));
  }
  return static_cast<int>(v);
}

double positive_real(const std::string& key, const std::string& value) {
  const double v = to_real(key, value);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

double nonnegative_real(const std::string& key, const std::string& value) {
  const double v = to_real(key, value);
  if (!(v >= 0.0)) throw ConfigError(key, "must be non-negative");
  return v;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, auto& k, auto& v) { c.master_seed = to_unsigned(k, v); }},
      {"strategies",
       [](auto& c, auto& k, auto& v) {
         try {
           c.strategies = parse_strategy_list(v);
         } catch (const ParameterError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"societies", [](auto& c, auto& k, auto& v) { c.societies = positive_int(k, v); }},
      {"generations", [](auto& c, auto& k, auto& v) { c.generations = positive_int(k, v); }},
      {"initial_population",
       [](auto& c, auto& k, auto& v) { c.evolution.initial_population = positive_int(k, v, 2); }},
      {"gamma_rate", [](auto& c, auto& k, auto& v) { c.evolution.gamma_rate = positive_real(k, v); }},
      {"mortality_mid",
       [](auto& c, auto& k, auto& v) { c.evolution.mortality_mid = positive_real(k, v); }},
      {"mortality_scale",
       [](auto& c, auto& k, auto& v) { c.evolution.mortality_scale = positive_real(k, v); }},
      {"mutation_sd",
       [](auto& c, auto& k, auto& v) { c.evolution.mutation_sd = nonnegative_real(k, v); }},
      {"k_max", [](auto& c, auto& k, auto& v) { c.evolution.k_max = positive_int(k, v); }},
      {"population_cap",
       [](auto& c, auto& k, auto& v) { c.evolution.population_cap = positive_int(k, v, 2); }},
      {"fertility_weighting",
       [](auto& c, auto& k, auto& v) {
         if (v == "geometric") {
           c.evolution.weighting = FertilityWeighting::Geometric;
         } else if (v == "linear") {
           c.evolution.weighting = FertilityWeighting::Linear;
         } else {
           throw ConfigError(k, "expected geometric or linear, got '" + v + "'");
         }
       }},
      {"myopic_floor",
       [](auto& c, auto& k, auto& v) { c.evolution.allocation.myopic_floor = nonnegative_real(k, v); }},
      {"warm_start",
       [](auto& c, auto& k, auto& v) { c.evolution.allocation.warm_start = to_bool(k, v); }},
      {"cold_start",
       [](auto& c, auto& k, auto& v) { c.evolution.allocation.cold_start = to_bool(k, v); }},
      {"output_dir",
       [](auto& c, auto& k, auto& v) {
         if (v.empty()) throw ConfigError(k, "must not be empty");
         c.output_dir = v;
       }},
      {"format",
       [](auto& c, auto& k, auto& v) {
         if (v == "csv") {
           c.format = OutputFormat::Csv;
         } else if (v == "json") {
           c.format = OutputFormat::Json;
         } else {
           throw ConfigError(k, "expected csv or json, got '" + v + "'");
         }
       }},
      {"workers", [](auto& c, auto& k, auto& v) { c.workers = positive_int(k, v, 0); }},
      {"optimizer.max_iterations",
       [](auto& c, auto& k, auto& v) {
         c.evolution.allocation.simplex.max_iterations = positive_int(k, v);
       }},
      {"optimizer.tolerance",
       [](auto& c, auto& k, auto& v) { c.evolution.allocation.simplex.tolerance = positive_real(k, v); }},
      {"optimizer.restarts",
       [](auto& c, auto& k, auto& v) {
         c.evolution.allocation.simplex.restarts = positive_int(k, v, 0);
       }},
      {"optimizer.extra_restarts",
       [](auto& c, auto& k, auto& v) {
         c.evolution.allocation.simplex.extra_restarts = positive_int(k, v, 0);
       }},
      {"optimizer.block_size",
       [](auto& c, auto& k, auto& v) {
         c.evolution.allocation.simplex.block_size = static_cast<std::size_t>(positive_int(k, v));
       }},
      {"optimizer.block_threshold",
       [](auto& c, auto& k, auto& v) {
         c.evolution.allocation.simplex.block_threshold = static_cast<std::size_t>(positive_int(k, v));
       }},
      {"optimizer.max_sweeps",
       [](auto& c, auto& k, auto& v) { c.evolution.allocation.simplex.max_sweeps = positive_int(k, v, 2); }},
      {"optimizer.reflection",
       [](auto& c, auto& k, auto& v) { c.evolution.allocation.simplex.reflection = positive_real(k, v); }},
      {"optimizer.expansion",
       [](auto& c, auto& k, auto& v) {
         const double x = to_real(k, v);
         if (!(x > 1.0)) throw ConfigError(k, "must exceed 1");
         c.evolution.allocation.simplex.expansion = x;
       }},
      {"optimizer.contraction",
       [](auto& c, auto& k, auto& v) {
         const double x = to_real(k, v);
         if (!(x > 0.0 && x < 1.0)) throw ConfigError(k, "must lie in (0,1)");
         c.evolution.allocation.simplex.contraction = x;
       }},
      {"optimizer.shrink",
       [](auto& c, auto& k, auto& v) {
         const double x = to_real(k, v);
         if (!(x > 0.0 && x < 1.0)) throw ConfigError(k, "must lie in (0,1)");
         c.evolution.allocation.simplex.shrink = x;
       }},
  };
  return table;
}

void apply(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key");
  it->second(config, key, value);
}

}  // namespace

std::string format_name(OutputFormat format) { return format == OutputFormat::Csv ? "csv" : "json"; }

std::string strategy_dir_name(StrategyKind kind) { return "S" + std::string(strategy_name(kind)); }

std::vector<StrategyKind> parse_strategy_list(const std::string& text) {
  const std::string all = trim(text);
  if (all == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<StrategyKind> out;
  std::stringstream in(all);
  std::string item;
  while (std::getline(in, item, ',')) {
    const StrategyKind kind = parse_strategy(trim(item));
    if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
  }
  if (out.empty()) throw ParameterError("empty strategy list");
  std::sort(out.begin(), out.end());
  return out;
}

std::string ExperimentConfig::simulation_text() const {
  const auto& a = evolution.allocation;
  const auto& o = a.simplex;
  std::ostringstream out;
  out << "seed = " << master_seed << '\n';
  out << "strategies = ";
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    out << (i ? "," : "") << strategy_name(strategies[i]);
  }
  out << '\n';
  out << "societies = " << societies << '\n';
  out << "generations = " << generations << '\n';
  out << "initial_population = " << evolution.initial_population << '\n';
  out << "gamma_rate = " << real_text(evolution.gamma_rate) << '\n';
  out << "mortality_mid = " << real_text(evolution.mortality_mid) << '\n';
  out << "mortality_scale = " << real_text(evolution.mortality_scale) << '\n';
  out << "mutation_sd = " << real_text(evolution.mutation_sd) << '\n';
  out << "k_max = " << evolution.k_max << '\n';
  out << "population_cap = " << evolution.population_cap << '\n';
  out << "fertility_weighting = "
      << (evolution.weighting == FertilityWeighting::Geometric ? "geometric" : "linear") << '\n';
  out << "myopic_floor = " << real_text(a.myopic_floor) << '\n';
  out << "warm_start = " << (a.warm_start ? "true" : "false") << '\n';
  out << "cold_start = " << (a.cold_start ? "true" : "false") << '\n';
  out << "\n[optimizer]\n";
  out << "max_iterations = " << o.max_iterations << '\n';
  out << "tolerance = " << real_text(o.tolerance) << '\n';
  out << "restarts = " << o.restarts << '\n';
  out << "extra_restarts = " << o.extra_restarts << '\n';
  out << "block_size = " << o.block_size << '\n';
  out << "block_threshold = " << o.block_threshold << '\n';
  out << "max_sweeps = " << o.max_sweeps << '\n';
  out << "reflection = " << real_text(o.reflection) << '\n';
  out << "expansion = " << real_text(o.expansion) << '\n';
  out << "contraction = " << real_text(o.contraction) << '\n';
  out << "shrink = " << real_text(o.shrink) << '\n';
  return out.str();
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "output_dir = " << output_dir << '\n';
  out << "format = " << format_name(format) << '\n';
  out << "workers = " << workers << '\n';
  out << simulation_text();
  return out.str();
}

std::string ExperimentConfig::digest() const {
  // FNV-1a over the canonical text, finished with a splitmix round.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : simulation_text()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix64(h)));
  return buf;
}

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no), "malformed section header");
      }
      section = trim(std::string_view(content).substr(1, content.size() - 2));
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    std::string key = trim(std::string_view(content).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    apply(config, key, trim(std::string_view(content).substr(eq + 1)));
  }
  for (const auto& [key, value] : overrides) apply(config, key, trim(value));

  try {
    config.evolution.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("config", e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  if (path.empty()) {
    if (overrides.empty()) throw UsageError("no configuration: pass --config or override flags");
    return parse_config("", overrides);
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

}  // namespace fairsoc
