#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fairsoc/errors.hpp"
#include "fairsoc/experiment.hpp"
#include "json.hpp"

using namespace fairsoc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fairsoc_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig tiny(const fs::path& out, const std::string& strategies = "all") {
  ExperimentConfig c = parse_config("societies = 2\ngenerations = 3\ninitial_population = 6\n",
                                    {{"strategies", strategies}, {"output_dir", out.string()}});
  c.workers = 1;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("Strategy 0 only: record counts and bit-identical reruns") {
    const fs::path a = scratch("s0_a");
    const fs::path b = scratch("s0_b");
    const auto ra = run_and_write(tiny(a, "0"));
    run_and_write(tiny(b, "0"));
    REQUIRE(ra.runs.size() == 1);
    CHECK(ra.runs[0].societies.size() == 2);
    for (const auto& s : ra.runs[0].societies) CHECK(s.records.size() <= 3);
    CHECK(slurp(a / "S0" / "generations.csv") == slurp(b / "S0" / "generations.csv"));
    CHECK(slurp(a / "S0" / "consumption.csv") == slurp(b / "S0" / "consumption.csv"));
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
  }

  TEST_CASE("the baseline strategy always runs") {
    const fs::path out = scratch("baseline");
    const auto r = run_and_write(tiny(out, "Ab"));
    REQUIRE(r.runs.size() == 2);
    CHECK(r.runs[0].strategy == StrategyKind::S0);
    CHECK(r.runs[1].strategy == StrategyKind::SAb);
    CHECK(fs::exists(out / "S0" / "generations.csv"));
    CHECK(fs::exists(out / "SAb" / "generations.csv"));
    REQUIRE(r.report.row(StrategyKind::SAb) != nullptr);
    CHECK(*r.report.row(StrategyKind::S0)->mortality_index == 100.0);
  }

  TEST_CASE("files carry a metadata header and the documented schema") {
    const fs::path out = scratch("schema");
    const ExperimentConfig config = tiny(out, "A");
    run_and_write(config);
    const std::string log = slurp(out / "SA" / "generations.csv");
    CHECK(log.rfind("# artifact=generation log\n# version=fairsoc ", 0) == 0);
    CHECK(log.find("# seed=42\n") != std::string::npos);
    CHECK(log.find("# config_digest=" + config.digest() + "\n") != std::string::npos);
    CHECK(log.find("society_index,generation,population,births,deaths,total_labor,total_output,"
                   "mean_consumption,consumption_cv,consumption_skewness,min_utility,"
                   "mean_utility,mean_fertility,failed,capped\n") != std::string::npos);
    CHECK(log.find('\r') == std::string::npos);
    for (const char* f : {"report.csv", "effective.cfg"}) {
      const std::string text = slurp(out / f);
      CHECK(text.find("config_digest=" + config.digest()) != std::string::npos);
    }
    const auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
    CHECK(meta["seed"] == "42");
    CHECK(meta["config_digest"] == config.digest());
    CHECK(meta["effective_config"].get<std::string>() == config.to_text());
  }

  TEST_CASE("report has five metric rows and one column per strategy") {
    const fs::path out = scratch("shape");
    const auto r = run_and_write(tiny(out));
    CHECK(r.report.rows.size() == 4);
    std::istringstream lines(slurp(out / "report.csv"));
    std::string line;
    int data_rows = 0;
    while (std::getline(lines, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("metric,", 0) == 0) continue;
      ++data_rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(data_rows == 5);
    const std::string table = format_report_table(r.report);
    for (const char* label : {"Growth", "Recessions", "Mortality", "CV", "Pct. Failed", "Strategy Ab"}) {
      CHECK(table.find(label) != std::string::npos);
    }
  }

  TEST_CASE("report rebuilt from logs matches the in-memory report") {
    for (const char* format : {"csv", "json"}) {
      CAPTURE(format);
      const fs::path out = scratch(std::string("reread_") + format);
      ExperimentConfig config = tiny(out);
      config.format = std::string(format) == "csv" ? OutputFormat::Csv : OutputFormat::Json;
      const auto r = run_and_write(config);
      const ExperimentReport again = report_from_directory(out.string());
      REQUIRE(again.rows.size() == r.report.rows.size());
      for (std::size_t i = 0; i < again.rows.size(); ++i) {
        CHECK(again.rows[i].growth_pct == r.report.rows[i].growth_pct);
        CHECK(again.rows[i].recession_pct == r.report.rows[i].recession_pct);
        CHECK(again.rows[i].mortality_index == r.report.rows[i].mortality_index);
        CHECK(again.rows[i].cv_index == r.report.rows[i].cv_index);
        CHECK(again.rows[i].failed_pct == r.report.rows[i].failed_pct);
      }
      CHECK(again.metadata.at("config_digest") == config.digest());
    }
  }

  TEST_CASE("worker count does not change the logs") {
    const fs::path one = scratch("w1");
    const fs::path many = scratch("w4");
    ExperimentConfig c1 = tiny(one);
    ExperimentConfig c4 = tiny(many);
    c4.workers = 4;
    run_and_write(c1);
    run_and_write(c4);
    for (StrategyKind k : kAllStrategies) {
      const fs::path rel = fs::path(strategy_dir_name(k)) / "generations.csv";
      CHECK(slurp(one / rel) == slurp(many / rel));
    }
  }

  TEST_CASE("re-feeding the effective config reproduces the logs") {
    const fs::path first = scratch("refeed_a");
    run_and_write(tiny(first, "0,b"));
    const fs::path second = scratch("refeed_b");
    const ExperimentConfig again =
        load_config((first / "effective.cfg").string(), {{"output_dir", second.string()}});
    run_and_write(again);
    for (const char* rel : {"S0/generations.csv", "Sb/generations.csv", "Sb/consumption.csv"}) {
      CHECK(slurp(first / rel) == slurp(second / rel));
    }
  }

  TEST_CASE("consumption samples can be read back") {
    const fs::path out = scratch("samples");
    const auto r = run_and_write(tiny(out, "0"));
    const SocietyRun& run = r.runs[0].societies[1];
    const auto last = read_consumption_sample(out.string(), StrategyKind::S0, 1, -1);
    CHECK(last == run.consumptions.back());
    const auto first = read_consumption_sample(out.string(), StrategyKind::S0, 1, 0);
    CHECK(first == run.consumptions.front());
    CHECK_THROWS_AS(read_consumption_sample(out.string(), StrategyKind::SA, 0, -1), IoError);
  }

  TEST_CASE("unwritable output and missing input are I/O errors") {
    ExperimentConfig c = tiny("/proc/fairsoc_cannot_exist");
    CHECK_THROWS_AS(run_and_write(c), IoError);
    CHECK_THROWS_AS(report_from_directory("/nonexistent/fairsoc"), IoError);
  }
}
