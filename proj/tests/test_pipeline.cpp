#include <unistd.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/series.hpp"
#include "doctest.h"
#include "json.hpp"
#include "testutil.hpp"

using namespace tvef;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Unique scratch directory, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("tvef_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path.string() : (path / name).string();
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Price file whose log returns follow a mild AR(1); n + 1 prices.
std::string write_price_csv(const TempDir& dir, int n, unsigned seed) {
  ReturnSeries r = testutil::simulate_ar(Eigen::VectorXd::Constant(1, 0.3), 0.002, n, seed, 0.03);
  fs::path file = dir.path / "prices.csv";
  std::ofstream out(file);
  out << "Date,Price\n";
  Month m{1950, 1};
  double price = 100.0;
  out << m.str() << "," << price << "\n";
  for (double v : r.values) {
    m = m.next();
    price *= std::exp(v);
    out << m.str() << "," << price << "\n";
  }
  return file.string();
}

PipelineConfig smoke_config(const TempDir& dir, const std::string& input) {
  PipelineConfig cfg;
  cfg.input = input;
  cfg.out_dir = dir.str("out");
  cfg.boot_reps = 99;
  cfg.seed = 7;
  cfg.max_q = 4;
  return cfg;
}

json stripped_manifest(const std::string& text) {
  json j = json::parse(text);
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("stage names are fixed and ordered") {
  const std::vector<std::string>& names = stage_names();
  REQUIRE(names.size() == 6);
  CHECK(names[0] == "ingest");
  CHECK(names[1] == "stationarity");
  CHECK(names[2] == "arstatic");
  CHECK(names[3] == "tvar");
  CHECK(names[4] == "efficiency");
  CHECK(names[5] == "spectral");
}

TEST_CASE("config json round-trips and rejects unknown keys and bad types") {
  PipelineConfig cfg;
  cfg.input = "prices.csv";
  cfg.lambda_grid = {0.001, 0.01};
  cfg.spans = {5, 9};
  cfg.seed = 123456789012345ULL;
  const std::string text = config_to_json(cfg);
  PipelineConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);

  CHECK_THROWS_AS(config_from_json("{\"no_such_key\": 1}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"max_q\": \"three\"}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);

  PipelineConfig partial = config_from_json("{\"input\": \"x.csv\", \"spans\": [5]}");
  CHECK(partial.input == "x.csv");
  REQUIRE(partial.spans.size() == 1);
  CHECK(partial.spans[0] == 5);
  CHECK(partial.max_q == 12);  // untouched defaults survive
}

TEST_CASE("config validation rejects out-of-range values") {
  TempDir dir("validate");
  PipelineConfig cfg = smoke_config(dir, "prices.csv");

  PipelineConfig bad = cfg;
  bad.boot_reps = 50;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.spans = {4};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.ci_level = 1.5;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.plot_format = "png";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.hp_component = "seasonal";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.workers = 0;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.resume_from = "bogus";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = cfg;
  bad.lambda_grid = {0.1, 0.1};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("an inverted sample window fails before any compute") {
  TempDir dir("window");
  PipelineConfig cfg = smoke_config(dir, write_price_csv(dir, 300, 7));
  cfg.start = "2000-01";
  cfg.end = "1999-01";
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
  CHECK_FALSE(fs::exists(cfg.out_dir));
}

TEST_CASE("the full pipeline runs six stages and is byte-reproducible") {
  TempDir dir("smoke");
  const std::string input = write_price_csv(dir, 300, 7);
  PipelineConfig cfg = smoke_config(dir, input);

  const std::string manifest_text = run_pipeline(cfg);
  json manifest = json::parse(manifest_text);

  REQUIRE(manifest["stages"].size() == 6);
  for (const json& st : manifest["stages"]) {
    CHECK(st["status"] == "complete");
  }
  CHECK(manifest["library_version"].is_string());
  CHECK(manifest["config"]["input"] == input);
  CHECK(manifest["timing"].contains("total_seconds"));
  CHECK(manifest["timing"].contains("tvar_seconds"));

  const json& results = manifest["results"];
  for (const char* key :
       {"n_returns", "adf_gls_statistic", "ar_order", "lambda", "window_width",
        "bootstrap_p_value", "dominant_period_raw_months"}) {
    CHECK(results.contains(key));
  }
  CHECK(results["n_returns"] == 300);

  const char* files[] = {"returns.csv",          "stationarity.json",
                         "ar_static.json",       "tvar_fit.json",
                         "tvar_fit.csv",         "window_weights.csv",
                         "multipliers.csv",      "interim_surface.csv",
                         "efficiency.json",      "hp.csv",
                         "spectrum_raw_periodogram.csv",
                         "spectrum_raw_smoothed.csv",
                         "spectrum_raw_ar.csv",  "spectrum_filtered_periodogram.csv",
                         "spectrum_filtered_smoothed.csv",
                         "spectrum_filtered_ar.csv",
                         "spectral.json",        "manifest.json",
                         "multipliers.svg",      "interim_surface.svg",
                         "spectrum_raw_smoothed.svg"};
  for (const char* f : files) {
    CHECK_MESSAGE(fs::exists(fs::path(cfg.out_dir) / f), f);
  }

  // Second run into a fresh directory: identical bytes except wall-clock.
  TempDir dir2("smoke2");
  PipelineConfig cfg2 = cfg;
  cfg2.out_dir = dir2.str("out");
  const std::string manifest2 = run_pipeline(cfg2);

  json m1 = stripped_manifest(manifest_text);
  json m2 = stripped_manifest(manifest2);
  m1["config"].erase("out_dir");
  m2["config"].erase("out_dir");
  CHECK(m1.dump() == m2.dump());

  for (const char* f : files) {
    if (std::string(f) == "manifest.json") continue;
    CHECK_MESSAGE(read_file(fs::path(cfg.out_dir) / f) == read_file(fs::path(cfg2.out_dir) / f),
                  f);
  }
}

TEST_CASE("resuming re-executes only the requested tail of the pipeline") {
  TempDir dir("resume");
  PipelineConfig cfg = smoke_config(dir, write_price_csv(dir, 260, 11));
  run_pipeline(cfg);

  const std::string spectral_before = read_file(fs::path(cfg.out_dir) / "spectral.json");
  const std::string tvar_before = read_file(fs::path(cfg.out_dir) / "tvar_fit.json");

  PipelineConfig resume = cfg;
  resume.resume_from = "spectral";
  const std::string manifest_text = run_pipeline(resume);
  json manifest = json::parse(manifest_text);
  REQUIRE(manifest["stages"].size() == 6);
  for (std::size_t i = 0; i < 5; ++i) CHECK(manifest["stages"][i]["status"] == "resumed");
  CHECK(manifest["stages"][5]["status"] == "complete");

  CHECK(read_file(fs::path(cfg.out_dir) / "spectral.json") == spectral_before);
  CHECK(read_file(fs::path(cfg.out_dir) / "tvar_fit.json") == tvar_before);
}

TEST_CASE("a single stage runs against existing artifacts and writes its own manifest") {
  TempDir dir("stage");
  PipelineConfig cfg = smoke_config(dir, write_price_csv(dir, 240, 13));
  run_stage("ingest", cfg);
  const std::string text = run_stage("stationarity", cfg);
  json st = json::parse(text);
  CHECK(st["stage"] == "stationarity");
  CHECK(st["status"] == "complete");
  CHECK(st["scalars"].contains("adf_gls_statistic"));
  CHECK(read_file(fs::path(cfg.out_dir) / "manifest.stationarity.json") == text);
}

TEST_CASE("a stage without its inputs names the missing producer") {
  TempDir dir("missing");
  PipelineConfig cfg = smoke_config(dir, "unused.csv");
  try {
    run_stage("arstatic", cfg);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("ingest") != std::string::npos);
  }
  CHECK_THROWS_AS(run_stage("warp", cfg), ConfigError);
}

TEST_CASE("resume without prior artifacts fails with a data error") {
  TempDir dir("coldresume");
  PipelineConfig cfg = smoke_config(dir, write_price_csv(dir, 220, 17));
  cfg.resume_from = "efficiency";
  CHECK_THROWS_AS(run_pipeline(cfg), DataError);
}

TEST_CASE("plot rendering validates schemas and kinds") {
  TempDir dir("plots");
  const fs::path band = dir.path / "band.csv";
  {
    std::ofstream out(band);
    out << "date,value,lower,upper\n";
    for (int i = 0; i < 12; ++i) {
      out << "2000-" << (i < 9 ? "0" : "") << i + 1 << "," << 1.0 + 0.1 * i << ","
          << 0.9 + 0.1 * i << "," << 1.1 + 0.1 * i << "\n";
    }
  }
  const fs::path svg = dir.path / "band.svg";
  emit_plot(band.string(), "line_with_band", svg.string());
  const std::string rendered = read_file(svg);
  CHECK(rendered.rfind("<svg", 0) == 0);
  CHECK(rendered.find("</svg>") != std::string::npos);

  CHECK_THROWS_AS(emit_plot(band.string(), "spectrum_panel", svg.string()), ConfigError);
  CHECK_THROWS_AS(emit_plot(band.string(), "mystery", svg.string()), ConfigError);

  const fs::path narrow = dir.path / "narrow.csv";
  {
    std::ofstream out(narrow);
    out << "date,value\n2000-01,1\n2000-02,2\n";
  }
  CHECK_THROWS_AS(emit_plot(narrow.string(), "line_with_band", svg.string()), ConfigError);
  CHECK_THROWS_AS(emit_plot(dir.str("nothere.csv"), "line_with_band", svg.string()), DataError);
}
