// Command-line front end. Talks to the library exclusively through the C
// interface so the executable doubles as a smoke test of the shared-library
// boundary.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvef/tvef.h"

namespace {

struct Options {
  std::string config_path;
  std::string input;
  std::string date_column;
  std::string price_column;
  std::string start;
  std::string end;
  int max_q = 0;
  int q = 0;
  double lambda = 0.0;
  std::vector<double> lambda_grid;
  double prior_weight = 0.0;
  int horizon = 0;
  double ci = 0.0;
  double hp_lambda = 0.0;
  std::vector<int> spans;
  int boot_reps = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string plots;
  bool tvar_hac = true;
  int hac_bandwidth = 0;
  int adf_max_lag = 0;
  std::string adf_det;
  int spectral_max_order = 0;
  std::string hp_component;
  std::string resume_from;
  int workers = 0;
};

void add_common_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "JSON config file; flags override its values");
  sub->add_option("--input", o.input, "delimiter-separated price file");
  sub->add_option("--date-column", o.date_column, "date column name (default Date)");
  sub->add_option("--price-column", o.price_column, "price column name (default Price)");
  sub->add_option("--start", o.start, "first month, YYYY-MM");
  sub->add_option("--end", o.end, "last month, YYYY-MM");
  sub->add_option("--max-q", o.max_q, "order search bound for the constant-coefficient fit");
  sub->add_option("--q", o.q, "fixed AR order; 0 selects by the Schwarz criterion");
  sub->add_option("--lambda", o.lambda,
                  "state-noise to observation-noise variance ratio; 0 selects by likelihood");
  sub->add_option("--lambda-grid", o.lambda_grid, "comma-separated candidate ratios")
      ->delimiter(',');
  sub->add_option("--prior-weight", o.prior_weight, "precision of the initial-period prior");
  sub->add_option("--horizon", o.horizon, "interim multiplier horizon in months");
  sub->add_option("--ci", o.ci, "confidence level for the multiplier bands");
  sub->add_option("--hp-lambda", o.hp_lambda, "trend filter smoothing parameter");
  sub->add_option("--spans", o.spans, "comma-separated odd smoother widths")->delimiter(',');
  sub->add_option("--boot-reps", o.boot_reps, "bootstrap replications (minimum 99)");
  sub->add_option("--seed", o.seed, "bootstrap seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--plots", o.plots, "plot format: svg or none");
  sub->add_flag("--tvar-hac,!--no-tvar-hac", o.tvar_hac,
                "autocorrelation-robust bands on the coefficient paths (default on)");
  sub->add_option("--hac-bandwidth", o.hac_bandwidth,
                  "Newey-West truncation lag; -1 selects the plug-in rule");
  sub->add_option("--adf-max-lag", o.adf_max_lag,
                  "unit-root augmentation bound; 0 selects the Schwert rule");
  sub->add_option("--adf-det", o.adf_det, "unit-root deterministics: constant or trend");
  sub->add_option("--spectral-max-order", o.spectral_max_order,
                  "autoregressive spectrum order bound");
  sub->add_option("--hp-component", o.hp_component,
                  "filtered component fed to the spectra: trend or cycle");
  sub->add_option("--resume-from", o.resume_from,
                  "first stage to execute; earlier artifacts must already exist");
  sub->add_option("--workers", o.workers, "bootstrap worker threads");
}

// Config file first, then only the flags the user actually passed.
int build_config(const CLI::App* sub, const Options& o, std::string& out_json) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file " << o.config_path << "\n";
      return TVEF_ERR_CONFIG;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    j = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      std::cerr << "error: config file " << o.config_path << " is not a JSON object\n";
      return TVEF_ERR_CONFIG;
    }
  }
  auto passed = [&](const char* flag) { return sub->count(flag) > 0; };
  if (passed("--input")) j["input"] = o.input;
  if (passed("--date-column")) j["date_column"] = o.date_column;
  if (passed("--price-column")) j["price_column"] = o.price_column;
  if (passed("--start")) j["start"] = o.start;
  if (passed("--end")) j["end"] = o.end;
  if (passed("--max-q")) j["max_q"] = o.max_q;
  if (passed("--q")) j["q"] = o.q;
  if (passed("--lambda")) j["lambda"] = o.lambda;
  if (passed("--lambda-grid")) j["lambda_grid"] = o.lambda_grid;
  if (passed("--prior-weight")) j["prior_weight"] = o.prior_weight;
  if (passed("--horizon")) j["horizon"] = o.horizon;
  if (passed("--ci")) j["ci_level"] = o.ci;
  if (passed("--hp-lambda")) j["hp_lambda"] = o.hp_lambda;
  if (passed("--spans")) j["spans"] = o.spans;
  if (passed("--boot-reps")) j["boot_reps"] = o.boot_reps;
  if (passed("--seed")) j["seed"] = o.seed;
  if (passed("--out")) j["out_dir"] = o.out;
  if (passed("--plots")) j["plot_format"] = o.plots;
  if (passed("--tvar-hac")) j["tvar_hac"] = o.tvar_hac;
  if (passed("--hac-bandwidth")) j["hac_bandwidth"] = o.hac_bandwidth;
  if (passed("--adf-max-lag")) j["adf_max_lag"] = o.adf_max_lag;
  if (passed("--adf-det")) j["adf_deterministic"] = o.adf_det;
  if (passed("--spectral-max-order")) j["spectral_max_order"] = o.spectral_max_order;
  if (passed("--hp-component")) j["hp_component"] = o.hp_component;
  if (passed("--resume-from")) j["resume_from"] = o.resume_from;
  if (passed("--workers")) j["workers"] = o.workers;
  out_json = j.dump();
  return TVEF_OK;
}

int report_error(int rc) {
  std::cerr << "error: " << tvef_last_error() << "\n";
  return rc;
}

int cmd_run(const CLI::App* sub, const Options& o) {
  std::string config;
  if (int rc = build_config(sub, o, config); rc != TVEF_OK) return rc;
  char* manifest = nullptr;
  int rc = tvef_pipeline_run(config.c_str(), &manifest);
  if (rc != TVEF_OK) return report_error(rc);
  nlohmann::json m = nlohmann::json::parse(manifest);
  tvef_string_free(manifest);
  std::cout << "run complete: " << m["stages"].size() << " stages\n";
  for (const auto& [key, value] : m["results"].items())
    std::cout << "  " << key << " = " << value.dump() << "\n";
  std::cout << "manifest: " << m["config"]["out_dir"].get<std::string>() << "/manifest.json\n";
  return 0;
}

int cmd_stage(const CLI::App* sub, const std::string& name, const Options& o) {
  std::string config;
  if (int rc = build_config(sub, o, config); rc != TVEF_OK) return rc;
  char* result = nullptr;
  int rc = tvef_pipeline_stage(name.c_str(), config.c_str(), &result);
  if (rc != TVEF_OK) return report_error(rc);
  std::cout << result << "\n";
  tvef_string_free(result);
  return 0;
}

int cmd_selfcheck() {
  char* report = nullptr;
  int rc = tvef_selfcheck(&report);
  if (report != nullptr) {
    std::cout << report;
    tvef_string_free(report);
  }
  if (rc != TVEF_OK) return report_error(rc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monthly return dynamics: unit-root screen, constant and time-varying "
               "autoregressions, efficiency multipliers, and spectral summaries"};
  app.set_version_flag("--version", []() { return std::string(tvef_version()); });
  app.require_subcommand(1);

  Options run_opts;
  CLI::App* run = app.add_subcommand("run", "execute every pipeline stage in order");
  add_common_options(run, run_opts);

  Options stage_opts;
  std::string stage_name;
  CLI::App* stage = app.add_subcommand("stage", "execute one stage against existing artifacts");
  stage->add_option("name", stage_name, "stage to run")->required();
  add_common_options(stage, stage_opts);

  CLI::App* selfcheck = app.add_subcommand("selfcheck", "run the internal consistency suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : TVEF_ERR_CONFIG;
  }

  if (run->parsed()) return cmd_run(run, run_opts);
  if (stage->parsed()) return cmd_stage(stage, stage_name, stage_opts);
  if (selfcheck->parsed()) return cmd_selfcheck();
  return TVEF_ERR_CONFIG;
}
