#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tvef {

// Declarative run description. Every field has a documented default and the
// effective values are echoed into the run manifest. A JSON config file plus
// command-line overrides populate it; unknown JSON keys are rejected.
struct PipelineConfig {
  std::string input;                         // price file, delimiter-separated
  std::string date_column = "Date";
  std::string price_column = "Price";
  std::string start;                         // YYYY-MM or YYYY.MM, empty keeps the end
  std::string end;
  int max_q = 12;                            // order search bound for the static AR
  int q = 0;                                 // 0 selects the order by SBIC
  double lambda = 0.0;                       // 0 selects by prediction-error likelihood
  std::vector<double> lambda_grid;           // empty uses the default log grid
  double prior_weight = 1.0;
  int horizon = 60;                          // interim multiplier horizon H
  double ci_level = 0.95;
  double hp_lambda = 129600.0;               // Ravn-Uhlig monthly convention
  std::vector<int> spans = {7, 7};           // modified-Daniell smoother widths
  int boot_reps = 199;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string plot_format = "svg";           // {svg, none}
  bool tvar_hac = true;                      // robust bands on the coefficient paths
  int hac_bandwidth = -1;                    // -1 selects the plug-in rule
  int adf_max_lag = 0;                       // 0 selects the Schwert rule
  std::string adf_deterministic = "trend";   // {constant, trend}
  int spectral_max_order = 24;
  std::string hp_component = "trend";        // which filtered component feeds the spectra
  std::string resume_from;                   // first stage to execute; empty runs all
  int workers = 1;                           // within-stage parallelism (bootstrap)
};

// Ordered stage names: ingest, stationarity, arstatic, tvar, efficiency,
// spectral.
const std::vector<std::string>& stage_names();

PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& cfg);

// Range and enum checks; throws ConfigError. Called before any compute.
void validate_config(const PipelineConfig& cfg);

// Executes one stage, reading the artifacts of earlier stages from
// cfg.out_dir. Returns a JSON fragment with the files written and the key
// scalar results. Errors are tagged with the stage name.
std::string run_stage(const std::string& name, const PipelineConfig& cfg);

// Executes the stages in order (from cfg.resume_from when set, requiring the
// earlier artifacts to exist) and writes manifest.json to cfg.out_dir.
// Returns the manifest text. All wall-clock figures live under the single
// "timing" key so reproducibility comparisons can drop it.
std::string run_pipeline(const PipelineConfig& cfg);

// Renders a columnar artifact to a standalone SVG. Kind is one of
// line_with_band, surface_long_format, spectrum_panel; the file's header row
// must match the kind's schema.
void emit_plot(const std::string& artifact_path, const std::string& kind,
               const std::string& out_path);

// Fast internal consistency suite (solver vs sequential oracle, gradient
// checks, spectral identities, determinism). Appends one line per check to
// the report; returns the number of failures.
int selfcheck(std::string& report);

}  // namespace tvef
