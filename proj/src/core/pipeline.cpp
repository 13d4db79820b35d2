#include "core/pipeline.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "core/arstatic.hpp"
#include "core/efficiency.hpp"
#include "core/errors.hpp"
#include "core/kalman.hpp"
#include "core/mathutil.hpp"
#include "core/month.hpp"
#include "core/series.hpp"
#include "core/spectral.hpp"
#include "core/svgplot.hpp"
#include "core/textio.hpp"
#include "core/tvar.hpp"
#include "core/unitroot.hpp"
#include "core/version.hpp"

namespace tvef {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// The analysis highlights a twelve-year effective estimation window; the run
// manifest records the lambda that reproduces it exactly.
constexpr std::size_t kReferenceWindowMonths = 144;

[[noreturn]] void bad_type(const std::string& key, const char* want) {
  throw ConfigError("config key '" + key + "' must be " + want);
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad_type(key, "a string");
  return v.get<std::string>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) bad_type(key, "an integer");
  return v.get<int>();
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) bad_type(key, "a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad_type(key, "a boolean");
  return v.get<bool>();
}

std::uint64_t as_seed(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  bad_type(key, "a non-negative integer");
}

std::vector<double> as_number_array(const json& v, const std::string& key) {
  if (!v.is_array()) bad_type(key, "an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) bad_type(key, "an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> as_int_array(const json& v, const std::string& key) {
  if (!v.is_array()) bad_type(key, "an array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number_integer() && !e.is_number_unsigned()) bad_type(key, "an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

json config_json(const PipelineConfig& cfg) {
  json j;
  j["input"] = cfg.input;
  j["date_column"] = cfg.date_column;
  j["price_column"] = cfg.price_column;
  j["start"] = cfg.start;
  j["end"] = cfg.end;
  j["max_q"] = cfg.max_q;
  j["q"] = cfg.q;
  j["lambda"] = cfg.lambda;
  j["lambda_grid"] = cfg.lambda_grid;
  j["prior_weight"] = cfg.prior_weight;
  j["horizon"] = cfg.horizon;
  j["ci_level"] = cfg.ci_level;
  j["hp_lambda"] = cfg.hp_lambda;
  j["spans"] = cfg.spans;
  j["boot_reps"] = cfg.boot_reps;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["plot_format"] = cfg.plot_format;
  j["tvar_hac"] = cfg.tvar_hac;
  j["hac_bandwidth"] = cfg.hac_bandwidth;
  j["adf_max_lag"] = cfg.adf_max_lag;
  j["adf_deterministic"] = cfg.adf_deterministic;
  j["spectral_max_order"] = cfg.spectral_max_order;
  j["hp_component"] = cfg.hp_component;
  j["resume_from"] = cfg.resume_from;
  j["workers"] = cfg.workers;
  return j;
}

std::optional<Month> parse_month_opt(const std::string& text, const char* which) {
  if (text.empty()) return std::nullopt;
  try {
    return Month::parse(text);
  } catch (const std::exception&) {
    throw ConfigError(std::string("invalid ") + which + " month '" + text + "'");
  }
}

fs::path out_path(const PipelineConfig& cfg, const std::string& name) {
  return fs::path(cfg.out_dir) / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
  out.flush();
  if (!out) throw DataError("failed while writing " + p.string());
}

std::string require_artifact(const PipelineConfig& cfg, const std::string& name,
                             const std::string& producer) {
  fs::path p = out_path(cfg, name);
  if (!fs::exists(p)) {
    throw DataError(name + " not found in " + cfg.out_dir + "; run the " + producer +
                    " stage first");
  }
  return p.string();
}

ReturnSeries load_returns_artifact(const PipelineConfig& cfg) {
  std::string path = require_artifact(cfg, "returns.csv", "ingest");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_returns_csv(in);
}

json load_json_artifact(const PipelineConfig& cfg, const std::string& name,
                        const std::string& producer) {
  std::string path = require_artifact(cfg, name, producer);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw DataError(name + " is not valid JSON: " + e.what());
  }
}

struct StageOutput {
  std::vector<std::string> files;
  json scalars = json::object();
};

// ---- ingest ----------------------------------------------------------------

StageOutput stage_ingest(const PipelineConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("no input file configured");
  PriceSeries prices = load_prices_file(cfg.input, cfg.date_column, cfg.price_column);
  prices = slice(prices, parse_month_opt(cfg.start, "start"), parse_month_opt(cfg.end, "end"));
  ReturnSeries r = log_returns(prices);
  DescriptiveStats d = describe(r);

  std::ostringstream os;
  write_returns_csv(r, os);
  write_file(out_path(cfg, "returns.csv"), os.str());

  StageOutput out;
  out.files = {"returns.csv"};
  out.scalars = {{"n_prices", prices.size()},
                 {"n_returns", d.n},
                 {"first_month", r.dates.front().str()},
                 {"last_month", r.dates.back().str()},
                 {"mean", d.mean},
                 {"sd", d.sd},
                 {"min", d.min},
                 {"max", d.max}};
  return out;
}

// ---- stationarity ----------------------------------------------------------

StageOutput stage_stationarity(const PipelineConfig& cfg) {
  ReturnSeries r = load_returns_artifact(cfg);
  Deterministic det = cfg.adf_deterministic == "trend" ? Deterministic::ConstantAndTrend
                                                       : Deterministic::Constant;
  AdfGlsResult a = adf_gls_test(r.values, cfg.adf_max_lag, LagCriterion::MBIC, det);
  GlsDetrendResult g = gls_detrend(r.values, det);

  json doc = {{"n", r.size()},
              {"deterministic", cfg.adf_deterministic},
              {"statistic", a.statistic},
              {"lag", a.lag},
              {"phi_hat", a.phi_hat},
              {"detrended_ar1", g.phi_hat},
              {"critical_values",
               {{"1pct", adf_gls_critical_value(det, 0.01)},
                {"5pct", adf_gls_critical_value(det, 0.05)},
                {"10pct", adf_gls_critical_value(det, 0.10)}}},
              {"reject_unit_root_1pct", a.statistic < a.critical_1pct}};
  write_file(out_path(cfg, "stationarity.json"), doc.dump(2) + "\n");

  StageOutput out;
  out.files = {"stationarity.json"};
  out.scalars = {{"adf_gls_statistic", a.statistic},
                 {"adf_gls_lag", a.lag},
                 {"adf_phi_hat", a.phi_hat},
                 {"detrended_ar1", g.phi_hat}};
  return out;
}

// ---- arstatic --------------------------------------------------------------

StageOutput stage_arstatic(const PipelineConfig& cfg) {
  ReturnSeries r = load_returns_artifact(cfg);
  int order = cfg.q > 0 ? cfg.q : select_order_sbic(r, cfg.max_q);
  ArFit f = fit_ar(r, order, cfg.hac_bandwidth);
  HansenLcResult lc = hansen_lc(f, r);
  LjungBoxResult lb12 = ljung_box(f.residuals, 12);
  LjungBoxResult lb24 = ljung_box(f.residuals, 24);

  json alpha = json::array();
  for (int i = 1; i <= order; ++i) alpha.push_back(f.coefficients(i));
  json se = json::array();
  for (int i = 0; i <= order; ++i) se.push_back(std::sqrt(std::max(0.0, f.covariance(i, i))));
  json cov = json::array();
  for (int i = 0; i <= order; ++i) {
    json row = json::array();
    for (int k = 0; k <= order; ++k) row.push_back(f.covariance(i, k));
    cov.push_back(row);
  }

  json doc = {{"order", order},
              {"order_fixed", cfg.q > 0},
              {"max_q", cfg.max_q},
              {"intercept", f.coefficients(0)},
              {"alpha", alpha},
              {"standard_errors", se},
              {"covariance", cov},
              {"adj_r2", f.adj_r2},
              {"sigma2", f.sigma2},
              {"n_used", f.n_used},
              {"hac_bandwidth", f.hac_bandwidth},
              {"ljung_box",
               {{"lag_12", {{"statistic", lb12.statistic}, {"p_value", lb12.p_value}}},
                {"lag_24", {{"statistic", lb24.statistic}, {"p_value", lb24.p_value}}}}},
              {"hansen_lc",
               {{"statistic", lc.statistic},
                {"n_parameters", lc.n_parameters},
                {"critical_1pct", lc.critical_1pct},
                {"stable_1pct", lc.statistic < lc.critical_1pct}}}};
  write_file(out_path(cfg, "ar_static.json"), doc.dump(2) + "\n");

  StageOutput out;
  out.files = {"ar_static.json"};
  out.scalars = {{"ar_order", order},
                 {"ar_intercept", f.coefficients(0)},
                 {"ar_alpha", alpha},
                 {"ar_adj_r2", f.adj_r2},
                 {"hansen_lc", lc.statistic},
                 {"ljung_box_12_p", lb12.p_value}};
  return out;
}

// ---- tvar ------------------------------------------------------------------

json tvar_fit_to_json(const TvarFit& fit, const json& window, const json& selection) {
  json paths = json::array();
  for (int ell = 0; ell < fit.q; ++ell) {
    json row = json::array();
    for (int t = 0; t < fit.T; ++t) row.push_back(fit.paths(ell, t));
    paths.push_back(row);
  }
  json covs = json::array();
  for (int t = 0; t < fit.T; ++t) {
    const Eigen::MatrixXd& c = fit.covariances[static_cast<std::size_t>(t)];
    json tri = json::array();
    for (int i = 0; i < fit.q; ++i) {
      for (int k = i; k < fit.q; ++k) tri.push_back(c(i, k));
    }
    covs.push_back(tri);
  }
  json dates = json::array();
  for (const Month& m : fit.dates) dates.push_back(m.str());
  json residuals = json::array();
  for (int t = 0; t < fit.T; ++t) residuals.push_back(fit.residuals(t));
  json prior = json::array();
  for (int i = 0; i < fit.q; ++i) prior.push_back(fit.prior(i));

  return {{"q", fit.q},
          {"T", fit.T},
          {"lambda", fit.lambda},
          {"prior", prior},
          {"prior_weight", fit.prior_weight},
          {"intercept", fit.intercept},
          {"intercept_se", fit.intercept_se},
          {"sigma_u2", fit.sigma_u2},
          {"edf", fit.edf},
          {"hac_applied", fit.hac_applied},
          {"hac_bandwidth", fit.hac_bandwidth},
          {"dates", dates},
          {"paths", paths},
          {"covariances_upper", covs},
          {"residuals", residuals},
          {"window", window},
          {"lambda_selection", selection}};
}

TvarFit tvar_fit_from_json(const json& doc) {
  TvarFit fit;
  fit.q = doc.at("q").get<int>();
  fit.T = doc.at("T").get<int>();
  if (fit.q < 1 || fit.T < 2) throw DataError("tvar fit artifact has impossible dimensions");
  fit.lambda = doc.at("lambda").get<double>();
  fit.prior_weight = doc.at("prior_weight").get<double>();
  fit.intercept = doc.at("intercept").get<double>();
  fit.intercept_se = doc.at("intercept_se").get<double>();
  fit.sigma_u2 = doc.at("sigma_u2").get<double>();
  fit.edf = doc.at("edf").get<double>();
  fit.hac_applied = doc.at("hac_applied").get<bool>();
  fit.hac_bandwidth = doc.at("hac_bandwidth").get<int>();

  const json& prior = doc.at("prior");
  if (prior.size() != static_cast<std::size_t>(fit.q)) {
    throw DataError("tvar fit artifact prior length disagrees with q");
  }
  fit.prior.resize(fit.q);
  for (int i = 0; i < fit.q; ++i) fit.prior(i) = prior.at(static_cast<std::size_t>(i)).get<double>();

  const json& dates = doc.at("dates");
  const json& paths = doc.at("paths");
  const json& covs = doc.at("covariances_upper");
  const json& resid = doc.at("residuals");
  std::size_t T = static_cast<std::size_t>(fit.T);
  if (dates.size() != T || covs.size() != T || resid.size() != T ||
      paths.size() != static_cast<std::size_t>(fit.q)) {
    throw DataError("tvar fit artifact arrays disagree with the stated dimensions");
  }

  fit.dates.reserve(T);
  for (const auto& d : dates) fit.dates.push_back(Month::parse(d.get<std::string>()));
  fit.paths.resize(fit.q, fit.T);
  for (int ell = 0; ell < fit.q; ++ell) {
    const json& row = paths.at(static_cast<std::size_t>(ell));
    if (row.size() != T) throw DataError("tvar fit artifact path row has the wrong length");
    for (int t = 0; t < fit.T; ++t) fit.paths(ell, t) = row.at(static_cast<std::size_t>(t)).get<double>();
  }
  fit.residuals.resize(fit.T);
  for (int t = 0; t < fit.T; ++t) fit.residuals(t) = resid.at(static_cast<std::size_t>(t)).get<double>();

  std::size_t tri_len = static_cast<std::size_t>(fit.q) * (fit.q + 1) / 2;
  fit.covariances.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const json& tri = covs.at(t);
    if (tri.size() != tri_len) throw DataError("tvar fit artifact covariance block has the wrong length");
    Eigen::MatrixXd c(fit.q, fit.q);
    std::size_t pos = 0;
    for (int i = 0; i < fit.q; ++i) {
      for (int k = i; k < fit.q; ++k) {
        double v = tri.at(pos++).get<double>();
        c(i, k) = v;
        c(k, i) = v;
      }
    }
    fit.covariances[t] = std::move(c);
  }
  return fit;
}

std::size_t window_width_at(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                            double prior_weight, double lambda) {
  StackedSystem sys = build_stacked(r, q, prior, lambda, prior_weight);
  TvarFit fit = solve_stacked(sys);
  std::size_t tau = static_cast<std::size_t>(fit.T / 2);
  return smoother_weights(sys, fit, 1, tau).width;
}

StageOutput stage_tvar(const PipelineConfig& cfg) {
  ReturnSeries r = load_returns_artifact(cfg);
  int q = cfg.q;
  if (q <= 0) {
    json prior_doc = load_json_artifact(cfg, "ar_static.json", "arstatic");
    try {
      q = prior_doc.at("order").get<int>();
    } catch (const json::exception&) {
      throw DataError("ar_static.json lacks the selected order");
    }
  }

  // The prior path level is the whole-sample least-squares fit, so shrinking
  // lambda collapses the paths onto the constant-coefficient estimate.
  ArFit ls = fit_ar(r, q, 0);
  Eigen::VectorXd prior = ls.coefficients.segment(1, q);

  std::vector<double> grid = cfg.lambda_grid.empty() ? default_lambda_grid() : cfg.lambda_grid;
  bool fixed = cfg.lambda > 0.0;
  LambdaSelection sel;
  double lambda = cfg.lambda;
  if (!fixed) {
    sel = select_lambda_scan(r, q, grid, prior, cfg.prior_weight);
    lambda = sel.selected;
  }

  StackedSystem sys = build_stacked(r, q, prior, lambda, cfg.prior_weight);
  TvarFit fit = solve_stacked(sys);
  if (cfg.tvar_hac) apply_hac_covariance(fit, sys, cfg.hac_bandwidth);

  std::size_t tau = static_cast<std::size_t>(fit.T / 2);
  SmootherWeights w = smoother_weights(sys, fit, 1, tau);

  // Width of the effective window across the grid, then a bisection in log
  // lambda for the value that reproduces the reference window exactly.
  json width_scan = json::array();
  std::vector<std::pair<double, std::size_t>> probes;
  for (double g : grid) {
    std::size_t wg = window_width_at(r, q, prior, cfg.prior_weight, g);
    probes.emplace_back(g, wg);
    width_scan.push_back({{"lambda", g}, {"width", wg}});
  }
  std::optional<double> lambda_ref;
  std::size_t closest_width = probes.empty() ? w.width : probes.front().second;
  for (const auto& [gl, gw] : probes) {
    if (gw == kReferenceWindowMonths) {
      lambda_ref = gl;
      break;
    }
    auto dist = [&](std::size_t ww) {
      return ww > kReferenceWindowMonths ? ww - kReferenceWindowMonths
                                         : kReferenceWindowMonths - ww;
    };
    if (dist(gw) < dist(closest_width)) closest_width = gw;
  }
  if (!lambda_ref) {
    for (std::size_t i = 0; i + 1 < probes.size() && !lambda_ref; ++i) {
      // Width shrinks as lambda grows; look for a straddling pair.
      if (probes[i].second > kReferenceWindowMonths &&
          probes[i + 1].second < kReferenceWindowMonths) {
        double lo = std::log(probes[i].first);
        double hi = std::log(probes[i + 1].first);
        for (int it = 0; it < 64 && !lambda_ref; ++it) {
          double mid = std::exp(0.5 * (lo + hi));
          std::size_t wm = window_width_at(r, q, prior, cfg.prior_weight, mid);
          if (wm == kReferenceWindowMonths) {
            lambda_ref = mid;
          } else if (wm > kReferenceWindowMonths) {
            lo = std::log(mid);
          } else {
            hi = std::log(mid);
          }
          auto d = [&](std::size_t ww) {
            return ww > kReferenceWindowMonths ? ww - kReferenceWindowMonths
                                               : kReferenceWindowMonths - ww;
          };
          if (d(wm) < d(closest_width)) closest_width = wm;
        }
      }
    }
  }

  json window = {{"coefficient", 1},
                 {"tau", tau},
                 {"s1", w.s1},
                 {"s2", w.s2},
                 {"width", w.width},
                 {"reference_width", kReferenceWindowMonths},
                 {"lambda_for_reference_width",
                  lambda_ref ? json(*lambda_ref) : json(nullptr)},
                 {"closest_width_seen", closest_width},
                 {"width_scan", width_scan}};

  json selection = {{"fixed", fixed},
                    {"grid", grid},
                    {"loglik", fixed ? json(nullptr) : json(sel.loglik)},
                    {"selected", lambda}};

  write_file(out_path(cfg, "tvar_fit.json"),
             tvar_fit_to_json(fit, window, selection).dump(2) + "\n");

  std::ostringstream cs;
  cs << "period,date";
  for (int ell = 1; ell <= q; ++ell) cs << ",alpha_" << ell;
  for (int ell = 1; ell <= q; ++ell) cs << ",se_" << ell;
  cs << "\n";
  for (int t = 0; t < fit.T; ++t) {
    cs << (t + 1) << "," << fit.dates[static_cast<std::size_t>(t)].str();
    for (int ell = 0; ell < q; ++ell) cs << "," << format_double(fit.paths(ell, t));
    const Eigen::MatrixXd& c = fit.covariances[static_cast<std::size_t>(t)];
    for (int ell = 0; ell < q; ++ell) {
      cs << "," << format_double(std::sqrt(std::max(0.0, c(ell, ell))));
    }
    cs << "\n";
  }
  write_file(out_path(cfg, "tvar_fit.csv"), cs.str());

  std::ostringstream ws;
  ws << "period,date,weight,cumulative_abs\n";
  for (std::size_t s = 0; s < w.weights.size(); ++s) {
    ws << (s + 1) << "," << fit.dates[s].str() << "," << format_double(w.weights[s]) << ","
       << format_double(w.cumulative[s]) << "\n";
  }
  write_file(out_path(cfg, "window_weights.csv"), ws.str());

  StageOutput out;
  out.files = {"tvar_fit.csv", "tvar_fit.json", "window_weights.csv"};
  out.scalars = {{"tvar_q", q},
                 {"lambda", lambda},
                 {"lambda_selected_by_likelihood", !fixed},
                 {"window_width", w.width},
                 {"lambda_for_reference_width",
                  lambda_ref ? json(*lambda_ref) : json(nullptr)},
                 {"edf", fit.edf},
                 {"sigma_u2", fit.sigma_u2}};
  return out;
}

// ---- efficiency ------------------------------------------------------------

StageOutput stage_efficiency(const PipelineConfig& cfg) {
  json fit_doc = load_json_artifact(cfg, "tvar_fit.json", "tvar");
  TvarFit fit;
  try {
    fit = tvar_fit_from_json(fit_doc);
  } catch (const json::exception& e) {
    throw DataError(std::string("tvar_fit.json is missing fields: ") + e.what());
  }
  ReturnSeries r = load_returns_artifact(cfg);

  MultiplierPath mp = multiplier_path(fit, cfg.horizon, cfg.ci_level);
  BootstrapJointTest bt = bootstrap_joint_test(fit, r, cfg.boot_reps, cfg.seed, cfg.workers);

  double z = normal_quantile(0.5 + cfg.ci_level / 2.0);
  std::ostringstream ms;
  ms << "date,longrun,longrun_se,lower,upper,stationary\n";
  std::size_t n_stationary = 0;
  double lr_min = 0.0, lr_max = 0.0, lr_sum = 0.0;
  for (int t = 0; t < fit.T; ++t) {
    double v = mp.longrun(t);
    double se = mp.longrun_se(t);
    if (mp.stationary[static_cast<std::size_t>(t)]) {
      if (n_stationary == 0) {
        lr_min = lr_max = v;
      } else {
        lr_min = std::min(lr_min, v);
        lr_max = std::max(lr_max, v);
      }
      lr_sum += v;
      ++n_stationary;
    }
    ms << mp.dates[static_cast<std::size_t>(t)].str() << "," << format_double(v) << ","
       << format_double(se) << "," << format_double(v - z * se) << ","
       << format_double(v + z * se) << ","
       << (mp.stationary[static_cast<std::size_t>(t)] ? 1 : 0) << "\n";
  }
  write_file(out_path(cfg, "multipliers.csv"), ms.str());

  std::ostringstream ss;
  ss << "date,horizon,beta\n";
  for (int t = 0; t < fit.T; ++t) {
    for (int k = 0; k <= cfg.horizon; ++k) {
      ss << mp.dates[static_cast<std::size_t>(t)].str() << "," << k << ","
         << format_double(mp.interim(t, k)) << "\n";
    }
  }
  write_file(out_path(cfg, "interim_surface.csv"), ss.str());

  json doc = {{"horizon", cfg.horizon},
              {"ci_level", cfg.ci_level},
              {"stationary_periods", n_stationary},
              {"nonstationary_periods", static_cast<std::size_t>(fit.T) - n_stationary},
              {"longrun",
               {{"mean", n_stationary ? lr_sum / static_cast<double>(n_stationary) : 0.0},
                {"min", lr_min},
                {"max", lr_max}}},
              {"bootstrap",
               {{"statistic", bt.statistic},
                {"p_value", bt.p_value},
                {"replications", bt.replications},
                {"seed", cfg.seed}}}};
  write_file(out_path(cfg, "efficiency.json"), doc.dump(2) + "\n");

  StageOutput out;
  out.files = {"multipliers.csv", "interim_surface.csv", "efficiency.json"};
  if (cfg.plot_format == "svg") {
    emit_plot(out_path(cfg, "multipliers.csv").string(), "line_with_band",
              out_path(cfg, "multipliers.svg").string());
    emit_plot(out_path(cfg, "interim_surface.csv").string(), "surface_long_format",
              out_path(cfg, "interim_surface.svg").string());
    out.files.push_back("multipliers.svg");
    out.files.push_back("interim_surface.svg");
  }
  out.scalars = {{"bootstrap_statistic", bt.statistic},
                 {"bootstrap_p_value", bt.p_value},
                 {"stationary_periods", n_stationary},
                 {"longrun_mean", n_stationary ? lr_sum / static_cast<double>(n_stationary) : 0.0},
                 {"longrun_min", lr_min},
                 {"longrun_max", lr_max}};
  return out;
}

// ---- spectral --------------------------------------------------------------

void write_spectrum_csv(const PipelineConfig& cfg, const std::string& name,
                        const SpectrumEstimate& est) {
  std::ostringstream os;
  os << "# method=" << spectrum_method_name(est.method) << "\n";
  if (!est.spans.empty()) {
    os << "# spans=";
    for (std::size_t i = 0; i < est.spans.size(); ++i) {
      if (i) os << ";";
      os << est.spans[i];
    }
    os << "\n";
  }
  if (est.method == SpectrumMethod::ArSpectrum) os << "# ar_order=" << est.ar_order << "\n";
  os << "# equivalent_dof=" << format_double(est.equivalent_dof) << "\n";
  os << "# ci_lower_factor=" << format_double(est.ci_lower_factor) << "\n";
  os << "# ci_upper_factor=" << format_double(est.ci_upper_factor) << "\n";
  os << "# dominant_period_months=" << format_double(est.dominant_period_months) << "\n";
  os << "frequency,period_months,density\n";
  for (std::size_t i = 0; i < est.frequency.size(); ++i) {
    os << format_double(est.frequency[i]) << "," << format_double(1.0 / est.frequency[i]) << ","
       << format_double(est.density[i]) << "\n";
  }
  write_file(out_path(cfg, name), os.str());
}

json spectrum_summary(const SpectrumEstimate& est) {
  json j = {{"method", spectrum_method_name(est.method)},
            {"equivalent_dof", est.equivalent_dof},
            {"ci_lower_factor", est.ci_lower_factor},
            {"ci_upper_factor", est.ci_upper_factor},
            {"dominant_period_months", est.dominant_period_months}};
  if (!est.spans.empty()) j["spans"] = est.spans;
  if (est.method == SpectrumMethod::ArSpectrum) j["ar_order"] = est.ar_order;
  return j;
}

StageOutput stage_spectral(const PipelineConfig& cfg) {
  Table table = read_table_file(require_artifact(cfg, "multipliers.csv", "efficiency"));
  std::size_t date_col = table.column("date");
  std::size_t value_col = table.column("longrun");
  if (date_col == Table::npos || value_col == Table::npos) {
    throw DataError("multipliers.csv lacks the date and longrun columns");
  }
  std::vector<std::string> dates;
  std::vector<double> path;
  dates.reserve(table.rows.size());
  path.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(date_col, value_col)) {
      throw DataError("multipliers.csv has a short row");
    }
    double v = 0.0;
    if (!parse_double(row[value_col], v)) throw DataError("multipliers.csv has a non-numeric value");
    dates.push_back(row[date_col]);
    path.push_back(v);
  }
  for (double v : path) {
    if (!std::isfinite(v)) {
      throw DataError(
          "long-run multiplier path contains non-stationary periods; spectra need a complete path");
    }
  }

  HpDecomposition hp = hp_filter(path, cfg.hp_lambda);
  const std::vector<double>& filtered = cfg.hp_component == "cycle" ? hp.cycle : hp.trend;

  std::ostringstream hs;
  hs << "date,longrun,trend,cycle\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    hs << dates[i] << "," << format_double(path[i]) << "," << format_double(hp.trend[i]) << ","
       << format_double(hp.cycle[i]) << "\n";
  }
  write_file(out_path(cfg, "hp.csv"), hs.str());

  struct Panel {
    const char* name;
    SpectrumEstimate est;
  };
  std::vector<Panel> panels;
  panels.push_back({"raw_periodogram", periodogram(path, true, {})});
  panels.push_back({"raw_smoothed", periodogram(path, true, cfg.spans)});
  panels.push_back({"raw_ar", ar_spectrum(path, cfg.spectral_max_order)});
  panels.push_back({"filtered_periodogram", periodogram(filtered, true, {})});
  panels.push_back({"filtered_smoothed", periodogram(filtered, true, cfg.spans)});
  panels.push_back({"filtered_ar", ar_spectrum(filtered, cfg.spectral_max_order)});

  StageOutput out;
  out.files = {"hp.csv"};
  json summaries = json::object();
  for (const Panel& p : panels) {
    std::string csv = std::string("spectrum_") + p.name + ".csv";
    write_spectrum_csv(cfg, csv, p.est);
    out.files.push_back(csv);
    summaries[p.name] = spectrum_summary(p.est);
  }

  double dominant_raw = panels[1].est.dominant_period_months;
  double dominant_filtered = panels[4].est.dominant_period_months;

  json doc = {{"input_length", path.size()},
              {"hp_lambda", cfg.hp_lambda},
              {"hp_component", cfg.hp_component},
              {"spans", cfg.spans},
              {"max_order", cfg.spectral_max_order},
              {"panels", summaries},
              {"dominant_period_raw_months", dominant_raw},
              {"dominant_period_filtered_months", dominant_filtered}};
  write_file(out_path(cfg, "spectral.json"), doc.dump(2) + "\n");
  out.files.push_back("spectral.json");

  if (cfg.plot_format == "svg") {
    for (const Panel& p : panels) {
      std::string csv = std::string("spectrum_") + p.name + ".csv";
      std::string svg = std::string("spectrum_") + p.name + ".svg";
      emit_plot(out_path(cfg, csv).string(), "spectrum_panel", out_path(cfg, svg).string());
      out.files.push_back(svg);
    }
  }

  out.scalars = {{"dominant_period_raw_months", dominant_raw},
                 {"dominant_period_filtered_months", dominant_filtered}};
  return out;
}

// ---- orchestration ---------------------------------------------------------

struct StageDef {
  const char* name;
  StageOutput (*fn)(const PipelineConfig&);
};

constexpr StageDef kStages[] = {
    {"ingest", stage_ingest},       {"stationarity", stage_stationarity},
    {"arstatic", stage_arstatic},   {"tvar", stage_tvar},
    {"efficiency", stage_efficiency}, {"spectral", stage_spectral},
};

std::string stage_list_text() {
  std::string s;
  for (const auto& d : kStages) {
    if (!s.empty()) s += ", ";
    s += d.name;
  }
  return s;
}

[[noreturn]] void rethrow_stage(const std::string& stage, const Error& e) {
  std::string msg = "stage " + stage + ": " + e.what();
  switch (e.code()) {
    case 2: throw ConfigError(msg);
    case 3: throw DataError(msg);
    default: throw NumericError(msg);
  }
}

StageOutput run_one(const std::string& name, const PipelineConfig& cfg) {
  for (const auto& d : kStages) {
    if (name == d.name) {
      try {
        return d.fn(cfg);
      } catch (const Error& e) {
        rethrow_stage(name, e);
      } catch (const std::exception& e) {
        throw NumericError("stage " + name + ": " + e.what());
      }
    }
  }
  throw ConfigError("unknown stage '" + name + "'; stages are " + stage_list_text());
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& d : kStages) v.emplace_back(d.name);
    return v;
  }();
  return names;
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  PipelineConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "input") cfg.input = as_string(v, k);
    else if (k == "date_column") cfg.date_column = as_string(v, k);
    else if (k == "price_column") cfg.price_column = as_string(v, k);
    else if (k == "start") cfg.start = as_string(v, k);
    else if (k == "end") cfg.end = as_string(v, k);
    else if (k == "max_q") cfg.max_q = as_int(v, k);
    else if (k == "q") cfg.q = as_int(v, k);
    else if (k == "lambda") cfg.lambda = as_number(v, k);
    else if (k == "lambda_grid") cfg.lambda_grid = as_number_array(v, k);
    else if (k == "prior_weight") cfg.prior_weight = as_number(v, k);
    else if (k == "horizon") cfg.horizon = as_int(v, k);
    else if (k == "ci_level") cfg.ci_level = as_number(v, k);
    else if (k == "hp_lambda") cfg.hp_lambda = as_number(v, k);
    else if (k == "spans") cfg.spans = as_int_array(v, k);
    else if (k == "boot_reps") cfg.boot_reps = as_int(v, k);
    else if (k == "seed") cfg.seed = as_seed(v, k);
    else if (k == "out_dir") cfg.out_dir = as_string(v, k);
    else if (k == "plot_format") cfg.plot_format = as_string(v, k);
    else if (k == "tvar_hac") cfg.tvar_hac = as_bool(v, k);
    else if (k == "hac_bandwidth") cfg.hac_bandwidth = as_int(v, k);
    else if (k == "adf_max_lag") cfg.adf_max_lag = as_int(v, k);
    else if (k == "adf_deterministic") cfg.adf_deterministic = as_string(v, k);
    else if (k == "spectral_max_order") cfg.spectral_max_order = as_int(v, k);
    else if (k == "hp_component") cfg.hp_component = as_string(v, k);
    else if (k == "resume_from") cfg.resume_from = as_string(v, k);
    else if (k == "workers") cfg.workers = as_int(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
  return config_json(cfg).dump(2) + "\n";
}

void validate_config(const PipelineConfig& cfg) {
  if (cfg.date_column.empty() || cfg.price_column.empty()) {
    throw ConfigError("date_column and price_column must be non-empty");
  }
  std::optional<Month> s = parse_month_opt(cfg.start, "start");
  std::optional<Month> e = parse_month_opt(cfg.end, "end");
  if (s && e && *e < *s) {
    throw ConfigError("sample end " + cfg.end + " precedes start " + cfg.start);
  }
  if (cfg.max_q < 1) throw ConfigError("max_q must be at least 1");
  if (cfg.q < 0) throw ConfigError("q must be non-negative (0 selects by SBIC)");
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be positive (omit it to select by likelihood)");
  if (!cfg.lambda_grid.empty()) {
    double prev = 0.0;
    for (double g : cfg.lambda_grid) {
      if (g <= prev) throw ConfigError("lambda_grid must be positive and strictly increasing");
      prev = g;
    }
  }
  if (cfg.prior_weight <= 0.0) throw ConfigError("prior_weight must be positive");
  if (cfg.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");
  if (cfg.hp_lambda <= 0.0) throw ConfigError("hp_lambda must be positive");
  if (cfg.spans.empty()) throw ConfigError("spans must name at least one smoothing width");
  for (int w : cfg.spans) {
    if (w < 3 || w % 2 == 0) throw ConfigError("spans must be odd integers of at least 3");
  }
  if (cfg.boot_reps < 99) throw ConfigError("boot_reps must be at least 99");
  if (cfg.plot_format != "svg" && cfg.plot_format != "none") {
    throw ConfigError("plot_format must be svg or none");
  }
  if (cfg.hac_bandwidth < -1) throw ConfigError("hac_bandwidth must be -1 (plug-in) or non-negative");
  if (cfg.adf_max_lag < 0) throw ConfigError("adf_max_lag must be non-negative (0 selects the Schwert rule)");
  if (cfg.adf_deterministic != "constant" && cfg.adf_deterministic != "trend") {
    throw ConfigError("adf_deterministic must be constant or trend");
  }
  if (cfg.spectral_max_order < 1) throw ConfigError("spectral_max_order must be at least 1");
  if (cfg.hp_component != "trend" && cfg.hp_component != "cycle") {
    throw ConfigError("hp_component must be trend or cycle");
  }
  if (cfg.out_dir.empty()) throw ConfigError("out_dir must be non-empty");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (!cfg.resume_from.empty()) {
    bool known = false;
    for (const auto& d : kStages) known = known || cfg.resume_from == d.name;
    if (!known) {
      throw ConfigError("unknown stage '" + cfg.resume_from + "'; stages are " + stage_list_text());
    }
  }
}

std::string run_stage(const std::string& name, const PipelineConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);
  auto t0 = std::chrono::steady_clock::now();
  StageOutput so = run_one(name, cfg);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json doc = {{"stage", name},
              {"status", "complete"},
              {"outputs", so.files},
              {"scalars", so.scalars},
              {"timing", {{"seconds", secs}}}};
  std::string text = doc.dump(2) + "\n";
  write_file(out_path(cfg, "manifest." + name + ".json"), text);
  return text;
}

std::string run_pipeline(const PipelineConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);

  std::size_t first = 0;
  if (!cfg.resume_from.empty()) {
    for (std::size_t i = 0; i < std::size(kStages); ++i) {
      if (cfg.resume_from == kStages[i].name) {
        first = i;
        break;
      }
    }
  }

  json stages = json::array();
  json results = json::object();
  json timing = json::object();
  double total = 0.0;
  for (std::size_t i = 0; i < std::size(kStages); ++i) {
    const StageDef& d = kStages[i];
    if (i < first) {
      stages.push_back({{"name", d.name}, {"status", "resumed"}});
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    StageOutput so = run_one(d.name, cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += secs;
    timing[std::string(d.name) + "_seconds"] = secs;
    stages.push_back(
        {{"name", d.name}, {"status", "complete"}, {"outputs", so.files}, {"scalars", so.scalars}});
    for (const auto& item : so.scalars.items()) results[item.key()] = item.value();
  }
  timing["total_seconds"] = total;

  json manifest = {{"library_version", TVEF_VERSION_STRING},
                   {"config", config_json(cfg)},
                   {"stages", stages},
                   {"results", results},
                   {"timing", timing}};
  std::string text = manifest.dump(2) + "\n";
  write_file(out_path(cfg, "manifest.json"), text);
  return text;
}

void emit_plot(const std::string& artifact_path, const std::string& kind,
               const std::string& svg_path) {
  Table t = read_table_file(artifact_path);
  if (t.header.empty() || t.rows.size() < 2) {
    throw ConfigError("artifact " + artifact_path + " has no plottable rows");
  }
  auto column_values = [&](std::size_t idx) {
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (const auto& row : t.rows) {
      if (idx >= row.size()) throw ConfigError("artifact " + artifact_path + " has a short row");
      double d = 0.0;
      if (!parse_double(row[idx], d)) {
        throw ConfigError("artifact " + artifact_path + " has a non-numeric cell where the " +
                          kind + " schema expects numbers");
      }
      v.push_back(d);
    }
    return v;
  };
  auto column_labels = [&](std::size_t idx) {
    std::vector<std::string> v;
    v.reserve(t.rows.size());
    for (const auto& row : t.rows) {
      if (idx >= row.size()) throw ConfigError("artifact " + artifact_path + " has a short row");
      v.push_back(row[idx]);
    }
    return v;
  };
  std::string title = fs::path(artifact_path).stem().string();

  std::string svg;
  if (kind == "line_with_band") {
    std::size_t lo = t.column("lower");
    std::size_t up = t.column("upper");
    if (t.header.size() < 4 || lo == Table::npos || up == Table::npos) {
      throw ConfigError("line_with_band needs a label column, a value column, and lower/upper "
                        "columns; got header " + t.header.front() + "...");
    }
    svg = svg_line_with_band(column_labels(0), column_values(1), column_values(lo),
                             column_values(up), title);
  } else if (kind == "surface_long_format") {
    if (t.header.size() != 3 || t.header[1] != "horizon") {
      throw ConfigError("surface_long_format needs exactly (label, horizon, value) columns");
    }
    svg = svg_surface_long(column_labels(0), column_values(1), column_values(2), title);
  } else if (kind == "spectrum_panel") {
    std::vector<std::string> want = {"frequency", "period_months", "density"};
    if (t.header != want) {
      throw ConfigError("spectrum_panel needs exactly (frequency, period_months, density) columns");
    }
    std::optional<std::pair<double, double>> ci;
    double lo_factor = 0.0, up_factor = 0.0;
    bool have_lo = false, have_up = false;
    for (const auto& [k, v] : t.metadata) {
      if (k == "ci_lower_factor") have_lo = parse_double(v, lo_factor);
      if (k == "ci_upper_factor") have_up = parse_double(v, up_factor);
    }
    if (have_lo && have_up) ci = std::make_pair(lo_factor, up_factor);
    svg = svg_spectrum_panel(column_values(0), column_values(2), ci, title);
  } else {
    throw ConfigError("unknown plot kind '" + kind +
                      "'; kinds are line_with_band, surface_long_format, spectrum_panel");
  }
  write_file(svg_path, svg);
}

}  // namespace tvef
