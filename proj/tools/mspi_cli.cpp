// mspi: command-line driver for the stress-probability pipeline.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mspi/artifacts.hpp"
#include "mspi/config.hpp"
#include "mspi/csv.hpp"
#include "mspi/error.hpp"
#include "mspi/learners/serialize.hpp"
#include "mspi/synthetic.hpp"

using namespace mspi;
using nlohmann::json;

namespace {

struct Context {
  PipelineConfig cfg;
  std::string hash;

  std::string comment() const { return "config_hash: " + hash; }
  std::string path(const std::string& name) const { return cfg.artifact(name); }
};

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void check_upstream(const Context& ctx, const std::string& path, const std::string& hash) {
  if (!hash.empty() && hash != ctx.hash)
    warn(fmt::format("{} was written under config {} (current {})", path, hash, ctx.hash));
}

json stamped(const Context& ctx, json body) {
  body["config_hash"] = ctx.hash;
  return body;
}

// --- simulate ---------------------------------------------------------------

void cmd_simulate(const Context& ctx) {
  const SimOutput sim = simulate(ctx.cfg.sim);
  write_panel_csv(ctx.cfg.resolved_panel_path(), sim.panel, ctx.comment());
  write_market_csv(ctx.cfg.resolved_market_path(), sim.market, ctx.comment());
  write_true_regime_csv(ctx.path("true_regime.csv"), sim, ctx.comment());
  std::size_t stress = 0;
  for (bool s : sim.true_regime) stress += s;
  fmt::print("simulated {} months, {} stocks, {} stress months\n", sim.months.size(),
             sim.panel.security_ids().size(), stress);
}

// --- features / label -------------------------------------------------------

struct Inputs {
  PanelLoad load;
  MarketSeries market;
  MonthPartition partition;
};

Inputs load_inputs(const Context& ctx) {
  const std::string panel_path = ctx.cfg.resolved_panel_path();
  const std::string market_path = ctx.cfg.resolved_market_path();
  require_file(panel_path);
  require_file(market_path);
  Inputs in{load_daily_panel(panel_path, ctx.cfg.filter), load_market_series(market_path), {}};
  in.partition = partition_months(in.load.panel, in.market);
  return in;
}

void cmd_features(const Context& ctx) {
  const Inputs in = load_inputs(ctx);
  const auto daily = compute_daily_stats(in.load.panel, ctx.cfg.tail, ctx.cfg.threads);
  const FeatureMatrix f = aggregate_monthly(daily, in.partition);
  write_features_csv(ctx.path("features.csv"), f, ctx.hash);
  write_json(ctx.path("ingest_summary.json"), stamped(ctx, in.load.summary.to_json()));
  fmt::print("{} months of features from {} retained rows\n", f.size(), in.load.summary.rows_retained);
}

void cmd_label(const Context& ctx) {
  const Inputs in = load_inputs(ctx);
  const auto monthly = market_monthly(in.market, in.partition, ctx.cfg.stress);
  const LabelSeries labels = label_stress(monthly, ctx.cfg.stress);
  write_labels_csv(ctx.path("labels.csv"), labels, ctx.hash);
  std::size_t n = 0, s = 0, rb = 0, vb = 0;
  for (const auto& r : labels.rows) {
    if (!r.stress) continue;
    ++n;
    s += static_cast<std::size_t>(*r.stress);
    rb += r.return_branch;
    vb += r.vol_branch;
  }
  fmt::print("{} labeled months: {} stress ({} return branch, {} volatility branch)\n", n, s, rb, vb);
}

// --- backtest ---------------------------------------------------------------

void cmd_backtest(const Context& ctx) {
  const FeatureMatrix features = read_features_csv(ctx.path("features.csv"));
  const LabelSeries labels = read_labels_csv(ctx.path("labels.csv"));
  BacktestOutput out = run_expanding_backtest(features, labels, ctx.cfg.backtest);
  out.series.config_hash = ctx.hash;
  write_forecasts_csv(ctx.path("forecasts.csv"), out.series);

  json selections = json::array();
  for (const auto& s : out.series.selections) {
    json losses = json::array();
    for (double l : s.cv.mean_loss) losses.push_back(l);
    selections.push_back({{"model", model_name(s.model)},
                          {"grid_index", s.grid_index},
                          {"hyperparameters", hyper_to_json(s.model, s.hyper)},
                          {"cv_mean_log_loss", losses},
                          {"cv_folds_used", s.cv.folds_used}});
  }
  const auto& recs = out.series.records;
  json prov = {{"seed", ctx.cfg.seed},
               {"initial_window_months", ctx.cfg.backtest.initial_window_months},
               {"cv_folds", ctx.cfg.backtest.cv_folds},
               {"first_forecast_month", format_year_month(recs.front().month)},
               {"last_forecast_month", format_year_month(recs.back().month)},
               {"selections", selections},
               {"warnings", out.series.warnings}};
  write_json(ctx.path("provenance.json"), stamped(ctx, prov));

  json models = json::array();
  for (std::size_t i = 0; i < out.final_models.size(); ++i) {
    json m = out.final_models[i].to_json();
    m["calibration"] = to_json(out.final_calibration[i]);
    models.push_back(m);
  }
  write_json(ctx.path("models.json"),
             stamped(ctx, {{"month", format_year_month(recs.back().month)}, {"models", models}}));
  for (const auto& w : out.series.warnings) warn(w);
  fmt::print("{} forecast records, {} to {}\n", recs.size(), format_year_month(recs.front().month),
             format_year_month(recs.back().month));
}

// --- evaluation ---------------------------------------------------------------

ForecastSeries load_forecasts(const Context& ctx) {
  const std::string path = ctx.path("forecasts.csv");
  ForecastSeries s = read_forecasts_csv(path);
  check_upstream(ctx, path, s.config_hash);
  return s;
}

void write_bins(const Context& ctx, const ForecastSeries& s) {
  std::ofstream out(ctx.path("bins.csv"), std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", ctx.path("bins.csv")));
  out << "# " << ctx.comment() << '\n';
  out << "model,lo,hi,n,mean_prob,stress_rate,mean_next_vol,mean_next_ret\n";
  for (ModelKind kind : s.models()) {
    const EvaluationSample e = evaluation_sample(s, kind);
    for (const auto& b : binned_outcomes(e.prob, e.y, e.next_vol, e.next_ret, ctx.cfg.bin_edges))
      out << model_name(kind) << ',' << csv::format_double(b.lo) << ',' << csv::format_double(b.hi)
          << ',' << b.n << ',' << csv::format_double(b.mean_prob) << ','
          << csv::format_double(b.stress_rate) << ',' << csv::format_double(b.mean_next_vol) << ','
          << csv::format_double(b.mean_next_ret) << '\n';
  }
}

void cmd_evaluate(const Context& ctx) {
  const ForecastSeries s = load_forecasts(ctx);
  json per_model = json::array();
  std::ofstream curves(ctx.path("curves.csv"), std::ios::binary);
  if (!curves) throw DataError(fmt::format("cannot write '{}'", ctx.path("curves.csv")));
  curves << "# " << ctx.comment() << '\n' << "model,curve,x,y,count\n";
  std::size_t n = 0;
  double event_rate = 0.0;
  for (ModelKind kind : s.models()) {
    const EvaluationSample e = evaluation_sample(s, kind);
    const ModelMetrics m = model_metrics(std::string(model_name(kind)), e.raw, e.prob, e.y, ctx.cfg.ece_bins);
    per_model.push_back(to_json(m));
    n = e.y.size();
    event_rate = 0.0;
    for (int v : e.y) event_rate += v;
    event_rate /= static_cast<double>(n);
    const std::string name(model_name(kind));
    for (const auto& p : roc_points(e.raw, e.y))
      curves << name << ",roc," << csv::format_double(p.x) << ',' << csv::format_double(p.y) << ",\n";
    for (const auto& p : pr_points(e.raw, e.y))
      curves << name << ",pr," << csv::format_double(p.x) << ',' << csv::format_double(p.y) << ",\n";
    for (const auto& p : ece(e.prob, e.y, ctx.cfg.ece_bins).points)
      curves << name << ",calibration," << csv::format_double(p.mean_prob) << ','
             << csv::format_double(p.event_rate) << ',' << p.count << '\n';
  }
  write_json(ctx.path("metrics.json"), stamped(ctx, {{"models", per_model},
                                                     {"event_rate", event_rate},
                                                     {"n", n},
                                                     {"ece_bins", ctx.cfg.ece_bins}}));
  write_bins(ctx, s);
  fmt::print("evaluated {} models on {} months (event rate {:.3f})\n", per_model.size(), n, event_rate);
}

void cmd_bins(const Context& ctx) { write_bins(ctx, load_forecasts(ctx)); }

ScoredSeries scored(const EvaluationSample& e) { return {e.raw, e.prob}; }

void cmd_bootstrap(const Context& ctx) {
  const ForecastSeries s = load_forecasts(ctx);
  const ModelKind bench = *parse_model(ctx.cfg.benchmark_model);
  const auto models = s.models();
  if (std::find(models.begin(), models.end(), bench) == models.end())
    throw DataError(fmt::format("forecasts.csv has no rows for benchmark model {}", ctx.cfg.benchmark_model));
  const EvaluationSample b = evaluation_sample(s, bench);
  const BootstrapOptions opt = ctx.cfg.bootstrap_options();
  json rows = json::array();
  for (ModelKind kind : models) {
    if (kind == bench) continue;
    const EvaluationSample a = evaluation_sample(s, kind);
    if (a.months != b.months) throw DataError("bootstrap: models cover different months");
    json stats = json::array();
    for (Metric m : all_metrics()) stats.push_back(to_json(block_bootstrap_diff(scored(a), scored(b), a.y, m, opt)));
    rows.push_back({{"model", model_name(kind)}, {"stats", stats}});
  }
  write_json(ctx.path("bootstrap.json"), stamped(ctx, {{"benchmark", ctx.cfg.benchmark_model},
                                                       {"block_len", opt.block_len},
                                                       {"reps", opt.reps},
                                                       {"seed", opt.seed},
                                                       {"n", b.y.size()},
                                                       {"rows", rows}}));
  fmt::print("bootstrap: {} models vs {} ({} reps, {}-month blocks)\n", rows.size(),
             ctx.cfg.benchmark_model, opt.reps, opt.block_len);
}

// --- econometrics -------------------------------------------------------------

// MSPI forecasts joined with the month-t market controls from labels.csv.
struct MspiPanel {
  std::vector<YearMonth> months;
  std::vector<double> mspi, next_vol, next_ret;
  Matrix controls;            // (R_t, sigma_t)
  Matrix lagged_controls;     // (R_{t-1}, sigma_{t-1})
  std::vector<std::size_t> label_row;
};

const std::vector<std::string> kControlNames{"mkt_ret", "mkt_vol"};

MspiPanel mspi_panel(const Context& ctx, const ForecastSeries& s, const LabelSeries& labels) {
  const ModelKind kind = *parse_model(ctx.cfg.mspi_model);
  MspiPanel p;
  for (const auto& r : s.of(kind)) {
    const auto row = labels.find(r.month);
    if (!row || *row == 0)
      throw DataError(fmt::format("labels.csv lacks month {} or its predecessor", format_year_month(r.month)));
    const LabelRow& cur = labels.rows[*row];
    const LabelRow& prev = labels.rows[*row - 1];
    p.months.push_back(r.month);
    p.mspi.push_back(r.probability);
    p.next_vol.push_back(r.next_vol);
    p.next_ret.push_back(r.next_ret);
    p.controls.append_row(std::vector<double>{cur.mkt_ret, cur.mkt_vol});
    p.lagged_controls.append_row(std::vector<double>{prev.mkt_ret, prev.mkt_vol});
    p.label_row.push_back(*row);
  }
  if (p.months.size() < 3) throw DataError(fmt::format("too few {} forecasts for regressions", ctx.cfg.mspi_model));
  return p;
}

// Months whose next-month outcomes are observed (a leading run).
std::size_t observed_prefix(const MspiPanel& p) {
  std::size_t n = 0;
  while (n < p.months.size() && std::isfinite(p.next_vol[n]) && std::isfinite(p.next_ret[n])) ++n;
  return n;
}

Matrix head_rows(const Matrix& X, std::size_t n) { return X.slice_rows(0, n); }

void cmd_regress(const Context& ctx) {
  const ForecastSeries s = load_forecasts(ctx);
  const LabelSeries labels = read_labels_csv(ctx.path("labels.csv"));
  const MspiPanel p = mspi_panel(ctx, s, labels);
  const std::size_t n = observed_prefix(p);
  const std::span<const double> mspi(p.mspi.data(), n);
  const Matrix Z = head_rows(p.controls, n);

  const PredictiveRegression pv = predictive_vol_regression(
      mspi, std::span<const double>(p.next_vol.data(), n), Z, kControlNames, ctx.cfg.hac_lag);
  const CrashRegression cr = crash_regression(mspi, std::span<const double>(p.next_ret.data(), n), Z,
                                              kControlNames, ctx.cfg.crash_cutoff, ctx.cfg.hac_lag);
  if (!cr.warning.empty()) warn(cr.warning);
  // Innovations use every forecast month; Z_{t-1} is row t-1 of the controls.
  const InnovationSeries inn = mspi_innovations(p.mspi, p.controls, kControlNames, ctx.cfg.hac_lag);

  json logistic = nullptr;
  if (cr.logistic) {
    json coef = json::array();
    coef.push_back({{"name", "const"}, {"coef", cr.logistic->intercept}});
    for (std::size_t j = 0; j < cr.logistic->coef.size(); ++j)
      coef.push_back({{"name", cr.names[j + 1]}, {"coef", cr.logistic->coef[j]}});
    logistic = {{"coefficients", coef}, {"converged", cr.logistic->converged}};
  }
  double u_ss = 0.0;
  for (double u : inn.residual) u_ss += u * u;
  json body = {
      {"mspi_model", ctx.cfg.mspi_model},
      {"predictive_vol", {{"full", to_json(pv.full)},
                          {"controls_only", to_json(*pv.controls_only)},
                          {"delta_r2", pv.delta_r2}}},
      {"crash", {{"cutoff", ctx.cfg.crash_cutoff},
                 {"crashes", cr.crashes},
                 {"linear_probability", to_json(cr.linear_probability)},
                 {"logistic", logistic},
                 {"warning", cr.warning}}},
      {"innovations", {{"regression", to_json(inn.regression)},
                       {"u_std", std::sqrt(u_ss / static_cast<double>(inn.residual.size()))}}}};
  write_json(ctx.path("regression.json"), stamped(ctx, body));

  std::ofstream out(ctx.path("innovations.csv"), std::ios::binary);
  out << "# " << ctx.comment() << '\n' << "month,mspi,fitted,u\n";
  for (std::size_t k = 0; k < inn.index.size(); ++k) {
    const std::size_t t = inn.index[k];
    out << format_year_month(p.months[t]) << ',' << csv::format_double(p.mspi[t]) << ','
        << csv::format_double(inn.fitted[k]) << ',' << csv::format_double(inn.residual[k]) << '\n';
  }
  fmt::print("predictive gamma = {:.4f} (t = {:.2f}), delta R2 = {:.4f}\n", pv.full.coef[1],
             pv.full.t_stat(1), pv.delta_r2);
}

void cmd_lp(const Context& ctx) {
  const ForecastSeries s = load_forecasts(ctx);
  const LabelSeries labels = read_labels_csv(ctx.path("labels.csv"));
  const MspiPanel p = mspi_panel(ctx, s, labels);
  const InnovationSeries inn = mspi_innovations(p.mspi, p.controls, kControlNames, ctx.cfg.hac_lag);

  // Outcome y_t is the month t+1 value of the chosen series, t over u's months.
  std::optional<FeatureMatrix> features;
  if (ctx.cfg.lp_outcome != "realized_vol" && ctx.cfg.lp_outcome != "crash")
    features = read_features_csv(ctx.path("features.csv"));
  std::vector<double> u, y;
  Matrix W;
  for (std::size_t k = 0; k < inn.index.size(); ++k) {
    const std::size_t t = inn.index[k];
    double v = std::numeric_limits<double>::quiet_NaN();
    if (ctx.cfg.lp_outcome == "realized_vol") {
      v = p.next_vol[t];
    } else if (ctx.cfg.lp_outcome == "crash") {
      if (std::isfinite(p.next_ret[t])) v = p.next_ret[t] <= ctx.cfg.crash_cutoff ? 1.0 : 0.0;
    } else {
      const auto row = features->find(next_month(p.months[t]));
      if (row) {
        const auto& names = feature_names();
        const auto col = static_cast<std::size_t>(
            std::find(names.begin(), names.end(), ctx.cfg.lp_outcome) - names.begin());
        v = features->values(*row, col);
      }
    }
    if (!std::isfinite(v)) break;
    u.push_back(inn.residual[k]);
    y.push_back(v);
    W.append_row(p.lagged_controls.row(t));
  }
  const LocalProjectionResult lp = local_projections(u, y, W, ctx.cfg.lp_horizon, ctx.cfg.lp_hac_offset);
  for (const auto& w : lp.warnings) warn(w);
  std::ofstream out(ctx.path("local_projections.csv"), std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", ctx.path("local_projections.csv")));
  out << "# " << ctx.comment() << '\n' << "# outcome: " << ctx.cfg.lp_outcome << '\n'
      << "h,b_h,se_h,N_h\n";
  for (const auto& h : lp.horizons)
    out << h.h << ',' << csv::format_double(h.b) << ',' << csv::format_double(h.se) << ',' << h.n << '\n';
  fmt::print("{} horizons for outcome {}\n", lp.horizons.size(), ctx.cfg.lp_outcome);
}

// --- report -------------------------------------------------------------------

std::vector<json> read_bins_csv(const std::string& path) {
  require_file(path);
  csv::Reader r(path);
  std::vector<json> rows;
  std::vector<std::string> f;
  const auto& header = r.header();
  while (r.next(f)) {
    json row;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == "model") {
        row[header[c]] = f[c];
      } else {
        const auto v = csv::parse_double(f[c]);
        row[header[c]] = v ? json(*v) : json(nullptr);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string num(const json& v, int digits = 3) {
  return v.is_number() ? fmt::format("{:.{}f}", v.get<double>(), digits) : std::string("-");
}

void cmd_report(const Context& ctx) {
  const json metrics = read_json(ctx.path("metrics.json"));
  const auto bins = read_bins_csv(ctx.path("bins.csv"));
  const json boot = read_json(ctx.path("bootstrap.json"));
  const json reg = read_json(ctx.path("regression.json"));
  for (const auto* j : {&metrics, &boot, &reg})
    check_upstream(ctx, "report input", j->value("config_hash", std::string{}));

  json report = {{"metrics", metrics}, {"bins", bins}, {"bootstrap", boot}, {"regression", reg},
                 {"ece_bins", metrics.at("ece_bins")}, {"block_len", boot.at("block_len")}};
  write_json(ctx.path("report.json"), stamped(ctx, report));

  std::string txt;
  txt += fmt::format("Out-of-sample performance (N = {}, event rate = {})\n", metrics.at("n").get<std::size_t>(),
                     num(metrics.at("event_rate")));
  txt += fmt::format("{:<20}{:>8}{:>8}{:>8}{:>9}{:>8}{:>10}\n", "model", "AUC", "PR-AUC", "Brier",
                     "LogLoss", "ECE", "MeanProb");
  for (const auto& m : metrics.at("models"))
    txt += fmt::format("{:<20}{:>8}{:>8}{:>8}{:>9}{:>8}{:>10}\n", m.at("model").get<std::string>(),
                       num(m.at("auc")), num(m.at("pr_auc")), num(m.at("brier")),
                       num(m.at("log_loss")), num(m.at("ece")), num(m.at("mean_prob")));
  txt += fmt::format("ECE bins = {}, equal mass\n\n", metrics.at("ece_bins").get<std::size_t>());

  txt += fmt::format("Realized outcomes by {} bin\n", ctx.cfg.mspi_model);
  txt += fmt::format("{:<14}{:>6}{:>10}{:>10}{:>10}{:>10}\n", "bin", "N", "MeanProb", "Stress",
                     "NextVol", "NextRet");
  for (const auto& b : bins) {
    if (b.at("model") != ctx.cfg.mspi_model) continue;
    txt += fmt::format("[{:.2f}, {:.2f}{}{:>6}{:>10}{:>10}{:>10}{:>10}\n", b.at("lo").get<double>(),
                       b.at("hi").get<double>(), b.at("hi").get<double>() == 1.0 ? "]" : ")",
                       num(b.at("n"), 0), num(b.at("mean_prob")), num(b.at("stress_rate")),
                       num(b.at("mean_next_vol")), num(b.at("mean_next_ret")));
  }
  txt += '\n';

  txt += fmt::format("Block bootstrap vs {} (block length = {}, reps = {})\n",
                     boot.at("benchmark").get<std::string>(), boot.at("block_len").get<std::size_t>(),
                     boot.at("reps").get<std::size_t>());
  txt += fmt::format("{:<20}{:<10}{:>9}{:>20}{:>8}\n", "model", "metric", "delta", "95% CI", "p");
  for (const auto& row : boot.at("rows"))
    for (const auto& st : row.at("stats"))
      txt += fmt::format("{:<20}{:<10}{:>9}{:>20}{:>8}\n", row.at("model").get<std::string>(),
                         st.at("metric").get<std::string>(), num(st.at("delta")),
                         fmt::format("[{}, {}]", num(st.at("ci_lo")), num(st.at("ci_hi"))),
                         num(st.at("p_value")));
  txt += '\n';

  const json& pv = reg.at("predictive_vol");
  for (const auto& c : pv.at("full").at("coefficients"))
    if (c.at("name") == "mspi")
      txt += fmt::format("Predictive volatility regression: gamma = {} (HAC t = {}), delta R2 = {}\n",
                         num(c.at("coef"), 4), num(c.at("t"), 2), num(pv.at("delta_r2"), 4));
  const json& crash = reg.at("crash");
  for (const auto& c : crash.at("linear_probability").at("coefficients"))
    if (c.at("name") == "mspi")
      txt += fmt::format("Crash regression (R <= {}, {} crashes): LPM slope = {} (HAC t = {})",
                         num(crash.at("cutoff"), 2), crash.at("crashes").get<std::size_t>(),
                         num(c.at("coef"), 4), num(c.at("t"), 2));
  if (crash.contains("logistic") && crash.at("logistic").is_object()) {
    for (const auto& c : crash.at("logistic").at("coefficients"))
      if (c.at("name") == "mspi") txt += fmt::format(", logit slope = {}", num(c.at("coef"), 4));
  }
  txt += '\n';

  if (std::filesystem::exists(ctx.path("local_projections.csv"))) {
    csv::Reader lp(ctx.path("local_projections.csv"));
    std::string outcome;
    for (const auto& line : lp.comments())
      if (line.rfind("# outcome: ", 0) == 0) outcome = line.substr(11);
    txt += fmt::format("\nLocal projections of {} on the innovation\n", outcome);
    txt += fmt::format("{:>3}{:>12}{:>12}{:>6}\n", "h", "b_h", "se_h", "N_h");
    std::vector<std::string> row;
    while (lp.next(row)) {
      if (row.size() < 4) continue;
      const auto b = csv::parse_double(row[1]);
      const auto se = csv::parse_double(row[2]);
      txt += fmt::format("{:>3}{:>12}{:>12}{:>6}\n", row[0], b ? fmt::format("{:.4f}", *b) : "-",
                         se ? fmt::format("{:.4f}", *se) : "-", row[3]);
    }
  }

  std::ofstream out(ctx.path("report.txt"), std::ios::binary);
  out << txt;
  std::cout << txt;
}

int run(const std::string& sub, const Context& ctx) {
  std::filesystem::create_directories(ctx.cfg.out_dir);
  if (sub == "simulate") cmd_simulate(ctx);
  else if (sub == "features") cmd_features(ctx);
  else if (sub == "label") cmd_label(ctx);
  else if (sub == "backtest") cmd_backtest(ctx);
  else if (sub == "evaluate") cmd_evaluate(ctx);
  else if (sub == "bootstrap") cmd_bootstrap(ctx);
  else if (sub == "bins") cmd_bins(ctx);
  else if (sub == "regress") cmd_regress(ctx);
  else if (sub == "lp") cmd_lp(ctx);
  else if (sub == "report") cmd_report(ctx);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Market stress probability pipeline"};
  app.require_subcommand(0, 1);
  std::string config_path, out_dir;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (outputs do not depend on it)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_flag("--print-config", print_config, "print the effective config and exit");
  const std::vector<std::pair<std::string, std::string>> subs{
      {"simulate", "write a synthetic panel, market series and true regimes"},
      {"features", "monthly fragility features from the panel"},
      {"label", "monthly stress labels from the market series"},
      {"backtest", "expanding-window forecasts for every model"},
      {"evaluate", "metrics, curves and outcome bins"},
      {"bootstrap", "block-bootstrap differences against the benchmark"},
      {"bins", "outcome bins only"},
      {"regress", "predictive, crash and innovation regressions"},
      {"lp", "local projections on the innovations"},
      {"report", "assemble the report from earlier artifacts"}};
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    Context ctx;
    ctx.cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
    if (threads) ctx.cfg.threads = threads;
    if (*seed_opt) ctx.cfg.seed = seed;
    ctx.cfg.propagate_seed();
    ctx.cfg.validate();
    ctx.hash = config_hash(ctx.cfg);
    if (print_config) {
      std::cout << config_to_json(ctx.cfg).dump(2) << '\n';
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 2;
    }
    return run(app.get_subcommands().front()->get_name(), ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
