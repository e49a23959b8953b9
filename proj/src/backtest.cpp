#include "mspi/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "mspi/error.hpp"
#include "mspi/learners/serialize.hpp"
#include "mspi/parallel.hpp"
#include "mspi/rng.hpp"

namespace mspi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t kind_index(ModelKind kind) { return static_cast<std::uint64_t>(kind); }

Matrix take_rows(const Matrix& X, std::size_t first, std::size_t count) {
  return X.slice_rows(first, count);
}

double base_rate_of(std::span<const int> y) {
  double k = 0.0;
  for (int v : y) k += v;
  return (k + 1.0) / (static_cast<double>(y.size()) + 2.0);
}

bool single_class(std::span<const int> y) {
  return std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; });
}

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::l1_logit: return "l1_logit";
    case ModelKind::l2_logit: return "l2_logit";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::gradient_boosting: return "gradient_boosting";
  }
  return "?";
}

std::optional<ModelKind> parse_model(std::string_view name) {
  for (ModelKind k : {ModelKind::l1_logit, ModelKind::l2_logit, ModelKind::random_forest,
                      ModelKind::gradient_boosting})
    if (model_name(k) == name) return k;
  return std::nullopt;
}

ScoreScale raw_scale(ModelKind kind) {
  return kind == ModelKind::gradient_boosting ? ScoreScale::log_odds : ScoreScale::probability;
}

nlohmann::json hyper_to_json(ModelKind kind, const Hyper& h) {
  switch (kind) {
    case ModelKind::l1_logit:
    case ModelKind::l2_logit: return {{"lambda", h.lambda}};
    case ModelKind::random_forest:
      return {{"n_trees", h.forest.n_trees},
              {"max_depth", h.forest.max_depth},
              {"min_leaf", h.forest.min_leaf},
              {"features_per_split", h.forest.features_per_split}};
    case ModelKind::gradient_boosting:
      return {{"n_stages", h.boost.n_stages},
              {"shrinkage", h.boost.shrinkage},
              {"max_depth", h.boost.max_depth},
              {"min_leaf", h.boost.min_leaf}};
  }
  return {};
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {hi};
  std::vector<double> g(n);
  const double a = std::log10(hi), b = std::log10(lo);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

void BacktestConfig::validate() const {
  if (cv_folds == 0) throw ConfigError("cv_folds: must be positive");
  if (initial_window_months < cv_folds + 1)
    throw ConfigError("initial_window_months: must be at least cv_folds + 1");
  if (initial_window_months / (cv_folds + 1) < 6)
    throw ConfigError("initial_window_months: validation segments would be shorter than 6 months");
  if (models.empty()) throw ConfigError("models: empty model list");
  std::set<ModelKind> seen;
  for (ModelKind m : models)
    if (!seen.insert(m).second)
      throw ConfigError(fmt::format("models: {} listed twice", model_name(m)));
  auto check_lambdas = [](const std::vector<double>& g, const char* name) {
    if (g.empty()) throw ConfigError(fmt::format("{}: empty grid", name));
    for (double l : g)
      if (!(l >= 0.0) || !std::isfinite(l))
        throw ConfigError(fmt::format("{}: penalties must be finite and >= 0", name));
  };
  check_lambdas(l1_lambdas, "l1_lambdas");
  check_lambdas(l2_lambdas, "l2_lambdas");
  if (rf_grid.empty()) throw ConfigError("rf grid: empty");
  for (const auto& p : rf_grid) {
    if (p.n_trees == 0) throw ConfigError("rf_n_trees: must be positive");
    if (p.min_leaf == 0) throw ConfigError("rf_min_leaf: must be positive");
  }
  if (gb_grid.empty()) throw ConfigError("gb grid: empty");
  for (const auto& p : gb_grid) {
    if (!(p.shrinkage > 0.0 && p.shrinkage <= 1.0))
      throw ConfigError("gb_shrinkage: must lie in (0, 1]");
    if (p.max_depth == 0) throw ConfigError("gb_max_depth: must be positive");
    if (p.min_leaf == 0) throw ConfigError("gb_min_leaf: must be positive");
  }
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0))
    throw ConfigError("calibration_fraction: must lie in (0, 1)");
  if (min_calibration_months < 2) throw ConfigError("min_calibration_months: must be at least 2");
}

std::vector<Hyper> BacktestConfig::grid(ModelKind kind) const {
  std::vector<Hyper> g;
  switch (kind) {
    case ModelKind::l1_logit:
    case ModelKind::l2_logit: {
      auto lambdas = kind == ModelKind::l1_logit ? l1_lambdas : l2_lambdas;
      std::stable_sort(lambdas.begin(), lambdas.end(), std::greater<>());
      for (double l : lambdas) g.push_back({l, {}, {}});
      break;
    }
    case ModelKind::random_forest: {
      auto grid = rf_grid;
      auto depth_key = [](const ForestParams& p) {
        return p.max_depth == 0 ? std::numeric_limits<std::size_t>::max() : p.max_depth;
      };
      std::stable_sort(grid.begin(), grid.end(), [&](const ForestParams& a, const ForestParams& b) {
        if (depth_key(a) != depth_key(b)) return depth_key(a) < depth_key(b);
        if (a.min_leaf != b.min_leaf) return a.min_leaf > b.min_leaf;
        return a.n_trees < b.n_trees;
      });
      for (const auto& p : grid) g.push_back({0.0, p, {}});
      break;
    }
    case ModelKind::gradient_boosting: {
      auto grid = gb_grid;
      std::stable_sort(grid.begin(), grid.end(), [](const BoostParams& a, const BoostParams& b) {
        if (a.n_stages != b.n_stages) return a.n_stages < b.n_stages;
        return a.max_depth < b.max_depth;
      });
      for (const auto& p : grid) g.push_back({0.0, {}, p});
      break;
    }
  }
  return g;
}

const Matrix& ModelingData::design(ModelKind kind, bool benchmark_market_controls) const {
  return kind == ModelKind::l2_logit && benchmark_market_controls ? market : fragility;
}

ModelingData assemble_modeling_data(const FeatureMatrix& features, const LabelSeries& labels) {
  ModelingData d;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.rows[i].stress) rows.push_back(i);
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k] != rows[k - 1] + 1)
      throw DataError(fmt::format("labels: labeled months are not contiguous at {}",
                                  format_year_month(labels.rows[rows[k]].month)));
  d.fragility = Matrix(rows.size(), kNumFeatures);
  d.market = Matrix(rows.size(), 2);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const LabelRow& row = labels.rows[rows[k]];
    const auto f = features.find(row.month);
    if (!f)
      throw DataError(fmt::format("features: no row for labeled month {}",
                                  format_year_month(row.month)));
    for (std::size_t c = 0; c < kNumFeatures; ++c) d.fragility(k, c) = features.values(*f, c);
    d.market(k, 0) = row.mkt_ret;
    d.market(k, 1) = row.mkt_vol;
    d.months.push_back(row.month);
    d.y_next.push_back(row.y_next);
    const bool has_next = rows[k] + 1 < labels.size();
    d.next_vol.push_back(has_next ? labels.rows[rows[k] + 1].mkt_vol : kNaN);
    d.next_ret.push_back(has_next ? labels.rows[rows[k] + 1].mkt_ret : kNaN);
    if (k + 1 < rows.size()) d.target.push_back(*labels.rows[rows[k + 1]].stress);
  }
  return d;
}

double FittedModel::raw_score(std::span<const double> x) const {
  if (base_rate) return kind == ModelKind::gradient_boosting ? logit(*base_rate) : *base_rate;
  const auto z = standardize_apply(standardization, x);
  switch (kind) {
    case ModelKind::l1_logit:
    case ModelKind::l2_logit: return predict_proba(std::get<LogitModel>(model), z);
    case ModelKind::random_forest: return rf_score(std::get<ForestModel>(model), z);
    case ModelKind::gradient_boosting: return gb_score(std::get<BoostModel>(model), z);
  }
  return 0.0;
}

double FittedModel::native_probability(double raw) const {
  return kind == ModelKind::gradient_boosting ? clamp_probability(sigmoid(raw))
                                              : clamp_probability(raw);
}

nlohmann::json FittedModel::to_json() const {
  nlohmann::json j;
  j["model"] = model_name(kind);
  j["standardization"] = mspi::to_json(standardization);
  j["base_rate"] = base_rate ? nlohmann::json(*base_rate) : nlohmann::json(nullptr);
  std::visit([&](const auto& m) { j["fit"] = mspi::to_json(m); }, model);
  return j;
}

FittedModel fit_model(ModelKind kind, const Hyper& hyper, const Matrix& X,
                      std::span<const int> y, std::uint64_t seed) {
  if (X.rows() != y.size()) throw DataError("fit_model: rows and targets differ");
  FittedModel fm;
  fm.kind = kind;
  fm.standardization = standardize_fit(X);
  if (single_class(y)) {
    fm.base_rate = base_rate_of(y);
    fm.model = base_rate_model(y, fm.standardization.output_dim(),
                               kind == ModelKind::l1_logit ? Penalty::l1 : Penalty::l2, hyper.lambda);
    return fm;
  }
  const Matrix Z = standardize_apply(fm.standardization, X);
  switch (kind) {
    case ModelKind::l1_logit: fm.model = fit_logit_l1(Z, y, hyper.lambda); break;
    case ModelKind::l2_logit: fm.model = fit_logit_l2(Z, y, hyper.lambda); break;
    case ModelKind::random_forest: fm.model = fit_random_forest(Z, y, hyper.forest, seed, 1); break;
    case ModelKind::gradient_boosting: fm.model = fit_gradient_boosting(Z, y, hyper.boost); break;
  }
  return fm;
}

CvResult forward_chain_cv(ModelKind kind, const std::vector<Hyper>& grid, const Matrix& X,
                          std::span<const int> y, std::size_t folds, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError(fmt::format("{}: empty hyperparameter grid", model_name(kind)));
  if (folds == 0) throw ConfigError("cv_folds: must be positive");
  const std::size_t n = X.rows();
  if (y.size() != n) throw DataError("forward_chain_cv: rows and targets differ");
  const std::size_t seg = n / (folds + 1);
  if (seg < 6)
    throw DataError(fmt::format("forward_chain_cv: {} rows give validation segments of {} < 6 months",
                                n, seg));
  CvResult out;
  std::vector<double> total(grid.size(), 0.0);
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t train_end = (k + 1) * seg;
    const std::size_t val_end = k + 1 == folds ? n : (k + 2) * seg;
    const auto ytr = y.subspan(0, train_end);
    if (single_class(ytr)) {
      out.warnings.push_back(fmt::format("{} cv fold {}: single-class training prefix, skipped",
                                         model_name(kind), k));
      continue;
    }
    const Matrix Xtr = take_rows(X, 0, train_end);
    ++out.folds_used;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const FittedModel fm =
          fit_model(kind, grid[g], Xtr, ytr, mix_seed(seed, kind_index(kind) + 1, k * 1000 + g));
      double loss = 0.0;
      for (std::size_t i = train_end; i < val_end; ++i) {
        const double p = fm.native_probability(fm.raw_score(X.row(i)));
        loss -= y[i] ? std::log(p) : std::log1p(-p);
      }
      total[g] += loss / static_cast<double>(val_end - train_end);
    }
  }
  if (out.folds_used == 0)
    throw DataError(fmt::format("{} cv: every fold had a single-class training prefix",
                                model_name(kind)));
  out.mean_loss.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.mean_loss[g] = total[g] / static_cast<double>(out.folds_used);
    if (out.mean_loss[g] < out.mean_loss[out.selected]) out.selected = g;
  }
  return out;
}

std::vector<ModelKind> ForecastSeries::models() const {
  std::vector<ModelKind> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

std::vector<ForecastRecord> ForecastSeries::of(ModelKind kind) const {
  std::vector<ForecastRecord> out;
  for (const auto& r : records)
    if (r.model == kind) out.push_back(r);
  return out;
}

namespace {

struct MonthResult {
  std::vector<ForecastRecord> records;
  std::vector<std::string> warnings;
  std::vector<FittedModel> models;
  std::vector<CalibrationMap> maps;
};

}  // namespace

BacktestOutput run_expanding_backtest(const FeatureMatrix& features, const LabelSeries& labels,
                                      const BacktestConfig& config) {
  return run_expanding_backtest(assemble_modeling_data(features, labels), config);
}

BacktestOutput run_expanding_backtest(const ModelingData& data, const BacktestConfig& config) {
  config.validate();
  const std::size_t W = config.initial_window_months;
  if (data.size() < W + 1)
    throw DataError(fmt::format("backtest: {} labeled months; need at least {}", data.size(), W + 1));
  const std::size_t K = data.size() - 1;

  BacktestOutput out;
  out.series.seed = config.seed;

  // Hyperparameters from the initial window, then frozen.
  std::vector<Hyper> chosen;
  for (ModelKind kind : config.models) {
    const auto grid = config.grid(kind);
    const Matrix& X = data.design(kind, config.benchmark_market_controls);
    ModelSelection sel;
    sel.model = kind;
    sel.cv = forward_chain_cv(kind, grid, take_rows(X, 0, W),
                              std::span<const int>(data.target).subspan(0, W), config.cv_folds,
                              mix_seed(config.seed, 0xC5));
    sel.grid_index = sel.cv.selected;
    sel.hyper = grid[sel.grid_index];
    out.series.warnings.insert(out.series.warnings.end(), sel.cv.warnings.begin(),
                               sel.cv.warnings.end());
    chosen.push_back(sel.hyper);
    out.series.selections.push_back(std::move(sel));
  }

  std::vector<MonthResult> results(K - W + 1);
  parallel_for(results.size(), config.threads, [&](std::size_t slot) {
    const std::size_t j = W + slot;
    MonthResult& res = results[slot];
    const std::string month = format_year_month(data.months[j]);
    const auto key = static_cast<std::uint64_t>(month_key(data.months[j]));
    const auto y = std::span<const int>(data.target).subspan(0, j);
    for (std::size_t m = 0; m < config.models.size(); ++m) {
      const ModelKind kind = config.models[m];
      const Matrix& X = data.design(kind, config.benchmark_market_controls);
      const Matrix Xtr = take_rows(X, 0, j);
      ForecastRecord rec;
      rec.month = data.months[j];
      rec.model = kind;
      rec.y_next = data.y_next[j];
      rec.next_vol = data.next_vol[j];
      rec.next_ret = data.next_ret[j];
      rec.train_rows = j;
      CalibrationMap map;
      map.scale = raw_scale(kind);
      try {
        FittedModel fm = fit_model(kind, chosen[m], Xtr, y, mix_seed(config.seed, kind_index(kind) + 1, key));
        if (fm.base_rate)
          res.warnings.push_back(fmt::format("{} {}: single-class training window, base rate used",
                                             month, model_name(kind)));
        rec.raw_score = fm.raw_score(X.row(j));
        if (kind == ModelKind::random_forest || kind == ModelKind::gradient_boosting) {
          const std::size_t cal = std::max(
              config.min_calibration_months,
              static_cast<std::size_t>(std::ceil(config.calibration_fraction * static_cast<double>(j))));
          if (cal + 2 > j) {
            map.fallback = true;
            res.warnings.push_back(fmt::format("{} {}: window too short to calibrate", month,
                                               model_name(kind)));
          } else {
            const std::size_t head = j - cal;
            const FittedModel sub = fit_model(kind, chosen[m], take_rows(X, 0, head), y.subspan(0, head),
                                              mix_seed(config.seed, kind_index(kind) + 17, key));
            std::vector<double> s(cal);
            for (std::size_t i = 0; i < cal; ++i) s[i] = sub.raw_score(X.row(head + i));
            map = fit_platt(s, y.subspan(head, cal), raw_scale(kind));
            if (map.fallback)
              res.warnings.push_back(fmt::format("{} {}: single-class calibration segment, identity map",
                                                 month, model_name(kind)));
          }
          rec.probability = calibrate(map, rec.raw_score);
        } else {
          rec.probability = fm.native_probability(rec.raw_score);
        }
        if (j == K) {
          res.models.push_back(std::move(fm));
          res.maps.push_back(map);
        }
      } catch (const NumericError& e) {
        const double p = base_rate_of(y);
        rec.raw_score = kind == ModelKind::gradient_boosting ? logit(p) : p;
        rec.probability = p;
        res.warnings.push_back(fmt::format("{} {}: fit failed ({}), base rate used", month,
                                           model_name(kind), e.what()));
      }
      res.records.push_back(rec);
    }
  });

  for (auto& r : results) {
    out.series.records.insert(out.series.records.end(), r.records.begin(), r.records.end());
    out.series.warnings.insert(out.series.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  out.final_models = std::move(results.back().models);
  out.final_calibration = std::move(results.back().maps);
  return out;
}

}  // namespace mspi
