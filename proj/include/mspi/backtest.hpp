#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mspi/date.hpp"
#include "mspi/features.hpp"
#include "mspi/labeling.hpp"
#include "mspi/learners/boost.hpp"
#include "mspi/learners/forest.hpp"
#include "mspi/learners/logit.hpp"
#include "mspi/learners/platt.hpp"
#include "mspi/learners/standardize.hpp"
#include "mspi/matrix.hpp"

namespace mspi {

enum class ModelKind { l1_logit, l2_logit, random_forest, gradient_boosting };

std::string_view model_name(ModelKind kind);
std::optional<ModelKind> parse_model(std::string_view name);
/// Scale of the model's raw score (log-odds only for boosting).
ScoreScale raw_scale(ModelKind kind);

/// One candidate from a model's search grid. Only the member matching the
/// model kind is used.
struct Hyper {
  double lambda = 0.0;
  ForestParams forest;
  BoostParams boost;
};

nlohmann::json hyper_to_json(ModelKind kind, const Hyper& h);

/// n log-spaced values from hi down to lo (largest penalty first).
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct BacktestConfig {
  std::size_t initial_window_months = 120;
  std::size_t cv_folds = 5;
  std::vector<double> l1_lambdas = log_grid(1e-4, 1.0, 20);
  std::vector<double> l2_lambdas = log_grid(1e-4, 1.0, 20);
  std::vector<ForestParams> rf_grid{{500, 3, 5, 0, true}, {500, 5, 5, 0, true}, {500, 8, 5, 0, true}};
  std::vector<BoostParams> gb_grid{{50, 0.1, 2, 5}, {100, 0.1, 2, 5}, {200, 0.1, 2, 5}, {400, 0.1, 2, 5}};
  std::vector<ModelKind> models{ModelKind::l1_logit, ModelKind::l2_logit,
                                ModelKind::random_forest, ModelKind::gradient_boosting};
  /// The ridge benchmark uses (R_t, sigma_t) instead of the fragility features.
  bool benchmark_market_controls = true;
  /// Calibration segment: the last max(min_calibration_months,
  /// ceil(calibration_fraction * n)) training rows.
  double calibration_fraction = 0.2;
  std::size_t min_calibration_months = 12;
  std::uint64_t seed = 7;
  unsigned threads = 1;

  void validate() const;
  /// Grid of `kind`, ordered simplest first: larger penalty, shallower
  /// forest, fewer boosting stages. CV ties go to the earliest entry.
  std::vector<Hyper> grid(ModelKind kind) const;
};

/// Training pairs (X_{m_i}, S_{m_{i+1}}) over the labeled months m_0 .. m_K.
struct ModelingData {
  std::vector<YearMonth> months;  // m_0 .. m_K
  Matrix fragility;               // features of each m_i
  Matrix market;                  // (R_{m_i}, sigma_{m_i})
  std::vector<int> target;        // S_{m_{i+1}}, K entries
  std::vector<std::optional<int>> y_next;
  std::vector<double> next_vol;   // NaN when month m_i + 1 is unknown
  std::vector<double> next_ret;

  std::size_t size() const { return months.size(); }
  const Matrix& design(ModelKind kind, bool benchmark_market_controls) const;
};

/// Throws DataError when a labeled month has no feature row.
ModelingData assemble_modeling_data(const FeatureMatrix& features, const LabelSeries& labels);

/// A fitted model with its within-window standardization.
struct FittedModel {
  ModelKind kind = ModelKind::l1_logit;
  StandardizationParams standardization;
  std::variant<LogitModel, ForestModel, BoostModel> model;
  /// Training targets had one class: every raw score is this base rate
  /// (or its logit for boosting).
  std::optional<double> base_rate;

  /// Raw score of an unstandardized feature row.
  double raw_score(std::span<const double> x) const;
  /// Uncalibrated probability implied by the raw score.
  double native_probability(double raw) const;
  nlohmann::json to_json() const;
};

FittedModel fit_model(ModelKind kind, const Hyper& hyper, const Matrix& X,
                      std::span<const int> y, std::uint64_t seed);

struct CvResult {
  std::size_t selected = 0;
  std::vector<double> mean_loss;  // per grid entry, NaN if every fold was skipped
  std::size_t folds_used = 0;
  std::vector<std::string> warnings;
};

/// Forward-chaining CV: with seg = n / (folds + 1), fold k trains on rows
/// [0, (k+1) seg) and validates on [(k+1) seg, (k+2) seg), the last fold
/// running to n. Minimizes mean validation log loss on native probabilities.
CvResult forward_chain_cv(ModelKind kind, const std::vector<Hyper>& grid, const Matrix& X,
                          std::span<const int> y, std::size_t folds, std::uint64_t seed);

struct ForecastRecord {
  YearMonth month;
  ModelKind model = ModelKind::l1_logit;
  double raw_score = 0.0;
  double probability = 0.0;
  std::optional<int> y_next;
  double next_vol = 0.0;
  double next_ret = 0.0;
  std::size_t train_rows = 0;
};

struct ModelSelection {
  ModelKind model = ModelKind::l1_logit;
  std::size_t grid_index = 0;
  Hyper hyper;
  CvResult cv;
};

struct ForecastSeries {
  /// Month-major, models in config order within a month.
  std::vector<ForecastRecord> records;
  std::vector<ModelSelection> selections;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::vector<ModelKind> models() const;
  /// Records of one model in month order.
  std::vector<ForecastRecord> of(ModelKind kind) const;
};

struct BacktestOutput {
  ForecastSeries series;
  /// Models fitted at the last forecast month, for audit.
  std::vector<FittedModel> final_models;
  std::vector<CalibrationMap> final_calibration;
};

/// Expanding-window backtest. At modeling month j >= initial window the
/// models train on pairs 0 .. j-1, so the label of m_j is the newest
/// information used, and forecast S_{m_{j+1}} from X_{m_j}.
BacktestOutput run_expanding_backtest(const FeatureMatrix& features, const LabelSeries& labels,
                                      const BacktestConfig& config);
BacktestOutput run_expanding_backtest(const ModelingData& data, const BacktestConfig& config);

}  // namespace mspi
