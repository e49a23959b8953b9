#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mspi/backtest.hpp"
#include "mspi/bootstrap.hpp"
#include "mspi/econometrics.hpp"
#include "mspi/evaluation.hpp"
#include "mspi/features.hpp"
#include "mspi/labeling.hpp"

// Reading and writing the pipeline's CSV and JSON files. CSV artifacts start
// with a "# config_hash: <hex>" line; JSON artifacts carry a config_hash key.
namespace mspi {

/// Throws DataError naming the path when it does not exist.
void require_file(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);
/// Value of "# config_hash: ..." from a CSV's metadata, empty if absent.
std::string csv_config_hash(const std::vector<std::string>& comments);

void write_features_csv(const std::string& path, const FeatureMatrix& f, const std::string& hash);
FeatureMatrix read_features_csv(const std::string& path);

void write_labels_csv(const std::string& path, const LabelSeries& labels, const std::string& hash);
LabelSeries read_labels_csv(const std::string& path);

/// Columns: month, model, raw_score, probability, y_next, next_vol, next_ret.
void write_forecasts_csv(const std::string& path, const ForecastSeries& s);
ForecastSeries read_forecasts_csv(const std::string& path);
/// One CSV line per record (no header), as written by write_forecasts_csv.
std::string forecast_line(const ForecastRecord& r);

struct TrueRegime {
  std::vector<YearMonth> months;
  std::vector<int> stress;
};
TrueRegime read_true_regime_csv(const std::string& path);

nlohmann::json to_json(const ModelMetrics& m);
nlohmann::json to_json(const OutcomeBin& b);
nlohmann::json to_json(const BootstrapStat& s);
nlohmann::json to_json(const RegressionResult& r);

/// One model's outcome-observable forecasts, in month order.
struct EvaluationSample {
  std::vector<YearMonth> months;
  std::vector<double> raw;
  std::vector<double> prob;
  std::vector<int> y;
  std::vector<double> next_vol;
  std::vector<double> next_ret;
};
EvaluationSample evaluation_sample(const ForecastSeries& s, ModelKind kind);

}  // namespace mspi
