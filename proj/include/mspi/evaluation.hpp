#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mspi/error.hpp"

namespace mspi {

/// A metric that is not defined on the given outcomes (e.g. AUC with a
/// single class).
class UndefinedMetric : public DataError {
 public:
  using DataError::DataError;
};

/// Mann-Whitney AUC with ties counted one half (midranks).
double auc(std::span<const double> scores, std::span<const int> y);

/// Average precision over positives in descending score order. A group of
/// tied scores contributes its pooled precision once per positive it holds.
double pr_auc(std::span<const double> scores, std::span<const int> y);

/// Probabilities are clamped to [1e-12, 1 - 1e-12] first.
double brier(std::span<const double> probs, std::span<const int> y);
double log_loss(std::span<const double> probs, std::span<const int> y);

struct CalibrationPoint {
  double mean_prob = 0.0;
  double event_rate = 0.0;
  std::size_t count = 0;
};

struct EceResult {
  double value = 0.0;
  std::vector<CalibrationPoint> points;
};

/// Equal-mass bins after a stable sort on probability. With N = q * bins + r
/// the r lowest bins get one extra element.
EceResult ece(std::span<const double> probs, std::span<const int> y, std::size_t n_bins = 10);
double ece_from_points(std::span<const CalibrationPoint> points);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

/// (FPR, TPR) from (0, 0), one point per distinct score in descending order.
std::vector<CurvePoint> roc_points(std::span<const double> scores, std::span<const int> y);
/// (recall, precision) from (0, 1), one point per distinct score.
std::vector<CurvePoint> pr_points(std::span<const double> scores, std::span<const int> y);
double trapezoid_area(std::span<const CurvePoint> points);

struct ModelMetrics {
  std::string model;
  double auc = 0.0;
  double pr_auc = 0.0;
  double brier = 0.0;
  double log_loss = 0.0;
  double ece = 0.0;
  double mean_prob = 0.0;
};

/// AUC and PR-AUC on raw scores; the rest on probabilities.
ModelMetrics model_metrics(const std::string& model, std::span<const double> raw_scores,
                           std::span<const double> probs, std::span<const int> y,
                           std::size_t ece_bins = 10);

struct OutcomeBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  // NaN when the bin is empty
  double mean_prob = 0.0;
  double stress_rate = 0.0;
  double mean_next_vol = 0.0;
  double mean_next_ret = 0.0;
};

std::vector<double> default_bin_edges();
void validate_bin_edges(std::span<const double> edges);

/// Left-closed right-open bins, the last one closed. Rows whose next-month
/// outcome is NaN count in n but not in that outcome's mean.
std::vector<OutcomeBin> binned_outcomes(std::span<const double> probs, std::span<const int> y,
                                        std::span<const double> next_vol,
                                        std::span<const double> next_ret,
                                        std::span<const double> edges);

}  // namespace mspi
