#pragma once

#include <span>

namespace mspi {

/// Scale of the raw score fed to a calibration map.
enum class ScoreScale { probability, log_odds };

/// p = Lambda(slope * s + offset), where s is the raw score on the log-odds
/// scale: probability scores enter as logit(clamp(score)), so slope 1 and
/// offset 0 is the identity.
struct CalibrationMap {
  double slope = 1.0;
  double offset = 0.0;
  ScoreScale scale = ScoreScale::probability;
  bool fallback = false;  // segment had a single class: identity on probabilities
};

/// Platt scaling: maximum likelihood for (slope, offset) against Platt's
/// smoothed targets (N+ + 1) / (N+ + 2) and 1 / (N- + 2), by Newton's method
/// with backtracking (Lin, Lin & Weng 2007).
CalibrationMap fit_platt(std::span<const double> scores, std::span<const int> y,
                         ScoreScale scale = ScoreScale::probability);

/// Calibrated probability, clamped to [1e-12, 1 - 1e-12].
double calibrate(const CalibrationMap& map, double score);

/// The map's input for a raw score: logit(clamp(score)) or the score itself.
double platt_input(ScoreScale scale, double score);

}  // namespace mspi
