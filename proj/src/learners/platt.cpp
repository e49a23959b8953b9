#include "mspi/learners/platt.hpp"

#include <cmath>
#include <vector>

#include "mspi/error.hpp"
#include "mspi/learners/logit.hpp"

namespace mspi {

double platt_input(ScoreScale scale, double score) {
  return scale == ScoreScale::probability ? logit(clamp_probability(score)) : score;
}

CalibrationMap fit_platt(std::span<const double> raw_scores, std::span<const int> y,
                         ScoreScale scale) {
  if (raw_scores.size() != y.size() || raw_scores.empty())
    throw DataError("fit_platt: scores and targets must match and be non-empty");
  double n_pos = 0.0, n_neg = 0.0;
  std::vector<double> scores(raw_scores.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(raw_scores[i])) throw DataError("fit_platt: non-finite score");
    if (scale == ScoreScale::probability && !(raw_scores[i] >= 0.0 && raw_scores[i] <= 1.0))
      throw DataError("fit_platt: probability score outside [0, 1]");
    scores[i] = platt_input(scale, raw_scores[i]);
    (y[i] == 1 ? n_pos : n_neg) += 1.0;
  }
  CalibrationMap map;
  map.scale = scale;
  if (n_pos == 0.0 || n_neg == 0.0) {
    map.fallback = true;
    return map;
  }

  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  const double n = static_cast<double>(y.size());
  auto target = [&](std::size_t i) { return y[i] == 1 ? hi : lo; };
  // Mean negative log-likelihood of Lambda(a s + b) against smoothed targets.
  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double z = a * scores[i] + b;
      const double sp = std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
      f += sp - target(i) * z;
    }
    return f / n;
  };

  double a = 0.0;
  double b = std::log((n_pos + 1.0) / (n_neg + 1.0));
  double f = objective(a, b);
  constexpr double kRidge = 1e-12;
  for (int iter = 0; iter < 200; ++iter) {
    double ga = 0.0, gb = 0.0, haa = kRidge, hab = 0.0, hbb = kRidge;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s = scores[i];
      const double p = sigmoid(a * s + b);
      const double r = p - target(i);
      const double w = p * (1.0 - p);
      ga += r * s;
      gb += r;
      haa += w * s * s / n;
      hab += w * s / n;
      hbb += w / n;
    }
    ga /= n;
    gb /= n;
    if (std::fabs(ga) < 1e-12 && std::fabs(gb) < 1e-12) break;
    const double det = haa * hbb - hab * hab;
    if (!(det > 0.0)) break;
    const double da = (hbb * ga - hab * gb) / det;
    const double db = (haa * gb - hab * ga) / det;
    const double decrease = ga * da + gb * db;  // > 0 along a descent direction
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 60 && !moved; ++k, t *= 0.5) {
      const double na = a - t * da, nb = b - t * db;
      const double nf = objective(na, nb);
      if (nf <= f - 1e-4 * t * decrease) {
        moved = nf < f;
        a = na;
        b = nb;
        f = nf;
      }
    }
    if (!moved) break;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) throw NumericError("fit_platt: non-finite map");
  map.slope = a;
  map.offset = b;
  return map;
}

double calibrate(const CalibrationMap& map, double score) {
  if (map.fallback)
    return clamp_probability(map.scale == ScoreScale::log_odds ? sigmoid(score) : score);
  return clamp_probability(sigmoid(map.slope * platt_input(map.scale, score) + map.offset));
}

}  // namespace mspi
