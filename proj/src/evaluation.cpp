#include "mspi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mspi/learners/logit.hpp"

namespace mspi {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw DataError(fmt::format("{}: {} values but {} outcomes", who, a, b));
  if (a == 0) throw UndefinedMetric(fmt::format("{}: empty input", who));
}

std::size_t positives(std::span<const int> y) {
  std::size_t k = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("outcomes must be 0/1");
    k += static_cast<std::size_t>(v);
  }
  return k;
}

// Row indices sorted by descending score; ties keep input order.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

void check_finite(std::span<const double> v, const char* who) {
  for (double s : v)
    if (!std::isfinite(s)) throw DataError(fmt::format("{}: non-finite score", who));
}

void check_probabilities(std::span<const double> v, const char* who) {
  for (double p : v)
    if (!(p >= 0.0 && p <= 1.0)) throw DataError(fmt::format("{}: probability {} outside [0, 1]", who, p));
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> y) {
  check_sizes(scores.size(), y.size(), "auc");
  check_finite(scores, "auc");
  const std::size_t n = y.size(), n_pos = positives(y), n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("auc: needs both classes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of positive midranks, kept as twice the rank to stay in integers.
  std::size_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) pos_in_group += y[order[j++]];
    twice_rank_sum += pos_in_group * (i + 1 + j);  // midrank = (i + 1 + j) / 2
    i = j;
  }
  const double u = static_cast<double>(twice_rank_sum) * 0.5 -
                   static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) * 0.5;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pr_auc(std::span<const double> scores, std::span<const int> y) {
  check_sizes(scores.size(), y.size(), "pr_auc");
  check_finite(scores, "pr_auc");
  const std::size_t n_pos = positives(y);
  if (n_pos == 0) throw UndefinedMetric("pr_auc: no positives");
  const auto order = descending(scores);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i, group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) group_pos += y[order[j++]];
    tp += group_pos;
    seen += j - i;
    ap += static_cast<double>(group_pos) * static_cast<double>(tp) / static_cast<double>(seen);
    i = j;
  }
  return ap / static_cast<double>(n_pos);
}

double brier(std::span<const double> probs, std::span<const int> y) {
  check_sizes(probs.size(), y.size(), "brier");
  check_probabilities(probs, "brier");
  positives(y);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = probs[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

double log_loss(std::span<const double> probs, std::span<const int> y) {
  check_sizes(probs.size(), y.size(), "log_loss");
  positives(y);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = clamp_probability(probs[i]);
    s -= y[i] ? std::log(p) : std::log1p(-p);
  }
  return s / static_cast<double>(y.size());
}

EceResult ece(std::span<const double> probs, std::span<const int> y, std::size_t n_bins) {
  check_sizes(probs.size(), y.size(), "ece");
  check_probabilities(probs, "ece");
  positives(y);
  if (n_bins == 0) throw ConfigError("ece: n_bins must be positive");
  const std::size_t n = y.size();
  if (n < n_bins)
    throw UndefinedMetric(fmt::format("ece: {} points is fewer than {} bins", n, n_bins));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probs[a] < probs[b];
  });
  EceResult out;
  const std::size_t q = n / n_bins, r = n % n_bins;
  std::size_t at = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t size = q + (b < r ? 1 : 0);
    double sp = 0.0, sy = 0.0;
    for (std::size_t k = at; k < at + size; ++k) {
      sp += probs[order[k]];
      sy += y[order[k]];
    }
    at += size;
    out.points.push_back({sp / static_cast<double>(size), sy / static_cast<double>(size), size});
  }
  out.value = ece_from_points(out.points);
  return out;
}

double ece_from_points(std::span<const CalibrationPoint> points) {
  std::size_t n = 0;
  for (const auto& p : points) n += p.count;
  if (n == 0) throw UndefinedMetric("ece: no points");
  double s = 0.0;
  for (const auto& p : points)
    s += static_cast<double>(p.count) * std::fabs(p.mean_prob - p.event_rate);
  return s / static_cast<double>(n);
}

std::vector<CurvePoint> roc_points(std::span<const double> scores, std::span<const int> y) {
  check_sizes(scores.size(), y.size(), "roc_points");
  check_finite(scores, "roc_points");
  const std::size_t n_pos = positives(y), n_neg = y.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("roc_points: needs both classes");
  const auto order = descending(scores);
  std::vector<CurvePoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (y[order[j]] ? tp : fp) += 1;
      ++j;
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return pts;
}

std::vector<CurvePoint> pr_points(std::span<const double> scores, std::span<const int> y) {
  check_sizes(scores.size(), y.size(), "pr_points");
  check_finite(scores, "pr_points");
  const std::size_t n_pos = positives(y), n_neg = y.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("pr_points: needs both classes");
  const auto order = descending(scores);
  std::vector<CurvePoint> pts{{0.0, 1.0}};
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) tp += y[order[j++]];
    seen += j - i;
    pts.push_back({static_cast<double>(tp) / static_cast<double>(n_pos),
                   static_cast<double>(tp) / static_cast<double>(seen)});
    i = j;
  }
  return pts;
}

double trapezoid_area(std::span<const CurvePoint> points) {
  double a = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    a += (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y) * 0.5;
  return a;
}

ModelMetrics model_metrics(const std::string& model, std::span<const double> raw_scores,
                           std::span<const double> probs, std::span<const int> y,
                           std::size_t ece_bins) {
  ModelMetrics m;
  m.model = model;
  m.auc = auc(raw_scores, y);
  m.pr_auc = pr_auc(raw_scores, y);
  m.brier = brier(probs, y);
  m.log_loss = log_loss(probs, y);
  m.ece = ece(probs, y, ece_bins).value;
  double s = 0.0;
  for (double p : probs) s += p;
  m.mean_prob = s / static_cast<double>(probs.size());
  return m;
}

std::vector<double> default_bin_edges() { return {0.0, 0.05, 0.10, 0.20, 0.40, 1.0}; }

void validate_bin_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw ConfigError("bin_edges: need at least two edges");
  if (edges.front() != 0.0 || edges.back() != 1.0)
    throw ConfigError("bin_edges: must start at 0 and end at 1");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw ConfigError("bin_edges: must be strictly increasing");
}

std::vector<OutcomeBin> binned_outcomes(std::span<const double> probs, std::span<const int> y,
                                        std::span<const double> next_vol,
                                        std::span<const double> next_ret,
                                        std::span<const double> edges) {
  validate_bin_edges(edges);
  const std::size_t n = probs.size();
  if (y.size() != n || next_vol.size() != n || next_ret.size() != n)
    throw DataError("binned_outcomes: input lengths differ");
  const std::size_t nb = edges.size() - 1;
  std::vector<OutcomeBin> bins(nb);
  std::vector<double> sp(nb, 0.0), sy(nb, 0.0), sv(nb, 0.0), sr(nb, 0.0);
  std::vector<std::size_t> nv(nb, 0), nr(nb, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw DataError(fmt::format("binned_outcomes: probability {} outside [0, 1]", p));
    std::size_t b = static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), p) - edges.begin());
    b = std::min(b == 0 ? 0 : b - 1, nb - 1);
    ++bins[b].n;
    sp[b] += p;
    sy[b] += y[i];
    if (std::isfinite(next_vol[i])) sv[b] += next_vol[i], ++nv[b];
    if (std::isfinite(next_ret[i])) sr[b] += next_ret[i], ++nr[b];
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t b = 0; b < nb; ++b) {
    auto& bin = bins[b];
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    const double cnt = static_cast<double>(bin.n);
    bin.mean_prob = bin.n ? sp[b] / cnt : nan;
    bin.stress_rate = bin.n ? sy[b] / cnt : nan;
    bin.mean_next_vol = nv[b] ? sv[b] / static_cast<double>(nv[b]) : nan;
    bin.mean_next_ret = nr[b] ? sr[b] / static_cast<double>(nr[b]) : nan;
  }
  return bins;
}

}  // namespace mspi
