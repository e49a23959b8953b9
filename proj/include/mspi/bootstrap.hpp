#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mspi {

enum class Metric { auc, pr_auc, brier, log_loss, ece };

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);
const std::vector<Metric>& all_metrics();

/// One model's out-of-sample output on the shared evaluation months.
struct ScoredSeries {
  std::vector<double> raw;
  std::vector<double> prob;
};

/// Metric on rows `idx` (with repetition). AUC and PR-AUC use raw scores,
/// the others probabilities. Throws UndefinedMetric when not defined.
double metric_on(Metric m, const ScoredSeries& s, std::span<const int> y,
                 std::span<const std::size_t> idx, std::size_t ece_bins = 10);

struct BootstrapOptions {
  std::size_t block_len = 12;
  std::size_t reps = 2000;
  std::uint64_t seed = 7;
  std::size_t ece_bins = 10;
  unsigned threads = 1;
  void validate() const;
};

struct BootstrapStat {
  Metric metric = Metric::auc;
  double delta = 0.0;  // mean over replications of metric(a) - metric(b)
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
  std::size_t redraws = 0;
};

/// Moving-block bootstrap of metric(a) - metric(b). Each replication draws
/// ceil(N / L) block starts uniformly on [0, N - L] from its own stream and
/// truncates to N months. A resample on which either metric is undefined is
/// redrawn; more redraws than replications is an error.
BootstrapStat block_bootstrap_diff(const ScoredSeries& a, const ScoredSeries& b,
                                   std::span<const int> y, Metric metric,
                                   const BootstrapOptions& options);

/// Resampled row indices for replication `rep`, attempt `attempt`.
std::vector<std::size_t> block_resample(std::size_t n, std::size_t block_len,
                                        std::uint64_t seed, std::size_t rep,
                                        std::size_t attempt);

/// Linear-interpolation percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace mspi
