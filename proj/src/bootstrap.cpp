#include "mspi/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mspi/evaluation.hpp"
#include "mspi/parallel.hpp"
#include "mspi/rng.hpp"

namespace mspi {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::auc: return "auc";
    case Metric::pr_auc: return "pr_auc";
    case Metric::brier: return "brier";
    case Metric::log_loss: return "log_loss";
    case Metric::ece: return "ece";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : all_metrics())
    if (metric_name(m) == name) return m;
  return std::nullopt;
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> m{Metric::auc, Metric::pr_auc, Metric::brier,
                                     Metric::log_loss, Metric::ece};
  return m;
}

double metric_on(Metric m, const ScoredSeries& s, std::span<const int> y,
                 std::span<const std::size_t> idx, std::size_t ece_bins) {
  std::vector<double> v(idx.size());
  std::vector<int> yy(idx.size());
  const bool raw = m == Metric::auc || m == Metric::pr_auc;
  const auto& src = raw ? s.raw : s.prob;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    v[k] = src[idx[k]];
    yy[k] = y[idx[k]];
  }
  switch (m) {
    case Metric::auc: return auc(v, yy);
    case Metric::pr_auc: return pr_auc(v, yy);
    case Metric::brier: return brier(v, yy);
    case Metric::log_loss: return log_loss(v, yy);
    case Metric::ece: return ece(v, yy, ece_bins).value;
  }
  return 0.0;
}

void BootstrapOptions::validate() const {
  if (block_len == 0) throw ConfigError("bootstrap_block: must be positive");
  if (reps == 0) throw ConfigError("bootstrap_reps: must be positive");
  if (ece_bins == 0) throw ConfigError("ece_bins: must be positive");
}

std::vector<std::size_t> block_resample(std::size_t n, std::size_t block_len,
                                        std::uint64_t seed, std::size_t rep,
                                        std::size_t attempt) {
  Rng rng = Rng::stream(seed, rep, attempt);
  const std::size_t blocks = (n + block_len - 1) / block_len;
  std::vector<std::size_t> idx;
  idx.reserve(blocks * block_len);
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t start = rng.index(n - block_len + 1);
    for (std::size_t l = 0; l < block_len; ++l) idx.push_back(start + l);
  }
  idx.resize(n);
  return idx;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return frac == 0.0 ? values[lo] : values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapStat block_bootstrap_diff(const ScoredSeries& a, const ScoredSeries& b,
                                   std::span<const int> y, Metric metric,
                                   const BootstrapOptions& options) {
  options.validate();
  const std::size_t n = y.size();
  if (a.raw.size() != n || a.prob.size() != n || b.raw.size() != n || b.prob.size() != n)
    throw DataError("bootstrap: series are not aligned with the outcomes");
  if (n < options.block_len)
    throw DataError(fmt::format("bootstrap: {} months is fewer than the block length {}", n,
                                options.block_len));

  std::vector<double> deltas(options.reps);
  std::vector<std::size_t> redraws(options.reps, 0);
  parallel_for(options.reps, options.threads, [&](std::size_t r) {
    for (std::size_t attempt = 0;; ++attempt) {
      // A single replication needing more attempts than there are
      // replications already breaks the redraw budget.
      if (attempt > options.reps) {
        redraws[r] = attempt;
        return;
      }
      const auto idx = block_resample(n, options.block_len, options.seed, r, attempt);
      try {
        deltas[r] = metric_on(metric, a, y, idx, options.ece_bins) -
                    metric_on(metric, b, y, idx, options.ece_bins);
        redraws[r] = attempt;
        return;
      } catch (const UndefinedMetric&) {
      }
    }
  });

  BootstrapStat out;
  out.metric = metric;
  for (std::size_t r : redraws) out.redraws += r;
  if (out.redraws > options.reps)
    throw DataError(fmt::format(
        "bootstrap {}: {} redraws for {} replications; the outcome is too rare for "
        "{}-month blocks",
        metric_name(metric), out.redraws, options.reps, options.block_len));

  double sum = 0.0;
  std::size_t le = 0, ge = 0;
  for (double d : deltas) {
    sum += d;
    le += d <= 0.0;
    ge += d >= 0.0;
  }
  const double reps = static_cast<double>(options.reps);
  out.delta = sum / reps;
  out.ci_lo = percentile(deltas, 0.025);
  out.ci_hi = percentile(deltas, 0.975);
  out.p_value = std::min(1.0, 2.0 * std::min(static_cast<double>(le), static_cast<double>(ge)) / reps);
  return out;
}

}  // namespace mspi
