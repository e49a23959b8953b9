#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mspi/date.hpp"

namespace mspi {

/// Index of a security in DailyPanel::security_ids(). Ids are stored in
/// lexicographic order, so ordering by index equals ordering by id.
using SecurityIndex = std::uint32_t;

/// One stock on one trading day. The date is the key of the enclosing day.
/// vol and shrout are NaN when missing in the source.
struct DailyObservation {
  SecurityIndex security = 0;
  double ret = 0.0;
  double prc = 0.0;
  double vol = 0.0;
  double shrout = 0.0;
  bool share_class_ok = true;
  bool exchange_ok = true;
};

struct EligibilityFilter {
  double min_abs_price = 1.0;
  bool require_share_class = true;
  bool require_exchange = true;

  void validate() const;
};

struct IngestSummary {
  std::size_t rows_read = 0;
  std::size_t rows_retained = 0;
  std::size_t dropped_missing_ret = 0;
  std::size_t dropped_missing_prc = 0;
  std::size_t dropped_low_price = 0;
  std::size_t dropped_share_class = 0;
  std::size_t dropped_exchange = 0;

  std::size_t rows_dropped() const { return rows_read - rows_retained; }
  nlohmann::json to_json() const;
};

/// Filtered daily cross-sections, immutable after construction.
class DailyPanel {
 public:
  DailyPanel() = default;
  /// Validates: ids sorted and unique, dates strictly increasing, each day
  /// non-empty, sorted by security with no duplicate security.
  DailyPanel(std::vector<std::string> security_ids, std::vector<Date> dates,
             std::vector<std::vector<DailyObservation>> days);

  const std::vector<std::string>& security_ids() const { return security_ids_; }
  const std::vector<Date>& dates() const { return dates_; }
  std::size_t num_days() const { return dates_.size(); }
  std::span<const DailyObservation> day(std::size_t i) const { return days_[i]; }
  /// N_d for the i-th date.
  std::size_t count(std::size_t i) const { return days_[i].size(); }
  std::size_t total_observations() const;
  std::optional<std::size_t> find_date(const Date& d) const;

 private:
  std::vector<std::string> security_ids_;
  std::vector<Date> dates_;
  std::vector<std::vector<DailyObservation>> days_;
};

struct PanelLoad {
  DailyPanel panel;
  IngestSummary summary;
};

/// Reads `date,security_id,ret,prc,vol,shrout,shrcd_ok,exchcd_ok`.
PanelLoad load_daily_panel(const std::string& path, const EligibilityFilter& filter);

/// Re-applies a filter to an in-memory panel (used for idempotence checks
/// and for tightening a filter without re-reading the file).
PanelLoad apply_filter(const DailyPanel& panel, const EligibilityFilter& filter);

/// Reason a row fails the filter, or nullopt when it passes.
enum class DropReason { missing_ret, missing_prc, low_price, share_class, exchange };
std::optional<DropReason> check_eligibility(double ret, double prc, bool share_class_ok,
                                            bool exchange_ok, const EligibilityFilter& filter);

class MarketSeries {
 public:
  MarketSeries() = default;
  /// Sorts by date; rejects duplicate dates and non-finite returns.
  MarketSeries(std::vector<Date> dates, std::vector<double> returns);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<double>& returns() const { return returns_; }
  std::size_t size() const { return dates_.size(); }
  std::optional<double> find(const Date& d) const;

 private:
  std::vector<Date> dates_;
  std::vector<double> returns_;
};

/// Reads `date,mkt_ret`.
MarketSeries load_market_series(const std::string& path);

struct MonthBucket {
  YearMonth month;
  std::vector<Date> days;  // D_t = days.size() >= 1
};

struct MonthPartition {
  std::vector<MonthBucket> months;

  std::size_t size() const { return months.size(); }
  std::optional<std::size_t> find(const YearMonth& m) const;
};

/// Calendar-month buckets of the panel's trading days. Every panel date must
/// appear in the market series.
MonthPartition partition_months(const DailyPanel& panel, const MarketSeries& market);

void write_panel_csv(const std::string& path, const DailyPanel& panel,
                     const std::string& header_comment = {});
void write_market_csv(const std::string& path, const MarketSeries& market,
                      const std::string& header_comment = {});

}  // namespace mspi
