#include "mspi/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "mspi/csv.hpp"
#include "mspi/error.hpp"

namespace mspi {

void EligibilityFilter::validate() const {
  if (!(min_abs_price >= 0.0) || !std::isfinite(min_abs_price))
    throw ConfigError("min_abs_price must be a finite value >= 0");
}

nlohmann::json IngestSummary::to_json() const {
  return {{"rows_read", rows_read},
          {"rows_retained", rows_retained},
          {"rows_dropped", rows_dropped()},
          {"dropped",
           {{"missing_ret", dropped_missing_ret},
            {"missing_prc", dropped_missing_prc},
            {"low_price", dropped_low_price},
            {"share_class", dropped_share_class},
            {"exchange", dropped_exchange}}}};
}

std::optional<DropReason> check_eligibility(double ret, double prc, bool share_class_ok,
                                            bool exchange_ok, const EligibilityFilter& filter) {
  if (!std::isfinite(ret)) return DropReason::missing_ret;
  if (!std::isfinite(prc)) return DropReason::missing_prc;
  if (std::fabs(prc) < filter.min_abs_price) return DropReason::low_price;
  if (filter.require_share_class && !share_class_ok) return DropReason::share_class;
  if (filter.require_exchange && !exchange_ok) return DropReason::exchange;
  return std::nullopt;
}

namespace {

void count_drop(IngestSummary& s, DropReason r) {
  switch (r) {
    case DropReason::missing_ret: ++s.dropped_missing_ret; break;
    case DropReason::missing_prc: ++s.dropped_missing_prc; break;
    case DropReason::low_price: ++s.dropped_low_price; break;
    case DropReason::share_class: ++s.dropped_share_class; break;
    case DropReason::exchange: ++s.dropped_exchange; break;
  }
}

}  // namespace

DailyPanel::DailyPanel(std::vector<std::string> security_ids, std::vector<Date> dates,
                       std::vector<std::vector<DailyObservation>> days)
    : security_ids_(std::move(security_ids)), dates_(std::move(dates)), days_(std::move(days)) {
  if (dates_.size() != days_.size()) throw DataError("panel: dates and days differ in length");
  for (std::size_t i = 1; i < security_ids_.size(); ++i)
    if (!(security_ids_[i - 1] < security_ids_[i]))
      throw DataError("panel: security ids must be sorted and unique");
  for (std::size_t i = 0; i < dates_.size(); ++i) {
    if (i > 0 && !(dates_[i - 1] < dates_[i]))
      throw DataError("panel: dates must be strictly increasing");
    const auto& day = days_[i];
    if (day.empty()) throw DataError("panel: empty day " + format_date(dates_[i]));
    for (std::size_t k = 0; k < day.size(); ++k) {
      if (day[k].security >= security_ids_.size())
        throw DataError("panel: security index out of range");
      if (k > 0 && !(day[k - 1].security < day[k].security))
        throw DataError(fmt::format("panel: duplicate or unsorted security '{}' on {}",
                                    security_ids_[day[k].security], format_date(dates_[i])));
    }
  }
}

std::size_t DailyPanel::total_observations() const {
  std::size_t n = 0;
  for (const auto& d : days_) n += d.size();
  return n;
}

std::optional<std::size_t> DailyPanel::find_date(const Date& d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

PanelLoad load_daily_panel(const std::string& path, const EligibilityFilter& filter) {
  filter.validate();
  csv::Reader reader(path);
  const std::size_t c_date = reader.require("date");
  const std::size_t c_id = reader.require("security_id");
  const std::size_t c_ret = reader.require("ret");
  const std::size_t c_prc = reader.require("prc");
  const std::size_t c_vol = reader.require("vol");
  const std::size_t c_shr = reader.require("shrout");
  const std::size_t c_cls = reader.require("shrcd_ok");
  const std::size_t c_exc = reader.require("exchcd_ok");

  auto fail = [&](const std::string& column, const std::string& why) -> DataError {
    return DataError(
        fmt::format("'{}' line {} column '{}': {}", path, reader.line(), column, why));
  };
  auto numeric = [&](const std::string& field, const char* column) -> double {
    if (csv::is_missing(field)) return std::nan("");
    auto v = csv::parse_double(field);
    if (!v) throw fail(column, fmt::format("not a number: '{}'", field));
    if (std::isinf(*v)) throw fail(column, "non-finite value");
    return *v;
  };

  struct Row {
    Date date;
    std::uint32_t id;
    DailyObservation obs;
  };
  std::vector<Row> rows;
  std::map<std::string, std::uint32_t> id_index;
  IngestSummary summary;

  std::vector<std::string> f;
  while (reader.next(f)) {
    ++summary.rows_read;
    auto date = parse_date(f[c_date]);
    if (!date) throw fail("date", fmt::format("not an ISO-8601 date: '{}'", f[c_date]));
    if (f[c_id].empty()) throw fail("security_id", "empty identifier");
    DailyObservation obs;
    obs.ret = numeric(f[c_ret], "ret");
    obs.prc = numeric(f[c_prc], "prc");
    obs.vol = numeric(f[c_vol], "vol");
    obs.shrout = numeric(f[c_shr], "shrout");
    if (obs.vol < 0) throw fail("vol", "negative volume");
    if (obs.shrout < 0) throw fail("shrout", "negative shares outstanding");
    auto cls = csv::parse_flag(f[c_cls]);
    if (!cls) throw fail("shrcd_ok", fmt::format("not a 0/1 flag: '{}'", f[c_cls]));
    auto exc = csv::parse_flag(f[c_exc]);
    if (!exc) throw fail("exchcd_ok", fmt::format("not a 0/1 flag: '{}'", f[c_exc]));
    obs.share_class_ok = *cls;
    obs.exchange_ok = *exc;

    if (auto why = check_eligibility(obs.ret, obs.prc, obs.share_class_ok, obs.exchange_ok,
                                     filter)) {
      count_drop(summary, *why);
      continue;
    }
    auto it = id_index.emplace(f[c_id], static_cast<std::uint32_t>(id_index.size())).first;
    rows.push_back({*date, it->second, obs});
  }
  summary.rows_retained = rows.size();
  if (rows.empty()) throw DataError(fmt::format("'{}': empty panel after filtering", path));

  // Arrival index -> lexicographic rank.
  std::vector<std::string> ids;
  ids.reserve(id_index.size());
  std::vector<SecurityIndex> rank(id_index.size());
  for (const auto& [name, arrival] : id_index) {
    rank[arrival] = static_cast<SecurityIndex>(ids.size());
    ids.push_back(name);
  }
  for (auto& r : rows) r.obs.security = rank[r.id];

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.date, a.obs.security) < std::tie(b.date, b.obs.security);
  });
  std::vector<Date> dates;
  std::vector<std::vector<DailyObservation>> days;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (dates.empty() || dates.back() != rows[i].date) {
      dates.push_back(rows[i].date);
      days.emplace_back();
    } else if (days.back().back().security == rows[i].obs.security) {
      throw DataError(fmt::format("'{}': duplicate observation for security '{}' on {}", path,
                                  ids[rows[i].obs.security], format_date(rows[i].date)));
    }
    days.back().push_back(rows[i].obs);
  }
  return {DailyPanel(std::move(ids), std::move(dates), std::move(days)), summary};
}

PanelLoad apply_filter(const DailyPanel& panel, const EligibilityFilter& filter) {
  filter.validate();
  IngestSummary summary;
  std::vector<Date> dates;
  std::vector<std::vector<DailyObservation>> days;
  for (std::size_t i = 0; i < panel.num_days(); ++i) {
    std::vector<DailyObservation> kept;
    for (const auto& o : panel.day(i)) {
      ++summary.rows_read;
      if (auto why = check_eligibility(o.ret, o.prc, o.share_class_ok, o.exchange_ok, filter)) {
        count_drop(summary, *why);
        continue;
      }
      kept.push_back(o);
    }
    if (!kept.empty()) {
      dates.push_back(panel.dates()[i]);
      days.push_back(std::move(kept));
    }
  }
  summary.rows_retained = summary.rows_read - (summary.dropped_missing_ret +
                                               summary.dropped_missing_prc +
                                               summary.dropped_low_price +
                                               summary.dropped_share_class +
                                               summary.dropped_exchange);
  if (dates.empty()) throw DataError("empty panel after filtering");
  return {DailyPanel(panel.security_ids(), std::move(dates), std::move(days)), summary};
}

MarketSeries::MarketSeries(std::vector<Date> dates, std::vector<double> returns) {
  if (dates.size() != returns.size()) throw DataError("market series: length mismatch");
  if (dates.empty()) throw DataError("market series: empty series");
  std::vector<std::size_t> order(dates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
  dates_.reserve(dates.size());
  returns_.reserve(dates.size());
  for (std::size_t k : order) {
    if (!std::isfinite(returns[k]))
      throw DataError("market series: non-finite return on " + format_date(dates[k]));
    if (!dates_.empty() && dates_.back() == dates[k])
      throw DataError("market series: duplicate date " + format_date(dates[k]));
    dates_.push_back(dates[k]);
    returns_.push_back(returns[k]);
  }
}

std::optional<double> MarketSeries::find(const Date& d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return returns_[static_cast<std::size_t>(it - dates_.begin())];
}

MarketSeries load_market_series(const std::string& path) {
  csv::Reader reader(path);
  const std::size_t c_date = reader.require("date");
  const std::size_t c_ret = reader.require("mkt_ret");
  std::vector<Date> dates;
  std::vector<double> rets;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto date = parse_date(f[c_date]);
    if (!date)
      throw DataError(fmt::format("'{}' line {} column 'date': not an ISO-8601 date: '{}'", path,
                                  reader.line(), f[c_date]));
    auto r = csv::parse_double(f[c_ret]);
    if (!r || !std::isfinite(*r))
      throw DataError(fmt::format("'{}' line {} column 'mkt_ret': non-finite or missing return",
                                  path, reader.line()));
    dates.push_back(*date);
    rets.push_back(*r);
  }
  if (dates.empty()) throw DataError(fmt::format("'{}': empty series", path));
  try {
    return MarketSeries(std::move(dates), std::move(rets));
  } catch (const DataError& e) {
    throw DataError(fmt::format("'{}': {}", path, e.what()));
  }
}

std::optional<std::size_t> MonthPartition::find(const YearMonth& m) const {
  auto it = std::lower_bound(months.begin(), months.end(), m,
                             [](const MonthBucket& b, const YearMonth& x) { return b.month < x; });
  if (it == months.end() || it->month != m) return std::nullopt;
  return static_cast<std::size_t>(it - months.begin());
}

MonthPartition partition_months(const DailyPanel& panel, const MarketSeries& market) {
  std::vector<std::string> missing;
  for (const auto& d : panel.dates())
    if (!market.find(d)) missing.push_back(format_date(d));
  if (!missing.empty()) {
    std::string listed;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i)
      listed += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) listed += fmt::format(" (+{} more)", missing.size() - 10);
    throw DataError("panel dates missing from market series: " + listed);
  }
  MonthPartition out;
  for (const auto& d : panel.dates()) {
    const YearMonth ym = month_of(d);
    if (out.months.empty() || out.months.back().month != ym) out.months.push_back({ym, {}});
    out.months.back().days.push_back(d);
  }
  return out;
}

void write_panel_csv(const std::string& path, const DailyPanel& panel,
                     const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "date,security_id,ret,prc,vol,shrout,shrcd_ok,exchcd_ok\n";
  for (std::size_t i = 0; i < panel.num_days(); ++i) {
    const std::string date = format_date(panel.dates()[i]);
    for (const auto& o : panel.day(i)) {
      out << date << ',' << panel.security_ids()[o.security] << ',' << csv::format_double(o.ret)
          << ',' << csv::format_double(o.prc) << ',' << csv::format_double(o.vol) << ','
          << csv::format_double(o.shrout) << ',' << (o.share_class_ok ? 1 : 0) << ','
          << (o.exchange_ok ? 1 : 0) << '\n';
    }
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path));
}

void write_market_csv(const std::string& path, const MarketSeries& market,
                      const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "date,mkt_ret\n";
  for (std::size_t i = 0; i < market.size(); ++i)
    out << format_date(market.dates()[i]) << ',' << csv::format_double(market.returns()[i])
        << '\n';
  if (!out) throw DataError(fmt::format("write failed for '{}'", path));
}

}  // namespace mspi
