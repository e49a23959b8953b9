#include "mspi/artifacts.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "mspi/csv.hpp"
#include "mspi/error.hpp"

namespace mspi {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  return out;
}

void hash_line(std::ofstream& out, const std::string& hash) {
  if (!hash.empty()) out << "# config_hash: " << hash << '\n';
}

[[noreturn]] void bad_field(const csv::Reader& r, std::string_view column, const std::string& value) {
  throw DataError(fmt::format("'{}' line {} column '{}': bad value '{}'", r.path(), r.line(), column, value));
}

double number(const csv::Reader& r, const std::vector<std::string>& f, std::size_t c,
              std::string_view column) {
  const auto v = csv::parse_double(f[c]);
  if (!v) bad_field(r, column, f[c]);
  return *v;
}

double number_or_nan(const csv::Reader& r, const std::vector<std::string>& f, std::size_t c,
                     std::string_view column) {
  if (csv::is_missing(f[c])) return kNaN;
  return number(r, f, c, column);
}

std::optional<int> flag_or_missing(const csv::Reader& r, const std::vector<std::string>& f,
                                   std::size_t c, std::string_view column) {
  if (csv::is_missing(f[c])) return std::nullopt;
  const auto v = csv::parse_int(f[c]);
  if (!v || (*v != 0 && *v != 1)) bad_field(r, column, f[c]);
  return static_cast<int>(*v);
}

YearMonth month_field(const csv::Reader& r, const std::vector<std::string>& f, std::size_t c) {
  const auto m = parse_year_month(f[c]);
  if (!m) bad_field(r, "month", f[c]);
  return *m;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw DataError(fmt::format("missing input: {}", path));
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: invalid JSON ({})", path, e.what()));
  }
}

std::string csv_config_hash(const std::vector<std::string>& comments) {
  constexpr std::string_view key = "# config_hash: ";
  for (const auto& c : comments)
    if (c.starts_with(key)) return c.substr(key.size());
  return {};
}

void write_features_csv(const std::string& path, const FeatureMatrix& f, const std::string& hash) {
  auto out = open_out(path);
  hash_line(out, hash);
  out << "month";
  for (auto name : feature_names()) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < f.size(); ++r) {
    out << format_year_month(f.months[r]);
    for (std::size_t c = 0; c < kNumFeatures; ++c) out << ',' << csv::format_double(f.values(r, c));
    out << '\n';
  }
}

FeatureMatrix read_features_csv(const std::string& path) {
  require_file(path);
  csv::Reader r(path);
  const std::size_t c_month = r.require("month");
  std::array<std::size_t, kNumFeatures> cols{};
  for (std::size_t c = 0; c < kNumFeatures; ++c) cols[c] = r.require(feature_names()[c]);
  FeatureMatrix out;
  std::vector<std::string> f;
  std::vector<double> row(kNumFeatures);
  while (r.next(f)) {
    const YearMonth m = month_field(r, f, c_month);
    if (!out.months.empty() && !(m > out.months.back()))
      throw DataError(fmt::format("'{}' line {}: months must be strictly increasing", path, r.line()));
    for (std::size_t c = 0; c < kNumFeatures; ++c) {
      row[c] = number(r, f, cols[c], feature_names()[c]);
      if (!std::isfinite(row[c])) bad_field(r, feature_names()[c], f[cols[c]]);
    }
    out.months.push_back(m);
    out.values.append_row(row);
  }
  if (out.months.empty()) throw DataError(fmt::format("{}: no feature rows", path));
  return out;
}

void write_labels_csv(const std::string& path, const LabelSeries& labels, const std::string& hash) {
  auto out = open_out(path);
  hash_line(out, hash);
  out << "month,mkt_ret,mkt_vol,q_prev,stress,y_next,return_branch,vol_branch\n";
  for (const auto& row : labels.rows) {
    out << format_year_month(row.month) << ',' << csv::format_double(row.mkt_ret) << ','
        << csv::format_double(row.mkt_vol) << ',' << csv::format_optional(row.q_prev) << ','
        << (row.stress ? fmt::format("{}", *row.stress) : "") << ','
        << (row.y_next ? fmt::format("{}", *row.y_next) : "") << ','
        << (row.return_branch ? 1 : 0) << ',' << (row.vol_branch ? 1 : 0) << '\n';
  }
}

LabelSeries read_labels_csv(const std::string& path) {
  require_file(path);
  csv::Reader r(path);
  const std::size_t c_month = r.require("month"), c_ret = r.require("mkt_ret"),
                    c_vol = r.require("mkt_vol"), c_q = r.require("q_prev"),
                    c_s = r.require("stress"), c_y = r.require("y_next"),
                    c_rb = r.require("return_branch"), c_vb = r.require("vol_branch");
  LabelSeries out;
  std::vector<std::string> f;
  while (r.next(f)) {
    LabelRow row;
    row.month = month_field(r, f, c_month);
    if (!out.rows.empty() && !(row.month > out.rows.back().month))
      throw DataError(fmt::format("'{}' line {}: months must be strictly increasing", path, r.line()));
    row.mkt_ret = number(r, f, c_ret, "mkt_ret");
    row.mkt_vol = number(r, f, c_vol, "mkt_vol");
    if (!csv::is_missing(f[c_q])) row.q_prev = number(r, f, c_q, "q_prev");
    row.stress = flag_or_missing(r, f, c_s, "stress");
    row.y_next = flag_or_missing(r, f, c_y, "y_next");
    row.return_branch = flag_or_missing(r, f, c_rb, "return_branch").value_or(0) == 1;
    row.vol_branch = flag_or_missing(r, f, c_vb, "vol_branch").value_or(0) == 1;
    out.rows.push_back(row);
  }
  if (out.rows.empty()) throw DataError(fmt::format("{}: no label rows", path));
  return out;
}

std::string forecast_line(const ForecastRecord& r) {
  return fmt::format("{},{},{},{},{},{},{}", format_year_month(r.month), model_name(r.model),
                     csv::format_double(r.raw_score), csv::format_double(r.probability),
                     r.y_next ? fmt::format("{}", *r.y_next) : "", csv::format_double(r.next_vol),
                     csv::format_double(r.next_ret));
}

void write_forecasts_csv(const std::string& path, const ForecastSeries& s) {
  auto out = open_out(path);
  hash_line(out, s.config_hash);
  out << "month,model,raw_score,probability,y_next,next_vol,next_ret\n";
  for (const auto& r : s.records) out << forecast_line(r) << '\n';
}

ForecastSeries read_forecasts_csv(const std::string& path) {
  require_file(path);
  csv::Reader r(path);
  const std::size_t c_month = r.require("month"), c_model = r.require("model"),
                    c_raw = r.require("raw_score"), c_p = r.require("probability"),
                    c_y = r.require("y_next"), c_v = r.require("next_vol"),
                    c_r = r.require("next_ret");
  ForecastSeries out;
  out.config_hash = csv_config_hash(r.comments());
  std::vector<std::string> f;
  while (r.next(f)) {
    ForecastRecord rec;
    rec.month = month_field(r, f, c_month);
    const auto kind = parse_model(f[c_model]);
    if (!kind) bad_field(r, "model", f[c_model]);
    rec.model = *kind;
    rec.raw_score = number(r, f, c_raw, "raw_score");
    rec.probability = number(r, f, c_p, "probability");
    if (!(rec.probability > 0.0 && rec.probability < 1.0)) bad_field(r, "probability", f[c_p]);
    rec.y_next = flag_or_missing(r, f, c_y, "y_next");
    rec.next_vol = number_or_nan(r, f, c_v, "next_vol");
    rec.next_ret = number_or_nan(r, f, c_r, "next_ret");
    out.records.push_back(rec);
  }
  if (out.records.empty()) throw DataError(fmt::format("{}: no forecast rows", path));
  return out;
}

TrueRegime read_true_regime_csv(const std::string& path) {
  require_file(path);
  csv::Reader r(path);
  const std::size_t c_month = r.require("month"), c_s = r.require("stress");
  TrueRegime out;
  std::vector<std::string> f;
  while (r.next(f)) {
    out.months.push_back(month_field(r, f, c_month));
    const auto s = flag_or_missing(r, f, c_s, "stress");
    if (!s) bad_field(r, "stress", f[c_s]);
    out.stress.push_back(*s);
  }
  return out;
}

json to_json(const ModelMetrics& m) {
  return {{"model", m.model},       {"auc", m.auc},     {"pr_auc", m.pr_auc},
          {"brier", m.brier},       {"log_loss", m.log_loss}, {"ece", m.ece},
          {"mean_prob", m.mean_prob}};
}

json to_json(const OutcomeBin& b) {
  return {{"lo", b.lo},
          {"hi", b.hi},
          {"n", b.n},
          {"mean_prob", number_json(b.mean_prob)},
          {"stress_rate", number_json(b.stress_rate)},
          {"mean_next_vol", number_json(b.mean_next_vol)},
          {"mean_next_ret", number_json(b.mean_next_ret)}};
}

json to_json(const BootstrapStat& s) {
  return {{"metric", metric_name(s.metric)}, {"delta", s.delta},     {"ci_lo", s.ci_lo},
          {"ci_hi", s.ci_hi},                {"p_value", s.p_value}, {"redraws", s.redraws}};
}

json to_json(const RegressionResult& r) {
  json coef = json::array();
  for (std::size_t j = 0; j < r.coef.size(); ++j)
    coef.push_back({{"name", r.names[j]}, {"coef", r.coef[j]}, {"se", r.se[j]}, {"t", r.t_stat(j)}});
  return {{"coefficients", coef}, {"r2", r.r2},       {"n", r.n},
          {"hac_lag", r.hac_lag}, {"dropped", r.dropped}};
}

EvaluationSample evaluation_sample(const ForecastSeries& s, ModelKind kind) {
  EvaluationSample out;
  for (const auto& r : s.records) {
    if (r.model != kind || !r.y_next) continue;
    out.months.push_back(r.month);
    out.raw.push_back(r.raw_score);
    out.prob.push_back(r.probability);
    out.y.push_back(*r.y_next);
    out.next_vol.push_back(r.next_vol);
    out.next_ret.push_back(r.next_ret);
  }
  return out;
}

}  // namespace mspi
