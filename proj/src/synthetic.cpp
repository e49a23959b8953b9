#include "mspi/synthetic.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "mspi/error.hpp"
#include "mspi/rng.hpp"

namespace mspi {

namespace {

void check_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1]", field));
}

void check_regime(const RegimeParams& r, const std::string& name) {
  if (!std::isfinite(r.market_drift)) throw ConfigError(name + ".market_drift must be finite");
  if (!(r.market_vol >= 0.0) || !std::isfinite(r.market_vol))
    throw ConfigError(name + ".market_vol must be >= 0");
  if (!(r.dispersion > 0.0) || !std::isfinite(r.dispersion))
    throw ConfigError(name + ".dispersion must be > 0");
  check_probability(r.tail_prob, (name + ".tail_prob").c_str());
  if (!(r.volume_scale > 0.0)) throw ConfigError(name + ".volume_scale must be > 0");
}

}  // namespace

void SimConfig::validate() const {
  if (n_stocks < 2) throw ConfigError("n_stocks must be >= 2");
  if (n_years < 1) throw ConfigError("n_years must be >= 1");
  if (trading_days_per_year == 0 || trading_days_per_year % 12 != 0 ||
      trading_days_per_year / 12 > 28)
    throw ConfigError("trading_days_per_year must be a positive multiple of 12 and <= 336");
  if (start_year < 1 || start_year > 9000) throw ConfigError("start_year out of range");
  check_regime(calm, "calm");
  check_regime(stress, "stress");
  check_probability(p_calm_to_stress, "p_calm_to_stress");
  check_probability(p_stress_to_calm, "p_stress_to_calm");
  if (!(jump_size > -1.0 && jump_size < 0.0)) throw ConfigError("jump_size must lie in (-1, 0)");
}

SimOutput simulate(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t n_months = config.n_years * 12;
  const std::size_t days_per_month = config.trading_days_per_year / 12;

  // Security ids zero-padded so lexicographic order is numeric order.
  std::vector<std::string> ids(config.n_stocks);
  const int width = static_cast<int>(std::to_string(config.n_stocks).size());
  for (std::size_t i = 0; i < config.n_stocks; ++i) ids[i] = fmt::format("S{:0{}d}", i + 1, width);

  struct Stock {
    double beta;
    double price;
    double shares;
    double base_volume;
  };
  std::vector<Stock> stocks(config.n_stocks);
  for (auto& s : stocks) {
    s.beta = 0.5 + rng.uniform();
    s.price = std::exp(std::log(30.0) + 0.8 * rng.normal());
    s.shares = std::round(std::exp(std::log(5.0e7) + rng.normal()));
    s.base_volume = s.shares * 0.004 * std::exp(0.5 * rng.normal());
  }

  SimOutput out;
  out.months.reserve(n_months);
  out.true_regime.reserve(n_months);
  std::vector<Date> dates;
  std::vector<double> mkt;
  std::vector<std::vector<DailyObservation>> days;
  dates.reserve(n_months * days_per_month);
  days.reserve(n_months * days_per_month);

  bool stress = config.start_in_stress;
  for (std::size_t m = 0; m < n_months; ++m) {
    if (m > 0) {
      const double u = rng.uniform();
      stress = stress ? !(u < config.p_stress_to_calm) : (u < config.p_calm_to_stress);
    }
    const YearMonth ym = std::chrono::year{config.start_year + static_cast<int>(m / 12)} /
                         std::chrono::month{static_cast<unsigned>(m % 12 + 1)};
    out.months.push_back(ym);
    out.true_regime.push_back(stress);
    const RegimeParams& p = stress ? config.stress : config.calm;
    // 1-for-10 reverse split below $2 keeps most names above the price filter.
    for (auto& s : stocks) {
      if (s.price >= 2.0) continue;
      s.price *= 10.0;
      s.shares = std::round(s.shares / 10.0);
      s.base_volume /= 10.0;
    }

    for (std::size_t d = 0; d < days_per_month; ++d) {
      const Date date = ym / std::chrono::day{static_cast<unsigned>(d + 1)};
      const double m_ret = p.market_drift + p.market_vol * rng.normal();
      const double volume_shock = std::exp(0.25 * rng.normal());
      std::vector<DailyObservation> obs(config.n_stocks);
      for (std::size_t i = 0; i < config.n_stocks; ++i) {
        Stock& s = stocks[i];
        double r = s.beta * m_ret + p.dispersion * rng.normal();
        if (rng.bernoulli(p.tail_prob)) r += config.jump_size;
        r = std::max(r, -0.95);
        s.price = std::max(s.price * (1.0 + r), 0.01);
        const double vol = std::round(s.base_volume * p.volume_scale * volume_shock *
                                      std::exp(0.4 * rng.normal()) * (1.0 + 10.0 * std::fabs(r)));
        obs[i] = DailyObservation{static_cast<SecurityIndex>(i), r, s.price, vol, s.shares,
                                  true, true};
      }
      dates.push_back(date);
      mkt.push_back(m_ret);
      days.push_back(std::move(obs));
    }
  }

  out.market = MarketSeries(dates, std::move(mkt));
  out.panel = DailyPanel(std::move(ids), std::move(dates), std::move(days));
  return out;
}

void write_true_regime_csv(const std::string& path, const SimOutput& sim,
                           const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "month,stress\n";
  for (std::size_t i = 0; i < sim.months.size(); ++i)
    out << format_year_month(sim.months[i]) << ',' << (sim.true_regime[i] ? 1 : 0) << '\n';
}

}  // namespace mspi
