#include "mspi/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "mspi/error.hpp"
#include "mspi/evaluation.hpp"

namespace mspi {

using nlohmann::json;

namespace {

struct Field {
  std::function<json(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const json&)> set;
};

template <typename T, typename Ref>
Field field(Ref ref) {
  return {[ref](const PipelineConfig& c) { return json(ref(const_cast<PipelineConfig&>(c))); },
          [ref](PipelineConfig& c, const json& j) { ref(c) = j.get<T>(); }};
}

#define MSPI_FIELD(T, expr) field<T>([](PipelineConfig& c) -> T& { return expr; })

Field regime_field(bool stress, double RegimeParams::*member) {
  return {[=](const PipelineConfig& c) { return json((stress ? c.sim.stress : c.sim.calm).*member); },
          [=](PipelineConfig& c, const json& j) {
            (stress ? c.sim.stress : c.sim.calm).*member = j.get<double>();
          }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = [] {
    std::map<std::string, Field> m;
    m["out_dir"] = MSPI_FIELD(std::string, c.out_dir);
    m["panel_path"] = MSPI_FIELD(std::string, c.panel_path);
    m["market_path"] = MSPI_FIELD(std::string, c.market_path);
    m["seed"] = MSPI_FIELD(std::uint64_t, c.seed);
    m["threads"] = MSPI_FIELD(unsigned, c.threads);

    m["min_abs_price"] = MSPI_FIELD(double, c.filter.min_abs_price);
    m["require_share_class"] = MSPI_FIELD(bool, c.filter.require_share_class);
    m["require_exchange"] = MSPI_FIELD(bool, c.filter.require_exchange);
    m["tail_tau"] = MSPI_FIELD(double, c.tail.tau);

    m["return_cutoff"] = MSPI_FIELD(double, c.stress.return_cutoff);
    m["vol_quantile"] = MSPI_FIELD(double, c.stress.vol_quantile);
    m["min_history_months"] = MSPI_FIELD(std::size_t, c.stress.min_history_months);
    m["annualization_factor"] = MSPI_FIELD(double, c.stress.annualization_factor);

    m["initial_window_months"] = MSPI_FIELD(std::size_t, c.backtest.initial_window_months);
    m["cv_folds"] = MSPI_FIELD(std::size_t, c.backtest.cv_folds);
    m["l1_lambdas"] = MSPI_FIELD(std::vector<double>, c.backtest.l1_lambdas);
    m["l2_lambdas"] = MSPI_FIELD(std::vector<double>, c.backtest.l2_lambdas);
    m["benchmark_market_controls"] = MSPI_FIELD(bool, c.backtest.benchmark_market_controls);
    m["calibration_fraction"] = MSPI_FIELD(double, c.backtest.calibration_fraction);
    m["min_calibration_months"] = MSPI_FIELD(std::size_t, c.backtest.min_calibration_months);
    m["models"] = {[](const PipelineConfig& c) {
                     json a = json::array();
                     for (ModelKind k : c.backtest.models) a.push_back(model_name(k));
                     return a;
                   },
                   [](PipelineConfig& c, const json& j) {
                     c.backtest.models.clear();
                     for (const auto& s : j.get<std::vector<std::string>>()) {
                       const auto k = parse_model(s);
                       if (!k) throw ConfigError(fmt::format("models: unknown model '{}'", s));
                       c.backtest.models.push_back(*k);
                     }
                   }};
    // Forest and boosting grids: the searched dimension is a list, the rest
    // are shared scalars.
    m["rf_max_depths"] = {[](const PipelineConfig& c) {
                            json a = json::array();
                            for (const auto& p : c.backtest.rf_grid) a.push_back(p.max_depth);
                            return a;
                          },
                          [](PipelineConfig& c, const json& j) {
                            const ForestParams base = c.backtest.rf_grid.empty() ? ForestParams{} : c.backtest.rf_grid.front();
                            c.backtest.rf_grid.clear();
                            for (std::size_t d : j.get<std::vector<std::size_t>>()) {
                              ForestParams p = base;
                              p.max_depth = d;
                              c.backtest.rf_grid.push_back(p);
                            }
                          }};
    auto rf_scalar = [](std::size_t ForestParams::*member) -> Field {
      return {[=](const PipelineConfig& c) {
                return c.backtest.rf_grid.empty() ? json(ForestParams{}.*member)
                                                  : json(c.backtest.rf_grid.front().*member);
              },
              [=](PipelineConfig& c, const json& j) {
                for (auto& p : c.backtest.rf_grid) p.*member = j.get<std::size_t>();
              }};
    };
    m["rf_n_trees"] = rf_scalar(&ForestParams::n_trees);
    m["rf_min_leaf"] = rf_scalar(&ForestParams::min_leaf);
    m["rf_features_per_split"] = rf_scalar(&ForestParams::features_per_split);
    m["gb_stages"] = {[](const PipelineConfig& c) {
                        json a = json::array();
                        for (const auto& p : c.backtest.gb_grid) a.push_back(p.n_stages);
                        return a;
                      },
                      [](PipelineConfig& c, const json& j) {
                        const BoostParams base = c.backtest.gb_grid.empty() ? BoostParams{} : c.backtest.gb_grid.front();
                        c.backtest.gb_grid.clear();
                        for (std::size_t s : j.get<std::vector<std::size_t>>()) {
                          BoostParams p = base;
                          p.n_stages = s;
                          c.backtest.gb_grid.push_back(p);
                        }
                      }};
    auto gb_size = [](std::size_t BoostParams::*member) -> Field {
      return {[=](const PipelineConfig& c) {
                return c.backtest.gb_grid.empty() ? json(BoostParams{}.*member)
                                                  : json(c.backtest.gb_grid.front().*member);
              },
              [=](PipelineConfig& c, const json& j) {
                for (auto& p : c.backtest.gb_grid) p.*member = j.get<std::size_t>();
              }};
    };
    m["gb_max_depth"] = gb_size(&BoostParams::max_depth);
    m["gb_min_leaf"] = gb_size(&BoostParams::min_leaf);
    m["gb_shrinkage"] = {[](const PipelineConfig& c) {
                           return c.backtest.gb_grid.empty() ? json(BoostParams{}.shrinkage)
                                                             : json(c.backtest.gb_grid.front().shrinkage);
                         },
                         [](PipelineConfig& c, const json& j) {
                           for (auto& p : c.backtest.gb_grid) p.shrinkage = j.get<double>();
                         }};

    m["ece_bins"] = MSPI_FIELD(std::size_t, c.ece_bins);
    m["bin_edges"] = MSPI_FIELD(std::vector<double>, c.bin_edges);
    m["bootstrap_block"] = MSPI_FIELD(std::size_t, c.bootstrap_block);
    m["bootstrap_reps"] = MSPI_FIELD(std::size_t, c.bootstrap_reps);
    m["mspi_model"] = MSPI_FIELD(std::string, c.mspi_model);
    m["benchmark_model"] = MSPI_FIELD(std::string, c.benchmark_model);

    m["hac_lag"] = MSPI_FIELD(std::size_t, c.hac_lag);
    m["crash_cutoff"] = MSPI_FIELD(double, c.crash_cutoff);
    m["lp_horizon"] = MSPI_FIELD(std::size_t, c.lp_horizon);
    m["lp_outcome"] = MSPI_FIELD(std::string, c.lp_outcome);
    m["lp_hac_offset"] = MSPI_FIELD(std::size_t, c.lp_hac_offset);

    m["sim_n_stocks"] = MSPI_FIELD(std::size_t, c.sim.n_stocks);
    m["sim_n_years"] = MSPI_FIELD(std::size_t, c.sim.n_years);
    m["sim_trading_days_per_year"] = MSPI_FIELD(std::size_t, c.sim.trading_days_per_year);
    m["sim_start_year"] = MSPI_FIELD(int, c.sim.start_year);
    m["sim_p_calm_to_stress"] = MSPI_FIELD(double, c.sim.p_calm_to_stress);
    m["sim_p_stress_to_calm"] = MSPI_FIELD(double, c.sim.p_stress_to_calm);
    m["sim_start_in_stress"] = MSPI_FIELD(bool, c.sim.start_in_stress);
    m["sim_jump_size"] = MSPI_FIELD(double, c.sim.jump_size);
    for (bool stress : {false, true}) {
      const std::string p = stress ? "sim_stress_" : "sim_calm_";
      m[p + "drift"] = regime_field(stress, &RegimeParams::market_drift);
      m[p + "vol"] = regime_field(stress, &RegimeParams::market_vol);
      m[p + "dispersion"] = regime_field(stress, &RegimeParams::dispersion);
      m[p + "tail_prob"] = regime_field(stress, &RegimeParams::tail_prob);
      m[p + "volume_scale"] = regime_field(stress, &RegimeParams::volume_scale);
    }
    return m;
  }();
  return f;
}

#undef MSPI_FIELD

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void PipelineConfig::validate() const {
  filter.validate();
  tail.validate();
  stress.validate();
  backtest.validate();
  sim.validate();
  if (threads == 0) throw ConfigError("threads: must be positive");
  if (ece_bins == 0) throw ConfigError("ece_bins: must be positive");
  validate_bin_edges(bin_edges);
  bootstrap_options().validate();
  if (!parse_model(mspi_model)) throw ConfigError(fmt::format("mspi_model: unknown model '{}'", mspi_model));
  if (!parse_model(benchmark_model))
    throw ConfigError(fmt::format("benchmark_model: unknown model '{}'", benchmark_model));
  if (!(crash_cutoff > -1.0 && crash_cutoff < 1.0)) throw ConfigError("crash_cutoff: must lie in (-1, 1)");
  bool outcome_ok = lp_outcome == "realized_vol" || lp_outcome == "crash";
  for (auto name : feature_names()) outcome_ok = outcome_ok || lp_outcome == name;
  if (!outcome_ok) throw ConfigError(fmt::format("lp_outcome: unknown outcome '{}'", lp_outcome));
  if (out_dir.empty()) throw ConfigError("out_dir: must not be empty");
}

void PipelineConfig::propagate_seed() {
  sim.seed = seed;
  backtest.seed = seed;
  backtest.threads = threads;
}

std::string PipelineConfig::resolved_panel_path() const {
  return panel_path.empty() ? artifact("panel.csv") : panel_path;
}

std::string PipelineConfig::resolved_market_path() const {
  return market_path.empty() ? artifact("market.csv") : market_path;
}

std::string PipelineConfig::artifact(const std::string& name) const {
  return (std::filesystem::path(out_dir) / name).string();
}

BootstrapOptions PipelineConfig::bootstrap_options() const {
  BootstrapOptions o;
  o.block_len = bootstrap_block;
  o.reps = bootstrap_reps;
  o.seed = seed;
  o.ece_bins = ece_bins;
  o.threads = threads;
  return o;
}

json config_to_json(const PipelineConfig& c) {
  json j = json::object();
  for (const auto& [name, f] : fields()) j[name] = f.get(c);
  return j;
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  PipelineConfig c;
  // Grid members are applied first so shared scalars land on the final grid.
  std::vector<std::string> order;
  for (const auto& [key, value] : j.items()) {
    if (!fields().count(key)) throw ConfigError(fmt::format("{}: unknown config key", key));
    (key == "rf_max_depths" || key == "gb_stages" ? order.insert(order.begin(), key)
                                                   : order.insert(order.end(), key));
  }
  for (const auto& key : order) {
    try {
      fields().at(key).set(c, j.at(key));
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
  }
  c.propagate_seed();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: '{}' is not valid JSON ({})", path, e.what()));
  }
  return config_from_json(j);
}

std::string config_hash(const PipelineConfig& c) {
  json j = config_to_json(c);
  j.erase("out_dir");
  j.erase("threads");
  return fmt::format("{:016x}", fnv1a(j.dump()));
}

}  // namespace mspi
