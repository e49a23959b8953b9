#include <gtest/gtest.h>

#include "mspi/config.hpp"
#include "mspi/error.hpp"
#include "support.hpp"

using namespace mspi;
using nlohmann::json;

TEST(Config, DefaultsMatchDocumentedValues) {
  const PipelineConfig c;
  EXPECT_EQ(c.stress.return_cutoff, -0.05);
  EXPECT_EQ(c.stress.vol_quantile, 0.90);
  EXPECT_EQ(c.tail.tau, 0.05);
  EXPECT_EQ(c.backtest.initial_window_months, 120u);
  EXPECT_EQ(c.bootstrap_block, 12u);
  EXPECT_EQ(c.bootstrap_reps, 2000u);
  EXPECT_EQ(c.ece_bins, 10u);
  EXPECT_EQ(c.bin_edges, (std::vector<double>{0.0, 0.05, 0.10, 0.20, 0.40, 1.0}));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTripKeepsHash) {
  PipelineConfig c;
  c.seed = 99;
  c.backtest.l1_lambdas = {0.5, 0.05};
  c.backtest.gb_grid = {{10, 0.2, 3, 4}};
  c.sim.n_stocks = 33;
  const auto back = config_from_json(json::parse(config_to_json(c).dump()));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(back.sim.n_stocks, 33u);
  EXPECT_EQ(back.backtest.gb_grid.size(), 1u);
  EXPECT_EQ(back.backtest.gb_grid[0].shrinkage, 0.2);
}

TEST(Config, HashIgnoresOutputDirAndThreads) {
  PipelineConfig a, b;
  b.out_dir = "elsewhere";
  b.threads = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, UnknownKeyAndBadTypeNameTheKey) {
  try {
    config_from_json(json{{"intial_window_months", 60}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("intial_window_months"), std::string::npos);
  }
  try {
    config_from_json(json{{"ece_bins", "ten"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ece_bins"), std::string::npos);
  }
  EXPECT_THROW(config_from_json(json::array()), ConfigError);
}

TEST(Config, ValidationNamesField) {
  auto expect_field = [](const json& j, const std::string& field) {
    try {
      config_from_json(j).validate();
      FAIL() << field;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_field({{"vol_quantile", 1.5}}, "vol_quantile");
  expect_field({{"bin_edges", {0.0, 0.5}}}, "bin_edges");
  expect_field({{"mspi_model", "svm"}}, "mspi_model");
  expect_field({{"lp_outcome", "nonsense"}}, "lp_outcome");
  expect_field({{"bootstrap_reps", 0}}, "bootstrap_reps");
}

TEST(Config, LoadFromFileAndSeedPropagation) {
  testing_support::TempDir dir;
  const std::string path = dir.file("c.json");
  testing_support::write_text(path, R"({"seed": 123, "models": ["l1_logit"], "out_dir": "x"})");
  PipelineConfig c = load_config(path);
  c.propagate_seed();
  EXPECT_EQ(c.sim.seed, 123u);
  EXPECT_EQ(c.backtest.seed, 123u);
  EXPECT_EQ(c.backtest.models, (std::vector<ModelKind>{ModelKind::l1_logit}));
  EXPECT_EQ(c.artifact("forecasts.csv"), "x/forecasts.csv");
  EXPECT_EQ(c.resolved_panel_path(), "x/panel.csv");
  testing_support::write_text(path, "{ not json");
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config(dir.file("missing.json")), ConfigError);
}
