#include <gtest/gtest.h>

#include <cmath>

#include "mspi/artifacts.hpp"
#include "mspi/error.hpp"
#include "support.hpp"

using namespace mspi;

TEST(Artifacts, ForecastsRoundTripExactly) {
  ForecastSeries s;
  s.config_hash = "00112233aabbccdd";
  YearMonth m = std::chrono::year{2001} / std::chrono::month{11};
  for (int i = 0; i < 3; ++i) {
    ForecastRecord r;
    r.month = m;
    r.model = i % 2 ? ModelKind::gradient_boosting : ModelKind::l1_logit;
    r.raw_score = 0.1 + 1.0 / 3.0 * i;
    r.probability = 1.0 / 7.0;
    r.y_next = i < 2 ? std::optional<int>(i) : std::nullopt;
    r.next_vol = i < 2 ? 0.123456789012345 : NAN;
    r.next_ret = -0.05;
    s.records.push_back(r);
    m = next_month(m);
  }
  testing_support::TempDir dir;
  write_forecasts_csv(dir.file("f.csv"), s);
  const auto back = read_forecasts_csv(dir.file("f.csv"));
  EXPECT_EQ(back.config_hash, s.config_hash);
  ASSERT_EQ(back.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.records[i].month, s.records[i].month);
    EXPECT_EQ(back.records[i].model, s.records[i].model);
    EXPECT_EQ(back.records[i].raw_score, s.records[i].raw_score);
    EXPECT_EQ(back.records[i].probability, s.records[i].probability);
    EXPECT_EQ(back.records[i].y_next, s.records[i].y_next);
    EXPECT_EQ(forecast_line(back.records[i]), forecast_line(s.records[i]));
  }
  EXPECT_TRUE(std::isnan(back.records[2].next_vol));
  EXPECT_NE(testing_support::read_text(dir.file("f.csv")).find("# config_hash: 00112233aabbccdd"),
            std::string::npos);
}

TEST(Artifacts, MissingFileNamesPath) {
  try {
    require_file("/nonexistent/forecasts.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/forecasts.csv"), std::string::npos);
  }
}

TEST(Artifacts, BadCellNamesLineAndColumn) {
  testing_support::TempDir dir;
  testing_support::write_text(dir.file("f.csv"),
                              "# config_hash: 1\nmonth,model,raw_score,probability,y_next,next_vol,next_ret\n"
                              "2001-01,l1_logit,0.1,oops,1,0.1,0.0\n");
  try {
    read_forecasts_csv(dir.file("f.csv"));
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("probability"), std::string::npos) << msg;
    EXPECT_NE(msg.find("oops"), std::string::npos) << msg;
  }
}
