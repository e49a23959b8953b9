#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mspi/matrix.hpp"
#include "mspi/panel.hpp"
#include "mspi/rng.hpp"

namespace testing_support {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mspi_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One day of observations with the given returns; securities 0..n-1.
inline std::vector<mspi::DailyObservation> make_day(const std::vector<double>& returns,
                                                    double prc = 10.0, double vol = 1000.0,
                                                    double shrout = 1e5) {
  std::vector<mspi::DailyObservation> day;
  for (std::size_t i = 0; i < returns.size(); ++i)
    day.push_back({static_cast<mspi::SecurityIndex>(i), returns[i], prc, vol, shrout, true, true});
  return day;
}

// Logistic data: y ~ Bernoulli(sigmoid(b0 + x.b)), x ~ N(0, 1).
struct LogisticData {
  mspi::Matrix X;
  std::vector<int> y;
  std::vector<std::vector<double>> rows;
};

inline LogisticData logistic_data(std::size_t n, std::size_t p, std::uint64_t seed,
                                  double b0 = -0.5, double scale = 0.8) {
  mspi::Rng rng(seed);
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = scale * (j % 2 ? -1.0 : 1.0) / (1.0 + 0.5 * j);
  LogisticData d;
  d.X = mspi::Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    double z = b0;
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = rng.normal();
      d.X(i, j) = row[j];
      z += beta[j] * row[j];
    }
    d.y.push_back(rng.uniform() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0);
    d.rows.push_back(row);
  }
  return d;
}

}  // namespace testing_support
