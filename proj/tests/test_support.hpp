#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "emoseq/core.hpp"
#include "emoseq/rng.hpp"

namespace emoseq::test {

// Threads from explicit value lists; both fields get the same value unless
// `sub` is provided.
inline Dataset make_dataset(const std::vector<std::vector<double>>& pos,
                            const std::vector<std::vector<double>>& sub = {}) {
  Dataset ds;
  ds.source_label = "test";
  for (std::size_t t = 0; t < pos.size(); ++t) {
    Thread thread;
    thread.thread_id = "t" + std::to_string(t);
    for (std::size_t i = 0; i < pos[t].size(); ++i) {
      const double s = sub.empty() ? pos[t][i] : sub[t][i];
      thread.comments.push_back({i, pos[t][i], s});
    }
    ds.threads.push_back(std::move(thread));
  }
  return ds;
}

// Random dataset with thread lengths in [1, max_len] and values quantized on a
// coarse grid so that edges and ties occur.
inline Dataset random_dataset(std::uint64_t seed, std::size_t threads, std::size_t max_len) {
  Rng rng(Seed{seed});
  std::vector<std::vector<double>> pos, sub;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t len = 1 + rng.uniform_below(max_len);
    std::vector<double> p(len), s(len);
    for (std::size_t i = 0; i < len; ++i) {
      p[i] = static_cast<double>(rng.uniform_below(41)) / 40.0;
      s[i] = rng.uniform01();
    }
    pos.push_back(std::move(p));
    sub.push_back(std::move(s));
  }
  return make_dataset(pos, sub);
}

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("emoseq-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace emoseq::test
