#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sfr/dataset.hpp"

namespace sfr::test {

// Builds a dataset from feature columns and a target, with generated ids.
inline Dataset make_dataset(const std::vector<std::vector<double>>& columns,
                            const std::vector<double>& target) {
  Dataset d;
  const std::size_t n = target.size();
  const std::size_t p = columns.size();
  d.features = Matrix(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) d.features.at(i, j) = columns[j][i];
    d.feature_ids.push_back("f" + std::to_string(j));
  }
  for (std::size_t i = 0; i < n; ++i) {
    d.sample_ids.push_back("s" + std::to_string(i));
  }
  d.target = target;
  return d;
}

// Scoped temporary directory for file-based tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("sfr_test_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

}  // namespace sfr::test
