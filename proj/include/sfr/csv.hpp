#pragma once

#include <optional>
#include <string>

#include "sfr/dataset.hpp"

namespace sfr {

// Shortest decimal form that parses back to the same double (round-trip
// exact). All CSV output goes through this.
std::string format_double(double v);

struct CsvLoadOptions {
  std::string target_column;
  std::optional<std::string> baseline_column;
  std::optional<std::string> id_column;
};

// Strict CSV: UTF-8, comma separated, first line header, no quoting, decimal
// point reals. Every non-id cell must parse as a finite real number.
Dataset load_csv(const std::string& path, const CsvLoadOptions& opts);

// Feature-only view of a CSV for prediction: no target required. If
// `drop_target_column` names a present column it is excluded from features.
struct FeatureTable {
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;
  Matrix features;
  std::optional<std::vector<double>> baseline;
};

struct FeatureCsvOptions {
  std::optional<std::string> drop_target_column;
  std::optional<std::string> baseline_column;
  std::optional<std::string> id_column;
};

FeatureTable load_feature_csv(const std::string& path,
                              const FeatureCsvOptions& opts);

struct CsvColumnNames {
  std::string id = "id";  // empty: omit the id column
  std::string target = "y";
  std::string baseline = "baseline";
};

void write_csv(const Dataset& d, const std::string& path,
               const CsvColumnNames& names = {});

}  // namespace sfr
