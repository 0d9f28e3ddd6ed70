#pragma once

#include <stdexcept>
#include <string>

namespace sfr {

enum class errc {
  // ingestion / data
  missing_column,
  non_numeric_cell,
  duplicate_id,
  too_few_samples,
  non_finite_value,
  no_features,
  invalid_spec,
  degenerate_baseline,
  zero_variance,
  io_error,
  // tree / ensemble
  empty_sample_set,
  dimension_mismatch,
  no_oob_samples,
  // pipeline
  too_few_replicates,
  too_few_pairs,
  no_candidates,
  // metrics
  constant_vector,
  all_zero_targets,
  // persistence / cli
  feature_mismatch,
  bad_model_file,
};

const char* errc_name(errc c) noexcept;

/// Library-wide exception carrying a stable error code for CLI exit mapping.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + what);
}

}  // namespace sfr
