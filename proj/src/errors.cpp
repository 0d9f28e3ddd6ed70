#include "sfr/errors.hpp"

namespace sfr {

const char* errc_name(errc c) noexcept {
  switch (c) {
    case errc::missing_column: return "MissingColumn";
    case errc::non_numeric_cell: return "NonNumericCell";
    case errc::duplicate_id: return "DuplicateId";
    case errc::too_few_samples: return "TooFewSamples";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::no_features: return "NoFeatures";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::degenerate_baseline: return "DegenerateBaseline";
    case errc::zero_variance: return "ZeroVariance";
    case errc::io_error: return "IoError";
    case errc::empty_sample_set: return "EmptySampleSet";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::no_oob_samples: return "NoOobSamples";
    case errc::too_few_replicates: return "TooFewReplicates";
    case errc::too_few_pairs: return "TooFewPairs";
    case errc::no_candidates: return "NoCandidates";
    case errc::constant_vector: return "ConstantVector";
    case errc::all_zero_targets: return "AllZeroTargets";
    case errc::feature_mismatch: return "FeatureMismatch";
    case errc::bad_model_file: return "BadModelFile";
  }
  return "UnknownError";
}

}  // namespace sfr
