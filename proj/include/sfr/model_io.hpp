#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sfr/ensemble.hpp"
#include "sfr/pipeline.hpp"
#include "sfr/synthetic.hpp"

namespace sfr {

// JSON document layouts are versioned; round trips are bit-exact (doubles are
// serialized in shortest form that parses back to the same value).

nlohmann::json tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& j);

nlohmann::json ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const nlohmann::json& j);

nlohmann::json pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

nlohmann::json pipeline_model_to_json(const PipelineModel& model);
PipelineModel pipeline_model_from_json(const nlohmann::json& j);

void save_pipeline_model(const PipelineModel& model, const std::string& path);
PipelineModel load_pipeline_model(const std::string& path);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);

void write_importance_csv(const ImportanceReport& report,
                          const std::string& path);

}  // namespace sfr
