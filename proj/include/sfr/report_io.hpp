#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sfr/eval.hpp"

namespace sfr {

nlohmann::json metrics_to_json(const MetricBundle& m);
nlohmann::json eval_report_to_json(const EvalReport& report);
nlohmann::json permtest_to_json(const PermutationTestResult& result);

// sample_id,true_change,pred_change,true_post,pred_post,fallback
void write_folds_csv(const EvalReport& report, const std::string& path);

// feature_id,candidate_frequency,selection_frequency
void write_selection_csv(const EvalReport& report, const std::string& path);

// One fixed-width summary row per method: MSE +- SD, r, RAE, MAPE +- SD and
// their permutation p-values (dashes when unavailable).
std::string summary_table_header();
std::string summary_table_row(const std::string& method,
                              const MetricBundle& metrics,
                              const std::map<std::string, double>& p_values);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sfr
