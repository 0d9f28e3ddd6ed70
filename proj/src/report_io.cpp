#include "sfr/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfr/csv.hpp"
#include "sfr/errors.hpp"
#include "sfr/model_io.hpp"

namespace sfr {

using nlohmann::json;

namespace {

json optional_double(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string fixed(double v, int precision) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string fixed_opt(const std::optional<double>& v, int precision) {
  return v ? fixed(*v, precision) : std::string("-");
}

std::string p_cell(const std::map<std::string, double>& p,
                   const std::string& key) {
  const auto it = p.find(key);
  return it != p.end() ? fixed(it->second, 3) : std::string("-");
}

void pad(std::string& line, const std::string& cell, std::size_t width) {
  line += cell;
  if (cell.size() < width) line += std::string(width - cell.size(), ' ');
}

}  // namespace

json metrics_to_json(const MetricBundle& m) {
  json j;
  j["mse"] = m.mse;
  j["sd_sq_err"] = m.sd_sq_err;
  j["pearson_r"] = optional_double(m.pearson_r);
  j["rae"] = optional_double(m.rae);
  j["mape"] = optional_double(m.mape);
  j["sd_ape"] = optional_double(m.sd_ape);
  j["n_evaluated"] = m.n_evaluated;
  j["mape_excluded"] = m.mape_excluded;
  return j;
}

json eval_report_to_json(const EvalReport& report) {
  json folds = json::array();
  for (const FoldRecord& f : report.folds) {
    json jf;
    jf["sample_id"] = f.sample_id;
    jf["true_change"] = f.true_change;
    jf["pred_change"] = f.pred_change;
    jf["true_post"] = optional_double(f.true_post);
    jf["pred_post"] = optional_double(f.pred_post);
    jf["fallback"] = f.fallback;
    jf["n_candidates"] = f.n_candidates;
    jf["n_selected"] = f.n_selected;
    folds.push_back(std::move(jf));
  }
  json j;
  j["format"] = "sfr.eval-report";
  j["metrics"] = metrics_to_json(report.metrics);
  j["folds"] = std::move(folds);
  j["p_values"] = report.p_values;
  j["feature_ids"] = report.feature_ids;
  j["candidate_frequency"] = report.candidate_frequency;
  j["selection_frequency"] = report.selection_frequency;
  j["fallback_folds"] = report.fallback_folds;
  j["config"] = pipeline_config_to_json(report.config);
  return j;
}

json permtest_to_json(const PermutationTestResult& result) {
  json stats;
  for (const auto& [name, values] : result.permuted_stats) {
    json arr = json::array();
    for (double v : values) {
      arr.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    }
    stats[name] = std::move(arr);
  }
  json j;
  j["format"] = "sfr.permtest";
  j["n_perms"] = result.n_perms;
  j["p_values"] = result.p_values;
  j["permuted_stats"] = std::move(stats);
  j["observed"] = eval_report_to_json(result.observed);
  return j;
}

void write_folds_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  out << "sample_id,true_change,pred_change,true_post,pred_post,fallback,"
         "n_candidates,n_selected\n";
  for (const FoldRecord& f : report.folds) {
    out << f.sample_id << ',' << format_double(f.true_change) << ','
        << format_double(f.pred_change) << ','
        << (f.true_post ? format_double(*f.true_post) : "") << ','
        << (f.pred_post ? format_double(*f.pred_post) : "") << ','
        << (f.fallback ? 1 : 0) << ',' << f.n_candidates << ',' << f.n_selected
        << '\n';
  }
}

void write_selection_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  out << "feature_id,candidate_frequency,selection_frequency\n";
  for (std::size_t j = 0; j < report.feature_ids.size(); ++j) {
    out << report.feature_ids[j] << ',' << report.candidate_frequency[j] << ','
        << report.selection_frequency[j] << '\n';
  }
}

std::string summary_table_header() {
  std::string line;
  pad(line, "method", 10);
  pad(line, "MSE +- SD", 16);
  pad(line, "p_MSE", 8);
  pad(line, "r", 7);
  pad(line, "p_r", 8);
  pad(line, "RAE", 7);
  pad(line, "p_RAE", 8);
  pad(line, "MAPE +- SD", 16);
  pad(line, "p_MAPE", 8);
  line += '\n';
  return line;
}

std::string summary_table_row(const std::string& method,
                              const MetricBundle& m,
                              const std::map<std::string, double>& p_values) {
  std::string line;
  pad(line, method, 10);
  pad(line, fixed(m.mse, 2) + " +- " + fixed(m.sd_sq_err, 2), 16);
  pad(line, p_cell(p_values, "mse"), 8);
  pad(line, fixed_opt(m.pearson_r, 2), 7);
  pad(line, p_cell(p_values, "pearson_r"), 8);
  pad(line, fixed_opt(m.rae, 2), 7);
  pad(line, p_cell(p_values, "rae"), 8);
  if (m.mape) {
    pad(line, fixed(*m.mape, 2) + " +- " + fixed_opt(m.sd_ape, 2), 16);
  } else {
    pad(line, "-", 16);
  }
  pad(line, p_cell(p_values, "mape"), 8);
  line += '\n';
  return line;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(errc::io_error, "write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sfr
