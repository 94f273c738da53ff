#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctgca/gca.hpp"
#include "json.hpp"

namespace ctgca {

// One test-split scan with the tool's prediction, the reference rating(s)
// and whatever covariates are known. Raters enter as imputed totals.
struct ScanAnalysis {
  std::string scan_id;
  double pred_raw = 0.0;
  int pred_total = 0;
  Severity pred_severity = Severity::kMild;
  int rater1_total = 0;
  Severity rater1_severity = Severity::kMild;
  std::optional<int> rater2_total;
  std::optional<double> age;
  std::optional<int> amt_score;
  std::optional<int> ocs_tasks_impaired;
};

// Output of the validation analytics: the report.json document plus every
// figure (SVG) and its companion CSV, as filename -> bytes. Skipped analyses
// are listed in notices (also embedded in the report).
struct ReportBundle {
  nlohmann::json report;
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> notices;
};

// %.6g formatting shared by report.json and the figure CSVs (6 significant
// digits for every real number).
std::string format_g6(double v);
// nlohmann dump with every double routed through format_g6 (integers stay
// verbatim). Keys come out in nlohmann's sorted order.
std::string dump_json_g6(const nlohmann::json& j, int indent = 2);

// Deterministic quantile: sort the sample and linearly interpolate between
// order statistics at rank h = (n-1) * p. p in [0, 1], n >= 1.
double quantile(std::vector<double> v, double p);

// Age bands follow the cohort tables: "65-75" is age <= 75, "76-84" is
// 75 < age <= 84, ">84" the rest (continuous ages bucketed by those cuts).
extern const std::array<const char*, 3> kAgeBandLabels;
int age_band(double age);

// Builds the whole validation analysis from per-scan rows (sorted by scan_id
// by the caller). `context` is merged into the top level of report.json
// (model metadata, split counts, ...). Throws DomainError when rows is empty.
ReportBundle build_validation_report(const std::vector<ScanAnalysis>& rows,
                                     const nlohmann::json& context);

}  // namespace ctgca
