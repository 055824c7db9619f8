#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdl/discriminant.hpp"
#include "kdl/experiments.hpp"
#include "kdl/poly.hpp"
#include "kdl/roots.hpp"
#include "kdl/stats.hpp"

namespace kdl {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// %.17g, with nan / inf / -inf spelled out.
std::string format_double(double x);
/// Inverse of format_double.
double parse_double(const std::string& text);

/// {"degree": n, "coeffs": [c0..cn]}; complex entries as [re, im].
json coefficients_to_json(const Coefficients& p);
Coefficients coefficients_from_json(const json& j);

/// Comma-separated ascending coefficients, e.g. "1,0,-1" for x^2 - 1.
Coefficients parse_coefficient_list(const std::string& text);

/// One {"re", "im", "residual"} object per line.
std::string roots_to_jsonl(const RootSet& rs);

std::string breakdown_csv_header();
std::string breakdown_csv_row(const DiscriminantBreakdown& b);

/// count, mean, std, stderr, min, q25, q50, q75, max.
std::vector<std::string> summary_csv_columns();
std::string summary_csv_row(const SummaryStats& s);

json summary_to_json(const SummaryStats& s);
SummaryStats summary_from_json(const json& j);

json config_to_json(const ExperimentConfig& c);
/// Fields absent from `j` keep the values already in `base`.
ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {});

json report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const json& j);

std::string records_csv(const ExperimentReport& r);
std::string records_jsonl(const ExperimentReport& r);
std::string rungs_csv(const ExperimentReport& r);

/// Writes through a temporary file and rename. Refuses to replace an
/// existing file unless `force`.
void write_atomic(const std::filesystem::path& path, const std::string& content, bool force);

std::string read_text(const std::filesystem::path& path);

/// Writes <experiment>.json plus the per-trial records as <experiment>_records.csv
/// (and <experiment>_summary.csv) for "csv", or <experiment>_records.jsonl for
/// "jsonl". Returns the paths written.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& r, const std::filesystem::path& dir,
                                               const std::string& format, bool force);

}  // namespace kdl
