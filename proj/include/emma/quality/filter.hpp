#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emma/core/manifest.hpp"
#include "emma/quality/report.hpp"

namespace emma::quality {

// Absent thresholds are not enforced. There are no defaults.
struct FilterConfig {
  std::optional<double> min_mat_pix;
  std::optional<double> max_sq_rel;
  std::optional<double> min_overall_sim;

  void validate() const;
};

inline constexpr const char* kCriterionMatPix = "mat_pix";
inline constexpr const char* kCriterionSqRel = "sq_rel";
inline constexpr const char* kCriterionOverallSim = "overall_sim";

// Criteria of `cfg` that `report` fails, in the order mat_pix, sq_rel,
// overall_sim. A present threshold whose metric is missing from the report
// throws MissingQualityReport naming `id`.
std::vector<std::string> failed_criteria(const QualityReport& report, const FilterConfig& cfg, const std::string& id);

// Generated samples failing any threshold get weight 0 and the failed
// criteria in their report; every other sample is left as is apart from the
// PASS verdict. Real samples bypass the filter.
std::vector<SampleRecord> apply_filter(std::vector<SampleRecord> samples, const FilterConfig& cfg);

// Computes depth, view and alignment metrics for a manifest entry from its
// sidecar files and precomputed match counts. Metrics whose inputs the entry
// lacks are left absent.
QualityReport evaluate_entry(const DatasetManifest& manifest, const ManifestEntry& entry);

// "PASS" or "FAIL:<criterion>,<criterion>".
std::string verdict_text(const QualityReport& report);

// One line of the quality report file:
// {id, rmse, abs_rel, sq_rel, mat_pix, sim_fg, sim_bg, sim_light, overall_sim, verdict}
std::string quality_line(const std::string& id, const QualityReport& report);

}  // namespace emma::quality
