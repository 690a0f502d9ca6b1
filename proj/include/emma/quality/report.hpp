#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace emma::quality {

struct DepthMetrics {
  double rmse = 0.0;     // meters
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double scale = 1.0;    // median alignment factor applied to the prediction
};

// Matched-pixel counts between the center camera and each side camera.
struct MatchReport {
  std::vector<std::size_t> left_counts;   // one per frame, center <-> left
  std::vector<std::size_t> right_counts;  // one per frame, center <-> right
  double mat_pix = 0.0;                   // pooled mean of all counts
};

struct AlignmentReport {
  double foreground = 0.0;
  double background = 0.0;
  double lighting = 0.0;
  double overall = 0.0;
};

struct QualityReport {
  std::optional<DepthMetrics> depth;
  std::optional<MatchReport> views;
  std::optional<AlignmentReport> alignment;
  // Names of failed filter criteria ("mat_pix", "sq_rel", "overall_sim").
  // Empty once filtered means PASS.
  std::vector<std::string> failed;
  bool evaluated = false;

  bool passed() const noexcept { return evaluated && failed.empty(); }
};

}  // namespace emma::quality
