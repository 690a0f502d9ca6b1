#include "emma/quality/depth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma::quality {
namespace {

void check_positive(const DepthGrid& grid, const char* which) {
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values[i];
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorCode::kNonPositiveDepth, which, fmt::format("value {} at pixel {}", v, i));
    }
  }
}

}  // namespace

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "median");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

DepthMetrics depth_metrics(const DepthGrid& pred, const DepthGrid& gt) {
  if (pred.frames != gt.frames || pred.height != gt.height || pred.width != gt.width ||
      pred.values.size() != pred.pixel_count() || gt.values.size() != gt.pixel_count()) {
    throw Error(ErrorCode::kShapeMismatch, "depth_metrics",
                fmt::format("pred {}x{}x{} vs gt {}x{}x{}", pred.frames, pred.height, pred.width, gt.frames,
                            gt.height, gt.width));
  }
  if (gt.values.empty()) throw Error(ErrorCode::kEmptyInput, "depth_metrics");
  check_positive(pred, "pred");
  check_positive(gt, "gt");

  DepthMetrics m;
  m.scale = median(gt.values) / median(pred.values);
  double sq_sum = 0.0;
  double abs_rel_sum = 0.0;
  double sq_rel_sum = 0.0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const double g = gt.values[i];
    const double diff = m.scale * pred.values[i] - g;
    sq_sum += diff * diff;
    abs_rel_sum += std::abs(diff) / g;
    sq_rel_sum += diff * diff / g;
  }
  const double n = static_cast<double>(gt.values.size());
  m.rmse = std::sqrt(sq_sum / n);
  m.abs_rel = abs_rel_sum / n;
  m.sq_rel = sq_rel_sum / n;
  return m;
}

}  // namespace emma::quality
