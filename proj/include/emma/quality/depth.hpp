#pragma once

#include <span>

#include "emma/core/grids.hpp"
#include "emma/quality/report.hpp"

namespace emma::quality {

// Median of the values; the mean of the two middle elements for even counts.
double median(std::span<const double> values);

// Scale-invariant depth errors. The prediction is first multiplied by
// median(gt) / median(pred), then RMSE, absolute relative and squared
// relative error are taken over every pixel of every frame.
DepthMetrics depth_metrics(const DepthGrid& pred, const DepthGrid& gt);

}  // namespace emma::quality
