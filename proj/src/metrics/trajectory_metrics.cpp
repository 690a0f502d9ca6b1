#include "emma/metrics/trajectory_metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma::metrics {

double action_mse_score(const Matrix& predicted, const Matrix& reference) {
  if (predicted.rows() != reference.rows() || predicted.cols() != reference.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "action chunk",
                fmt::format("predicted {}x{} vs reference {}x{}", predicted.rows(), predicted.cols(),
                            reference.rows(), reference.cols()));
  }
  if (reference.rows() == 0) throw Error(ErrorCode::kShapeMismatch, "action chunk", "empty window");
  double total = 0.0;
  for (std::size_t t = 0; t < reference.rows(); ++t) {
    const auto p = predicted.row(t);
    const auto r = reference.row(t);
    double step = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double d = p[j] - r[j];
      step += d * d;
    }
    total += step;
  }
  return 0.0 - total / static_cast<double>(reference.rows());  // +0.0, never -0.0
}

double action_mse_score(const ActionChunkPair& pair) { return action_mse_score(pair.predicted, pair.reference); }

SecondDifferenceSum second_difference_abs_sum(const JointTrajectory& traj, std::size_t start, std::size_t len) {
  if (start > traj.frames() || len > traj.frames() - start) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("window[{}, +{})", start, len),
                fmt::format("trajectory has {} frames", traj.frames()));
  }
  SecondDifferenceSum out;
  if (len < 3) return out;
  const double inv_dt2 = 1.0 / (traj.dt * traj.dt);
  for (std::size_t k = start; k + 2 < start + len; ++k) {
    const auto a0 = traj.angles.row(k);
    const auto a1 = traj.angles.row(k + 1);
    const auto a2 = traj.angles.row(k + 2);
    for (std::size_t j = 0; j < a0.size(); ++j) {
      out.abs_sum += std::abs((a2[j] - 2.0 * a1[j] + a0[j]) * inv_dt2);
    }
    out.terms += a0.size();
  }
  return out;
}

double smoothness_score(const JointTrajectory& traj, std::size_t start, std::size_t len) {
  if (len < 3) {
    throw Error(ErrorCode::kWindowTooShort, fmt::format("window[{}, +{})", start, len), "need at least 3 frames");
  }
  return 0.0 - second_difference_abs_sum(traj, start, len).abs_sum;
}

int joint_limit_score(const JointTrajectory& traj, std::size_t start, std::size_t len) {
  if (start > traj.frames() || len > traj.frames() - start) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("window[{}, +{})", start, len),
                fmt::format("trajectory has {} frames", traj.frames()));
  }
  for (std::size_t k = start; k < start + len; ++k) {
    const auto row = traj.angles.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < traj.limits[j].lower || row[j] > traj.limits[j].upper) return 0;
    }
  }
  return 1;
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "minmax_normalize");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFiniteInput, "minmax_normalize", fmt::format("index {}", i));
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 0.5);
  if (hi == lo) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] - lo) / range;
  }
  return out;
}

namespace {

NormalizedScores fuse(double mse_n, double smooth_n, double limit_n) {
  return {mse_n, smooth_n, limit_n, (mse_n + smooth_n + limit_n) / 3.0};
}

}  // namespace

std::vector<NormalizedScores> unified_scores(std::span<const RawScores> raw) {
  if (raw.empty()) throw Error(ErrorCode::kEmptyInput, "unified_scores");
  std::vector<double> mse, smooth, limit;
  mse.reserve(raw.size());
  smooth.reserve(raw.size());
  limit.reserve(raw.size());
  for (const auto& r : raw) {
    mse.push_back(r.mse);
    smooth.push_back(r.smooth);
    limit.push_back(static_cast<double>(r.limit));
  }
  const auto mse_n = minmax_normalize(mse);
  const auto smooth_n = minmax_normalize(smooth);
  const auto limit_n = minmax_normalize(limit);
  std::vector<NormalizedScores> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.push_back(fuse(mse_n[i], smooth_n[i], limit_n[i]));
  return out;
}

ExecutionReport execution_report(const JointTrajectory& traj) {
  if (traj.frames() < 1) throw Error(ErrorCode::kTooFewFrames, "execution_report", "empty trajectory");
  ExecutionReport rep;
  rep.duration = static_cast<double>(traj.frames() - 1) * traj.dt;
  if (traj.frames() >= 3) {
    const auto sd = second_difference_abs_sum(traj, 0, traj.frames());
    rep.mean_ang_accel = sd.abs_sum / static_cast<double>(sd.terms);
  }
  for (std::size_t k = 0; k < traj.frames(); ++k) {
    if (joint_limit_score(traj, k, 1) == 0) ++rep.overlimit_frames;
  }
  return rep;
}

SampleScores score_sample(const SampleRecord& sample, const MetricConfig& cfg) {
  if (cfg.window_length == 0) throw Error(ErrorCode::kInvalidConfig, "metrics.window_length", "must be >= 1");
  const auto& traj = sample.trajectory;
  SampleScores out;
  out.id = sample.id;

  if (!sample.prediction_windows.empty()) {
    double sum = 0.0;
    for (const auto& pair : sample.prediction_windows) {
      const std::size_t len = std::min(cfg.window_length, pair.window_len());
      sum += action_mse_score(pair.predicted.slice_rows(0, len), pair.reference.slice_rows(0, len));
    }
    out.mse = sum / static_cast<double>(sample.prediction_windows.size());
  }

  const bool windowed =
      cfg.smoothness_scope == SmoothnessScope::kPredictionWindows && !sample.prediction_windows.empty();
  if (windowed) {
    double smooth = 0.0;
    std::size_t counted = 0;
    int limit = 1;
    for (const auto& pair : sample.prediction_windows) {
      const std::size_t len = std::min(cfg.window_length, pair.window_len());
      limit = std::min(limit, joint_limit_score(traj, pair.window_start, len));
      if (len >= 3) {
        smooth += smoothness_score(traj, pair.window_start, len);
        ++counted;
      }
    }
    out.smooth = counted > 0 ? smooth / static_cast<double>(counted) : 0.0;
    out.limit = limit;
  } else {
    out.smooth = 0.0 - second_difference_abs_sum(traj, 0, traj.frames()).abs_sum;
    out.limit = joint_limit_score(traj, 0, traj.frames());
  }
  return out;
}

std::vector<ScoredSample> score_cohort(std::vector<SampleScores> raw) {
  if (raw.empty()) throw Error(ErrorCode::kEmptyInput, "score_cohort");
  std::vector<double> mse, smooth, limit;
  for (const auto& r : raw) {
    if (r.mse) mse.push_back(*r.mse);
    smooth.push_back(r.smooth);
    limit.push_back(static_cast<double>(r.limit));
  }
  const auto mse_n = mse.empty() ? std::vector<double>{} : minmax_normalize(mse);
  const auto smooth_n = minmax_normalize(smooth);
  const auto limit_n = minmax_normalize(limit);

  std::vector<ScoredSample> out;
  out.reserve(raw.size());
  std::size_t next_mse = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double m = raw[i].mse ? mse_n[next_mse++] : 0.5;
    out.push_back({std::move(raw[i]), fuse(m, smooth_n[i], limit_n[i])});
  }
  return out;
}

}  // namespace emma::metrics
