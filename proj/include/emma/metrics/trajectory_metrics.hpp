#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emma/core/manifest.hpp"
#include "emma/core/trajectory.hpp"

namespace emma::metrics {

// Per-sample performance scores before cohort normalization. Higher is
// better for every channel; mse and smooth are <= 0, limit is 0 or 1.
struct RawScores {
  double mse = 0.0;
  double smooth = 0.0;
  int limit = 1;
};

struct NormalizedScores {
  double mse_n = 0.0;
  double smooth_n = 0.0;
  double limit_n = 0.0;
  double fused = 0.0;  // (mse_n + smooth_n + limit_n) / 3
};

struct ExecutionReport {
  double duration = 0.0;                  // seconds, (frames - 1) * dt
  std::optional<double> mean_ang_accel;   // deg/s^2, absent below 3 frames
  std::size_t overlimit_frames = 0;
};

// Negated mean over the window of the squared L2 action error per step.
double action_mse_score(const Matrix& predicted, const Matrix& reference);
double action_mse_score(const ActionChunkPair& pair);

// Sum over every consecutive frame triple in [start, start + len) and every
// joint of |a[k+2] - 2 a[k+1] + a[k]| / dt^2. Shared by smoothness_score and
// execution_report.
struct SecondDifferenceSum {
  double abs_sum = 0.0;
  std::size_t terms = 0;  // triples * joints
};
SecondDifferenceSum second_difference_abs_sum(const JointTrajectory& traj, std::size_t start, std::size_t len);

// Negated second-difference sum. Requires len >= 3 (WindowTooShort).
double smoothness_score(const JointTrajectory& traj, std::size_t start, std::size_t len);

// 1 iff every angle in the window lies within its joint's inclusive limits.
int joint_limit_score(const JointTrajectory& traj, std::size_t start, std::size_t len);

// (v - min) / (max - min); an all-equal input maps to 0.5 everywhere.
std::vector<double> minmax_normalize(std::span<const double> values);

// Normalizes each channel across the whole cohort and fuses them.
std::vector<NormalizedScores> unified_scores(std::span<const RawScores> raw);

ExecutionReport execution_report(const JointTrajectory& traj);

enum class SmoothnessScope { kFullEpisode, kPredictionWindows };

struct MetricConfig {
  // Upper bound L on the number of frames scored per prediction window.
  std::size_t window_length = 50;
  SmoothnessScope smoothness_scope = SmoothnessScope::kFullEpisode;
};

// Raw scores of one sample. `mse` is absent when the sample has no
// prediction windows.
struct SampleScores {
  std::string id;
  std::optional<double> mse;
  double smooth = 0.0;
  int limit = 1;
};

SampleScores score_sample(const SampleRecord& sample, const MetricConfig& cfg);

struct ScoredSample {
  SampleScores raw;
  NormalizedScores normalized;
};

// Cohort normalization for samples that may lack an mse channel: the channel
// is normalized over the samples that have it and the rest take the neutral
// 0.5.
std::vector<ScoredSample> score_cohort(std::vector<SampleScores> raw);

}  // namespace emma::metrics
