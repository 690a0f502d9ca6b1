#pragma once

// Score file: one JSON object per line, sorted by id, fields in the order
//   id, r_mse, r_smooth, r_limit, mse_n, smooth_n, limit_n, s
// with reals printed to 9 significant digits. r_mse is null for samples
// scored without predictions.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emma/metrics/trajectory_metrics.hpp"

namespace emma::metrics {

std::string score_line(const ScoredSample& sample);

// Writes `samples` sorted by id.
void write_scores(std::ostream& out, std::vector<ScoredSample> samples);
void write_scores(const std::filesystem::path& path, std::vector<ScoredSample> samples);

struct ScoreRecord {
  std::string id;
  std::optional<double> r_mse;
  double r_smooth = 0.0;
  int r_limit = 1;
  NormalizedScores normalized;
};

std::map<std::string, ScoreRecord> read_scores(const std::filesystem::path& path);

}  // namespace emma::metrics
