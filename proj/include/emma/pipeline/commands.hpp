#pragma once

// Library entry points behind the emma command-line subcommands. Each one
// reads its inputs, writes its outputs to new files, and never modifies the
// input manifest.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emma/pipeline/config.hpp"

namespace emma::pipeline {

struct FilterSummary {
  std::size_t generated = 0;
  std::size_t retained = 0;
};

// Scores every generated sample, writes the quality report and an updated
// manifest with failing samples zero-weighted.
FilterSummary run_filter(const std::filesystem::path& manifest_path, const PipelineConfig& cfg,
                         const std::filesystem::path& quality_out, const std::filesystem::path& manifest_out);

struct ScoreSummary {
  std::size_t scored = 0;
  std::vector<std::string> missing_predictions;
};

// Raw and unified scores for every retained sample, sorted by id.
ScoreSummary run_score(const std::filesystem::path& manifest_path, const PipelineConfig& cfg,
                       const std::filesystem::path& scores_out,
                       const std::optional<std::filesystem::path>& prediction_dir = std::nullopt);

struct SampleRequest {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> scores;
  std::filesystem::path plan_out;  // "-" for stdout
  bool binary = false;
  std::uint64_t first_step = 0;
  std::optional<std::uint64_t> last_step;  // defaults to total_steps
  // Writes weights_start.jsonl and weights_end.jsonl: the tables in effect at
  // the first and last step of the range.
  std::optional<std::filesystem::path> weights_dir;
};

struct SampleSummary {
  std::size_t batches = 0;
  std::size_t refresh_markers = 0;
};

SampleSummary run_sample(const SampleRequest& req, const PipelineConfig& cfg, std::ostream& stdout_stream);

// Behavior score and success rate per task, plus an average row when more
// than one task is present. `task` restricts the report to one task.
std::string run_eval(const std::filesystem::path& logs, const std::vector<std::filesystem::path>& rule_tables,
                     const std::optional<std::string>& task = std::nullopt);

// Mean execution time, smoothness and joint overlimit per task:
// "task\tTime\tSmth\tJOL".
std::string run_exec(const std::filesystem::path& manifest_path, const std::optional<std::string>& task = std::nullopt);

// Parses "A..B" into a half-open step range.
std::pair<std::uint64_t, std::uint64_t> parse_step_range(const std::string& text);

}  // namespace emma::pipeline
