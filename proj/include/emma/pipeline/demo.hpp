#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emma/pipeline/config.hpp"

namespace emma::pipeline {

struct DemoOptions {
  std::size_t samples = 200;       // half real, half generated
  std::size_t frames = 60;
  std::size_t joints = 7;
  std::uint64_t total_steps = 4000;
  std::size_t batch_size = 64;
};

struct StratumRatio {
  std::string stratum;
  std::size_t hard = 0;
  std::size_t easy = 0;
  double expected = 0.0;  // mean hard weight / mean easy weight
  double measured = 0.0;  // per-sample draw frequency ratio, adaptive steps
  bool within_tolerance = false;
};

struct DemoSummary {
  std::size_t samples = 0;
  std::size_t generated = 0;
  std::size_t retained_generated = 0;
  std::size_t scored = 0;
  std::size_t adaptive_draws = 0;
  std::size_t filtered_draws = 0;  // must be 0
  std::size_t refresh_markers = 0;
  std::vector<StratumRatio> ratios;
  bool passed = false;
  std::filesystem::path out_dir;
};

// Relative tolerance of the hard/easy draw-ratio check.
inline constexpr double kDemoRatioTolerance = 0.05;

// Config the demo runs with: fixed thresholds and sampler settings, seeded.
PipelineConfig demo_config(std::uint64_t seed, const DemoOptions& opts = {});

// Writes a synthetic dataset of easy and hard episodes (with some low-quality
// generated ones) under `out_dir`, runs filter -> score -> sample on it and
// checks that hard samples are drawn at the rate the weight law predicts.
DemoSummary run_demo(std::uint64_t seed, const std::filesystem::path& out_dir, const DemoOptions& opts = {});

std::string format_demo_summary(const DemoSummary& summary);

}  // namespace emma::pipeline
