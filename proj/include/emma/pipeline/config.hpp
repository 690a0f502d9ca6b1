#pragma once

// Pipeline configuration file (JSON), every key optional:
//
//   {"filter":  {"min_mat_pix": 40, "max_sq_rel": 0.1, "min_overall_sim": 0.3},
//    "sampler": {"gamma": 0.1, "lambda": 1.0, "alpha": 0.5, "seed": 0,
//                "total_steps": 10000, "phase_switch_step": 5000,
//                "batch_size": 64, "strata_mode": "per_source"},
//    "metrics": {"window_length": 50, "smoothness_scope": "full_episode"},
//    "matcher": {"patch": 8, "stride": 8, "max_intensity": 1.0, "tau": 6.4e-5}}
//
// Unknown sections or keys are rejected. Environment variables named
// EMMA_<SECTION>_<KEY> (e.g. EMMA_SAMPLER_GAMMA) override the file; command
// line flags override both.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "emma/metrics/trajectory_metrics.hpp"
#include "emma/quality/filter.hpp"
#include "emma/quality/matcher.hpp"
#include "emma/sampler/config.hpp"

namespace emma::pipeline {

struct PipelineConfig {
  quality::FilterConfig filter;
  sampler::SamplerConfig sampler;
  metrics::MetricConfig metrics;
  quality::PatchMatcherOptions matcher;

  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

std::optional<std::string> process_env(std::string_view name);

// Applies one "section.key" setting given as JSON text (a bare word is taken
// as a string). Throws InvalidConfig for unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, std::string_view section, std::string_view key, std::string_view value,
                   std::string_view origin);

PipelineConfig parse_pipeline_config(std::string_view json_text, std::string_view origin);

// Defaults, then the file (if any), then the environment. Validated unless
// the caller has more overrides to apply first.
PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& file,
                                    const EnvLookup& env = process_env, bool validate = true);

}  // namespace emma::pipeline
