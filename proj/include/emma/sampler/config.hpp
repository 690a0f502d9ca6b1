#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace emma::sampler {

enum class Phase { kUniform, kAdaptive };
enum class StrataMode { kGlobal, kPerSource };

std::string_view phase_name(Phase phase);
std::optional<Phase> parse_phase(std::string_view text);
std::string_view strata_mode_name(StrataMode mode);
std::optional<StrataMode> parse_strata_mode(std::string_view text);

struct SamplerConfig {
  double gamma = 0.1;    // minimum support, > 0
  double lambda = 1.0;   // emphasis on hard samples, >= 0
  double alpha = 0.5;    // probability of drawing from the generated stratum
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 10000;
  // First adaptive step. Defaults to total_steps / 2; equal to total_steps
  // means weights never change (fixed mixing).
  std::optional<std::uint64_t> phase_switch_step;
  std::size_t batch_size = 64;
  StrataMode strata_mode = StrataMode::kPerSource;

  std::uint64_t switch_step() const noexcept { return phase_switch_step.value_or(total_steps / 2); }
  // Throws InvalidConfig naming the offending field.
  void validate() const;
};

// UNIFORM strictly before the switch step, ADAPTIVE from it onwards.
Phase phase_schedule(std::uint64_t step, const SamplerConfig& cfg);

}  // namespace emma::sampler
