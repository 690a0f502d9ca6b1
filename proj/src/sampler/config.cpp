#include "emma/sampler/config.hpp"

#include <cmath>

#include "emma/core/error.hpp"

namespace emma::sampler {

std::string_view phase_name(Phase phase) { return phase == Phase::kUniform ? "uniform" : "adaptive"; }

std::optional<Phase> parse_phase(std::string_view text) {
  if (text == "uniform") return Phase::kUniform;
  if (text == "adaptive") return Phase::kAdaptive;
  return std::nullopt;
}

std::string_view strata_mode_name(StrataMode mode) {
  return mode == StrataMode::kGlobal ? "global" : "per_source";
}

std::optional<StrataMode> parse_strata_mode(std::string_view text) {
  if (text == "global") return StrataMode::kGlobal;
  if (text == "per_source") return StrataMode::kPerSource;
  return std::nullopt;
}

void SamplerConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::kInvalidConfig, "sampler.gamma", "must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidConfig, "sampler.lambda", "must be >= 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "sampler.alpha", "must lie in [0, 1]");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidConfig, "sampler.batch_size", "must be >= 1");
  if (switch_step() > total_steps) {
    throw Error(ErrorCode::kInvalidConfig, "sampler.phase_switch_step", "must not exceed total_steps");
  }
}

Phase phase_schedule(std::uint64_t step, const SamplerConfig& cfg) {
  return step < cfg.switch_step() ? Phase::kUniform : Phase::kAdaptive;
}

}  // namespace emma::sampler
