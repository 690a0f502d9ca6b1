#include "emma/pipeline/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "emma/core/error.hpp"

namespace emma::pipeline {
namespace {

using nlohmann::json;

struct Key {
  std::string_view section;
  std::string_view key;
};

constexpr std::array kKeys = {
    Key{"filter", "min_mat_pix"},       Key{"filter", "max_sq_rel"},        Key{"filter", "min_overall_sim"},
    Key{"sampler", "gamma"},            Key{"sampler", "lambda"},           Key{"sampler", "alpha"},
    Key{"sampler", "seed"},             Key{"sampler", "total_steps"},      Key{"sampler", "phase_switch_step"},
    Key{"sampler", "batch_size"},       Key{"sampler", "strata_mode"},      Key{"metrics", "window_length"},
    Key{"metrics", "smoothness_scope"}, Key{"matcher", "patch"},            Key{"matcher", "stride"},
    Key{"matcher", "max_intensity"},    Key{"matcher", "tau"},
};

[[noreturn]] void bad(std::string_view section, std::string_view key, std::string_view origin, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, fmt::format("{}.{}", section, key), fmt::format("{} ({})", why, origin));
}

double as_real(const json& v, std::string_view s, std::string_view k, std::string_view origin) {
  if (!v.is_number()) bad(s, k, origin, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, std::string_view s, std::string_view k, std::string_view origin) {
  if (!v.is_number_unsigned()) bad(s, k, origin, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<double> as_threshold(const json& v, std::string_view s, std::string_view k, std::string_view origin) {
  if (v.is_null()) return std::nullopt;
  return as_real(v, s, k, origin);
}

std::string as_string(const json& v, std::string_view s, std::string_view k, std::string_view origin) {
  if (!v.is_string()) bad(s, k, origin, "expected a string");
  return v.get<std::string>();
}

void apply_json(PipelineConfig& cfg, std::string_view s, std::string_view k, const json& v, std::string_view origin) {
  if (s == "filter") {
    if (k == "min_mat_pix") return void(cfg.filter.min_mat_pix = as_threshold(v, s, k, origin));
    if (k == "max_sq_rel") return void(cfg.filter.max_sq_rel = as_threshold(v, s, k, origin));
    if (k == "min_overall_sim") return void(cfg.filter.min_overall_sim = as_threshold(v, s, k, origin));
  } else if (s == "sampler") {
    auto& c = cfg.sampler;
    if (k == "gamma") return void(c.gamma = as_real(v, s, k, origin));
    if (k == "lambda") return void(c.lambda = as_real(v, s, k, origin));
    if (k == "alpha") return void(c.alpha = as_real(v, s, k, origin));
    if (k == "seed") return void(c.seed = as_count(v, s, k, origin));
    if (k == "total_steps") return void(c.total_steps = as_count(v, s, k, origin));
    if (k == "phase_switch_step") {
      if (v.is_null()) return void(c.phase_switch_step.reset());
      return void(c.phase_switch_step = as_count(v, s, k, origin));
    }
    if (k == "batch_size") return void(c.batch_size = as_count(v, s, k, origin));
    if (k == "strata_mode") {
      const auto mode = sampler::parse_strata_mode(as_string(v, s, k, origin));
      if (!mode) bad(s, k, origin, "expected \"global\" or \"per_source\"");
      return void(c.strata_mode = *mode);
    }
  } else if (s == "metrics") {
    if (k == "window_length") return void(cfg.metrics.window_length = as_count(v, s, k, origin));
    if (k == "smoothness_scope") {
      const auto text = as_string(v, s, k, origin);
      if (text == "full_episode") return void(cfg.metrics.smoothness_scope = metrics::SmoothnessScope::kFullEpisode);
      if (text == "prediction_windows") {
        return void(cfg.metrics.smoothness_scope = metrics::SmoothnessScope::kPredictionWindows);
      }
      bad(s, k, origin, "expected \"full_episode\" or \"prediction_windows\"");
    }
  } else if (s == "matcher") {
    if (k == "patch") return void(cfg.matcher.patch = as_count(v, s, k, origin));
    if (k == "stride") return void(cfg.matcher.stride = as_count(v, s, k, origin));
    if (k == "max_intensity") return void(cfg.matcher.max_intensity = as_real(v, s, k, origin));
    if (k == "tau") {
      if (v.is_null()) return void(cfg.matcher.tau.reset());
      return void(cfg.matcher.tau = as_real(v, s, k, origin));
    }
  }
  bad(s, k, origin, "unknown setting");
}

std::string env_name(Key k) {
  std::string name = fmt::format("EMMA_{}_{}", k.section, k.key);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
  return name;
}

}  // namespace

void PipelineConfig::validate() const {
  filter.validate();
  sampler.validate();
  if (metrics.window_length < 1) throw Error(ErrorCode::kInvalidConfig, "metrics.window_length", "must be >= 1");
  if (matcher.patch < 1 || matcher.stride < 1) {
    throw Error(ErrorCode::kInvalidConfig, "matcher", "patch and stride must be >= 1");
  }
  if (!(matcher.max_intensity > 0.0)) throw Error(ErrorCode::kInvalidConfig, "matcher.max_intensity", "must be > 0");
  if (matcher.tau && !(*matcher.tau >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "matcher.tau", "must be >= 0");
}

std::optional<std::string> process_env(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

void apply_setting(PipelineConfig& cfg, std::string_view section, std::string_view key, std::string_view value,
                   std::string_view origin) {
  json v = json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) v = std::string(value);
  apply_json(cfg, section, key, v, origin);
}

PipelineConfig parse_pipeline_config(std::string_view json_text, std::string_view origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string(origin), e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::kInvalidConfig, std::string(origin), "expected a JSON object");
  PipelineConfig cfg;
  for (const auto& [section, body] : root.items()) {
    if (std::none_of(kKeys.begin(), kKeys.end(), [&](const Key& k) { return k.section == section; })) {
      throw Error(ErrorCode::kInvalidConfig, section, fmt::format("unknown section ({})", origin));
    }
    if (!body.is_object()) {
      throw Error(ErrorCode::kInvalidConfig, section, fmt::format("section must be an object ({})", origin));
    }
    for (const auto& [key, value] : body.items()) apply_json(cfg, section, key, value, origin);
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                                    bool validate) {
  PipelineConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::kMissingFile, file->filename().string(), file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse_pipeline_config(ss.str(), file->string());
  }
  for (const Key k : kKeys) {
    const std::string name = env_name(k);
    if (auto v = env(name)) apply_setting(cfg, k.section, k.key, *v, name);
  }
  if (validate) cfg.validate();
  return cfg;
}

}  // namespace emma::pipeline
