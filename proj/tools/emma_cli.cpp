// emma: filter -> score -> sample -> evaluate, plus a synthetic demo.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "emma/core/error.hpp"
#include "emma/pipeline/commands.hpp"
#include "emma/pipeline/config.hpp"
#include "emma/pipeline/demo.hpp"

namespace fs = std::filesystem;
using namespace emma;
using namespace emma::pipeline;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// Flags that override config values; unset flags leave the file/env value.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<std::uint64_t> switch_step;
  std::optional<std::uint64_t> batch_size;
};

struct Options {
  std::optional<fs::path> config;
  fs::path manifest;
  std::optional<fs::path> scores;
  std::optional<fs::path> out;
  std::optional<fs::path> quality_out;
  std::optional<fs::path> weights_dir;
  std::optional<fs::path> pred_dir;
  std::optional<std::string> steps;
  std::optional<std::string> task;
  fs::path logs;
  std::vector<fs::path> rules;
  bool binary = false;
  Overrides ov;
};

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig cfg = load_pipeline_config(o.config, process_env, /*validate=*/false);
  auto& s = cfg.sampler;
  if (o.ov.seed) s.seed = *o.ov.seed;
  if (o.ov.alpha) s.alpha = *o.ov.alpha;
  if (o.ov.gamma) s.gamma = *o.ov.gamma;
  if (o.ov.lambda) s.lambda = *o.ov.lambda;
  if (o.ov.switch_step) s.phase_switch_step = *o.ov.switch_step;
  if (o.ov.batch_size) s.batch_size = *o.ov.batch_size;
  cfg.validate();
  return cfg;
}

fs::path beside(const fs::path& manifest, std::string_view suffix) {
  return manifest.parent_path() / (manifest.stem().string() + std::string(suffix));
}

void add_sampler_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.ov.seed, "Sampler seed");
  cmd->add_option("--alpha", o.ov.alpha, "Probability of drawing from the generated stratum");
  cmd->add_option("--gamma", o.ov.gamma, "Weight floor");
  cmd->add_option("--lambda", o.ov.lambda, "Hardness weight");
  cmd->add_option("--switch-step", o.ov.switch_step, "First adaptive step (default: half the schedule)");
  cmd->add_option("--batch-size", o.ov.batch_size, "Samples per batch");
}

int cmd_filter(const Options& o) {
  const auto cfg = resolve_config(o);
  const fs::path manifest_out = o.out.value_or(beside(o.manifest, ".filtered.jsonl"));
  const fs::path quality_out = o.quality_out.value_or(beside(o.manifest, ".quality.jsonl"));
  const auto s = run_filter(o.manifest, cfg, quality_out, manifest_out);
  fmt::print("retained {}/{} generated samples\n", s.retained, s.generated);
  return 0;
}

int cmd_score(const Options& o) {
  const auto cfg = resolve_config(o);
  const fs::path out = o.out.value_or(beside(o.manifest, ".scores.jsonl"));
  const auto s = run_score(o.manifest, cfg, out, o.pred_dir);
  for (const auto& id : s.missing_predictions) {
    fmt::print(stderr, "warning: {}\n", Error(ErrorCode::kMissingScore, id, "no predictions, r_mse omitted").what());
  }
  fmt::print(stderr, "scored {} samples -> {}\n", s.scored, out.string());
  return 0;
}

int cmd_sample(const Options& o) {
  auto cfg = resolve_config(o);
  SampleRequest req;
  req.manifest = o.manifest;
  req.scores = o.scores;
  req.plan_out = o.out.value_or("-");
  req.binary = o.binary;
  req.weights_dir = o.weights_dir;
  if (o.steps) {
    const auto [a, b] = parse_step_range(*o.steps);
    req.first_step = a;
    req.last_step = b;
  }
  const auto s = run_sample(req, cfg, std::cout);
  std::cout.flush();
  fmt::print(stderr, "{} batches, {} refresh marker(s)\n", s.batches, s.refresh_markers);
  return 0;
}

int cmd_eval(const Options& o) {
  fmt::print("{}", run_eval(o.logs, o.rules, o.task));
  return 0;
}

int cmd_exec(const Options& o) {
  fmt::print("{}", run_exec(o.manifest, o.task));
  return 0;
}

int cmd_demo(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = run_demo(o.ov.seed.value_or(0), o.out.value_or("emma_demo"));
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  fmt::print("{}", format_demo_summary(s));
  fmt::print("outputs in {} ({:.2f} s)\n", s.out_dir.string(), dt.count());
  return s.passed ? 0 : kDataError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emma: hard-sample-aware training data engine"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Pipeline config file (JSON)")->check(CLI::ExistingFile);

  auto* filter = app.add_subcommand("filter", "Quality-filter generated samples");
  filter->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  filter->add_option("--out", o.out, "Updated manifest (default: <manifest>.filtered.jsonl)");
  filter->add_option("--quality-out", o.quality_out, "Quality report (default: <manifest>.quality.jsonl)");

  auto* score = app.add_subcommand("score", "Score retained samples");
  score->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  score->add_option("--predictions", o.pred_dir, "Directory of <id>.empr files overriding the manifest");
  score->add_option("--out", o.out, "Score file (default: <manifest>.scores.jsonl)");

  auto* sample = app.add_subcommand("sample", "Emit the batch plan");
  sample->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  sample->add_option("--scores", o.scores, "Score file (needed for adaptive steps)");
  sample->add_option("--steps", o.steps, "Step range A..B (default: the whole schedule)");
  sample->add_option("--out", o.out, "Plan file, '-' for stdout");
  sample->add_flag("--binary", o.binary, "Write EMBT frames instead of JSON lines");
  sample->add_option("--weights-dir", o.weights_dir, "Also write the weight tables here");
  add_sampler_flags(sample, o);

  auto* eval = app.add_subcommand("eval", "Behavior score and success rate from episode logs");
  eval->add_option("--logs", o.logs, "Episode logs (JSON lines)")->required();
  eval->add_option("--rules", o.rules, "Rule table files")->required();
  eval->add_option("--task", o.task, "Only this task");

  auto* exec = app.add_subcommand("exec", "Execution time, smoothness and joint overlimit");
  exec->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  exec->add_option("--task", o.task, "Only this task");

  auto* demo = app.add_subcommand("demo", "Run the pipeline on a synthetic dataset");
  demo->add_option("--seed", o.ov.seed, "Seed");
  demo->add_option("--out", o.out, "Output directory (default: emma_demo)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*filter) return cmd_filter(o);
    if (*score) return cmd_score(o);
    if (*sample) return cmd_sample(o);
    if (*eval) return cmd_eval(o);
    if (*exec) return cmd_exec(o);
    if (*demo) return cmd_demo(o);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDataError;
  }
  return kUsageError;
}
