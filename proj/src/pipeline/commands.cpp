#include "emma/pipeline/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "emma/behavior/behavior_score.hpp"
#include "emma/core/error.hpp"
#include "emma/core/manifest.hpp"
#include "emma/metrics/score_io.hpp"
#include "emma/metrics/trajectory_metrics.hpp"
#include "emma/quality/filter.hpp"
#include "emma/sampler/plan.hpp"
#include "emma/sampler/weights.hpp"

namespace emma::pipeline {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, path.string(), "cannot open for writing");
  return os;
}

void refuse_overwrite(const std::filesystem::path& input, const std::filesystem::path& output) {
  std::error_code ec;
  if (std::filesystem::exists(output) && std::filesystem::equivalent(input, output, ec)) {
    throw Error(ErrorCode::kIo, output.string(), "refusing to overwrite the input manifest");
  }
}

}  // namespace

FilterSummary run_filter(const std::filesystem::path& manifest_path, const PipelineConfig& cfg,
                         const std::filesystem::path& quality_out, const std::filesystem::path& manifest_out) {
  refuse_overwrite(manifest_path, manifest_out);
  DatasetManifest manifest = load_manifest(manifest_path);

  std::vector<SampleRecord> records;
  records.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    SampleRecord r;
    r.id = e.id;
    r.source = e.source;
    r.task = e.task;
    r.weight = e.weight;
    if (e.source == Source::kGenerated) r.quality = quality::evaluate_entry(manifest, e);
    records.push_back(std::move(r));
  }
  records = quality::apply_filter(std::move(records), cfg.filter);

  FilterSummary summary;
  std::vector<std::pair<std::string, std::string>> lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.source != Source::kGenerated) continue;
    ++summary.generated;
    if (r.quality->passed()) ++summary.retained;
    auto& entry = manifest.entries[i];
    entry.weight = r.weight;
    entry.verdict = r.quality->failed;
    lines.emplace_back(r.id, quality::quality_line(r.id, *r.quality));
  }
  std::sort(lines.begin(), lines.end());
  auto qos = open_out(quality_out);
  for (const auto& [id, line] : lines) qos << line << '\n';
  write_manifest(manifest_out, manifest);
  return summary;
}

ScoreSummary run_score(const std::filesystem::path& manifest_path, const PipelineConfig& cfg,
                       const std::filesystem::path& scores_out,
                       const std::optional<std::filesystem::path>& prediction_dir) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  LoadOptions opts;
  opts.prediction_dir = prediction_dir;

  ScoreSummary summary;
  std::vector<metrics::SampleScores> raw;
  for (const auto& e : manifest.entries) {
    if (!e.retained()) continue;
    const SampleRecord rec = load_sample(manifest, e, opts);
    auto s = metrics::score_sample(rec, cfg.metrics);
    if (!s.mse) summary.missing_predictions.push_back(e.id);
    raw.push_back(std::move(s));
  }
  if (raw.empty()) throw Error(ErrorCode::kEmptyInput, manifest_path.filename().string(), "no retained samples");
  summary.scored = raw.size();
  metrics::write_scores(scores_out, metrics::score_cohort(std::move(raw)));
  return summary;
}

SampleSummary run_sample(const SampleRequest& req, const PipelineConfig& cfg, std::ostream& stdout_stream) {
  const auto& scfg = cfg.sampler;
  scfg.validate();
  const DatasetManifest manifest = load_manifest(req.manifest);
  const std::uint64_t first = req.first_step;
  const std::uint64_t last = req.last_step.value_or(scfg.total_steps);
  if (first >= last || last > scfg.total_steps) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("steps {}..{}", first, last),
                fmt::format("range must be non-empty and within [0, {}]", scfg.total_steps));
  }

  std::map<std::string, metrics::ScoreRecord> scores;
  if (req.scores) scores = metrics::read_scores(*req.scores);

  std::vector<sampler::Candidate> cohort;
  for (const auto& e : manifest.entries) {
    sampler::Candidate c{e.id, e.source, e.retained(), std::nullopt};
    if (auto it = scores.find(e.id); it != scores.end()) c.score = it->second.normalized.fused;
    cohort.push_back(std::move(c));
  }

  const std::uint64_t sw = scfg.switch_step();
  std::optional<sampler::WeightTable> uniform;
  std::optional<sampler::WeightTable> adaptive;
  auto table_for = [&](std::uint64_t step) -> const sampler::WeightTable& {
    if (sampler::phase_schedule(step, scfg) == sampler::Phase::kUniform) {
      if (!uniform) uniform = sampler::compute_weights(cohort, scfg, sampler::Phase::kUniform);
      return *uniform;
    }
    if (!req.scores) throw Error(ErrorCode::kMissingScore, "scores", "adaptive steps need a score file (--scores)");
    if (!adaptive) adaptive = sampler::compute_weights(cohort, scfg, sampler::Phase::kAdaptive);
    return *adaptive;
  };
  const auto& start_table = table_for(first);
  const auto& end_table = table_for(last - 1);
  if (first < sw && last > sw) table_for(sw);

  if (req.weights_dir) {
    std::filesystem::create_directories(*req.weights_dir);
    sampler::write_weight_table(*req.weights_dir / "weights_start.jsonl", start_table);
    sampler::write_weight_table(*req.weights_dir / "weights_end.jsonl", end_table);
  }

  sampler::EpochPlan plan(scfg, uniform, adaptive, first, last);
  std::ofstream file;
  std::ostream* out = &stdout_stream;
  if (req.plan_out != "-") {
    file = open_out(req.plan_out);
    out = &file;
  }

  SampleSummary summary;
  auto count = [&](const sampler::PlanEvent& ev) {
    if (std::holds_alternative<sampler::RefreshMarker>(ev)) {
      ++summary.refresh_markers;
    } else {
      ++summary.batches;
    }
  };
  if (req.binary) {
    sampler::PlanBinaryWriter writer(*out, plan);
    while (auto ev = plan.next()) {
      writer.write(*ev);
      count(*ev);
    }
  } else {
    sampler::PlanTextWriter writer(*out, plan);
    while (auto ev = plan.next()) {
      writer.write(*ev);
      count(*ev);
    }
  }
  out->flush();
  if (!*out) throw Error(ErrorCode::kIo, req.plan_out.string(), "write failed");
  return summary;
}

std::string run_eval(const std::filesystem::path& logs, const std::vector<std::filesystem::path>& rule_tables,
                     const std::optional<std::string>& task) {
  std::map<std::string, behavior::RuleTable> tables;
  for (const auto& p : rule_tables) {
    auto t = behavior::load_rule_table(p);
    const std::string task = t.task;
    if (!tables.emplace(task, std::move(t)).second) throw Error(ErrorCode::kDuplicateId, task, p.string());
  }
  std::map<std::string, std::pair<std::vector<int>, std::vector<bool>>> per_task;
  for (const auto& log : behavior::load_episode_logs(logs)) {
    if (task && log.task != *task) continue;
    auto it = tables.find(log.task);
    if (it == tables.end()) throw Error(ErrorCode::kTaskMismatch, log.task, "no rule table for this task");
    auto& [scores, wins] = per_task[log.task];
    scores.push_back(behavior::score_episode(log, it->second));
    wins.push_back(log.success);
  }
  if (per_task.empty()) throw Error(ErrorCode::kEmptyInput, logs.filename().string(), "no episodes");

  std::string out = "task\tScore\tSR\tN\n";
  double score_sum = 0.0;
  double sr_sum = 0.0;
  for (const auto& [task, data] : per_task) {
    const auto s = behavior::aggregate(data.first, data.second);
    out += fmt::format("{}\t{}\t{}\t{}\n", task, behavior::format_mean_score(s.mean_score),
                       behavior::format_success_rate(s.success_rate), s.episodes);
    score_sum += s.mean_score;
    sr_sum += s.success_rate;
  }
  if (per_task.size() > 1) {
    const auto n = static_cast<double>(per_task.size());
    out += fmt::format("avg\t{}\t{}\t-\n", behavior::format_mean_score(score_sum / n),
                       behavior::format_success_rate(sr_sum / n));
  }
  return out;
}

std::string run_exec(const std::filesystem::path& manifest_path, const std::optional<std::string>& task) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  struct Acc {
    double time = 0.0;
    double accel = 0.0;
    std::size_t accel_n = 0;
    double jol = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> per_task;
  LoadOptions opts;
  opts.predictions = false;
  for (const auto& e : manifest.entries) {
    if (task && e.task != *task) continue;
    const auto rec = load_sample(manifest, e, opts);
    const auto rep = metrics::execution_report(rec.trajectory);
    auto& acc = per_task[e.task];
    acc.time += rep.duration;
    acc.jol += static_cast<double>(rep.overlimit_frames);
    if (rep.mean_ang_accel) {
      acc.accel += *rep.mean_ang_accel;
      ++acc.accel_n;
    }
    ++acc.n;
  }
  if (per_task.empty()) throw Error(ErrorCode::kEmptyInput, manifest_path.filename().string(), "no samples");
  std::string out = "task\tTime\tSmth\tJOL\n";
  for (const auto& [task, acc] : per_task) {
    const auto n = static_cast<double>(acc.n);
    const std::string smth = acc.accel_n > 0 ? fmt::format("{:.3f}", acc.accel / static_cast<double>(acc.accel_n))
                                             : std::string("n/a");
    out += fmt::format("{}\t{:.2f}\t{}\t{:.1f}\n", task, acc.time / n, smth, acc.jol / n);
  }
  return out;
}

std::pair<std::uint64_t, std::uint64_t> parse_step_range(const std::string& text) {
  const auto dots = text.find("..");
  auto parse = [&](std::string_view part) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--steps", fmt::format("expected A..B, got \"{}\"", text));
    }
    return v;
  };
  if (dots == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--steps", "expected A..B");
  const std::string_view sv(text);
  return {parse(sv.substr(0, dots)), parse(sv.substr(dots + 2))};
}

}  // namespace emma::pipeline
