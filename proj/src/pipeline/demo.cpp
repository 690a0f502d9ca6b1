#include "emma/pipeline/demo.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "emma/core/binary_io.hpp"
#include "emma/core/error.hpp"
#include "emma/core/manifest.hpp"
#include "emma/pipeline/commands.hpp"
#include "emma/quality/matcher.hpp"
#include "emma/sampler/counter_rng.hpp"
#include "emma/sampler/plan.hpp"
#include "emma/sampler/weights.hpp"

namespace emma::pipeline {
namespace {

namespace fs = std::filesystem;
using sampler::CounterRng;

// Streams of the demo generator, so no two uses share variates.
enum Stream : std::uint64_t { kBase = 1, kSlope, kDepth, kDepthNoise, kImage, kNoiseImage, kPrompt, kFrameNoise };

enum class Defect { kNone, kDepth, kViews, kAlignment };

struct Plan {
  std::string id;
  Source source;
  bool hard;
  Defect defect;
};

constexpr double kJointLimit = 90.0;
constexpr std::size_t kImageSize = 32;
constexpr std::size_t kDepthSize = 8;
constexpr std::size_t kVideoFrames = 2;
constexpr std::size_t kViews = 3;
constexpr std::size_t kEmbedDim = 16;

std::vector<Plan> plan_samples(std::uint64_t seed, const DemoOptions& opts) {
  std::vector<Plan> out;
  const std::size_t n_real = opts.samples / 2;
  for (std::size_t i = 0; i < opts.samples; ++i) {
    const bool real = i < n_real;
    const std::size_t k = real ? i : i - n_real;
    Plan p;
    p.source = real ? Source::kReal : Source::kGenerated;
    p.id = fmt::format("{}_{:03d}", real ? "real" : "gen", k);
    p.hard = (k * 7 + seed) % 10 < 3;
    p.defect = Defect::kNone;
    if (!real && k % 5 == seed % 5) {
      static constexpr Defect kCycle[] = {Defect::kDepth, Defect::kViews, Defect::kAlignment};
      p.defect = kCycle[(k / 5) % 3];
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Integer-valued angles keep every derived score exact in binary32, so all
// easy samples share one raw score and all hard samples share another.
JointTrajectory make_trajectory(const CounterRng& rng, std::size_t sample, bool hard, const DemoOptions& opts) {
  JointTrajectory t;
  t.dt = 0.1;
  t.angles = Matrix(opts.frames, opts.joints);
  t.limits.assign(opts.joints, JointLimit{-kJointLimit, kJointLimit});
  for (std::size_t j = 0; j < opts.joints; ++j) {
    const double base = std::floor(rng.uniform(sample, j, kBase) * 61.0) - 30.0;
    const double slope = std::floor(rng.uniform(sample, j, kSlope) * 3.0) - 1.0;
    for (std::size_t f = 0; f < opts.frames; ++f) t.angles(f, j) = base + slope * static_cast<double>(f);
  }
  if (hard) {
    for (std::size_t f = 5; f < opts.frames; f += 10) {
      for (std::size_t j = 0; j < opts.joints; ++j) t.angles(f, j) += 20.0;
    }
    t.angles(opts.frames / 2, 0) += 200.0;
  }
  return t;
}

std::vector<ActionChunkPair> make_predictions(const JointTrajectory& t, bool hard) {
  std::vector<ActionChunkPair> windows;
  const std::size_t len = std::min<std::size_t>(20, t.frames());
  for (std::size_t start = 0; start + len <= t.frames(); start += len) {
    ActionChunkPair pair;
    pair.window_start = start;
    pair.reference = t.angles.slice_rows(start, len);
    pair.predicted = pair.reference;
    if (hard) {
      for (double& v : pair.predicted.values()) v += 1.0;
    }
    windows.push_back(std::move(pair));
  }
  return windows;
}

quality::ImageGrid noise_image(const CounterRng& rng, std::size_t sample, std::uint64_t tag, Stream stream) {
  quality::ImageGrid img{kImageSize, kImageSize, std::vector<double>(kImageSize * kImageSize)};
  for (std::size_t p = 0; p < img.pixels.size(); ++p) img.pixels[p] = rng.uniform(sample, tag * 4096 + p, stream);
  return img;
}

quality::ImageGrid shifted(const quality::ImageGrid& img, std::ptrdiff_t dx) {
  quality::ImageGrid out = img;
  const auto w = static_cast<std::ptrdiff_t>(img.width);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      const auto src = static_cast<std::size_t>(((x - dx) % w + w) % w);
      out.pixels[y * img.width + static_cast<std::size_t>(x)] = img.at(y, src);
    }
  }
  return out;
}

MatchCounts make_match_counts(const CounterRng& rng, std::size_t sample, bool defective,
                              const quality::Matcher& matcher) {
  MatchCounts counts;
  for (std::size_t f = 0; f < kVideoFrames; ++f) {
    const auto center = noise_image(rng, sample, f, kImage);
    const auto left = defective ? noise_image(rng, sample, 2 * f, kNoiseImage) : shifted(center, 8);
    const auto right = defective ? noise_image(rng, sample, 2 * f + 1, kNoiseImage) : shifted(center, -8);
    counts.left.push_back(quality::pixel_match_count(center, left, matcher));
    counts.right.push_back(quality::pixel_match_count(center, right, matcher));
  }
  return counts;
}

void make_depth(const CounterRng& rng, std::size_t sample, bool defective, DepthGrid& pred, DepthGrid& gt) {
  gt = DepthGrid{kVideoFrames, kDepthSize, kDepthSize, {}};
  gt.values.resize(gt.pixel_count());
  for (std::size_t p = 0; p < gt.values.size(); ++p) {
    gt.values[p] = static_cast<double>(static_cast<float>(1.0 + 4.0 * rng.uniform(sample, p, kDepth)));
  }
  pred = gt.scaled(0.5);
  if (defective) {
    for (std::size_t p = 0; p < pred.values.size(); ++p) pred.values[p] *= 0.5 + rng.uniform(sample, p, kDepthNoise);
  }
}

std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

// Positive-orthant prompts are mutually correlated, so a frame aligned with
// their sum scores well against each one.
EmbeddingSet make_prompts(const CounterRng& rng, std::size_t sample) {
  EmbeddingSet set{3, kEmbedDim, {}};
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> v(kEmbedDim);
    for (std::size_t d = 0; d < kEmbedDim; ++d) v[d] = rng.uniform(sample, c * kEmbedDim + d, kPrompt);
    for (double x : unit(std::move(v))) set.values.push_back(x);
  }
  return set;
}

// Aligned frames point at the sum of the prompt directions; misaligned frames
// are projected onto the prompts' orthogonal complement.
EmbeddingSet make_frame_embeddings(const CounterRng& rng, std::size_t sample, const EmbeddingSet& prompts,
                                   bool defective) {
  EmbeddingSet set{kVideoFrames * kViews, kEmbedDim, {}};
  for (std::size_t i = 0; i < set.count; ++i) {
    std::vector<double> v(kEmbedDim);
    for (std::size_t d = 0; d < kEmbedDim; ++d) {
      v[d] = 0.2 * (rng.uniform(sample, i * kEmbedDim + d, kFrameNoise) * 2.0 - 1.0);
    }
    if (defective) {
      // Gram-Schmidt against the three prompt vectors.
      std::vector<std::vector<double>> basis;
      for (std::size_t c = 0; c < 3; ++c) {
        auto b = std::vector<double>(prompts.vector(c).begin(), prompts.vector(c).end());
        for (const auto& q : basis) {
          double dot = 0.0;
          for (std::size_t d = 0; d < kEmbedDim; ++d) dot += b[d] * q[d];
          for (std::size_t d = 0; d < kEmbedDim; ++d) b[d] -= dot * q[d];
        }
        basis.push_back(unit(std::move(b)));
      }
      for (const auto& q : basis) {
        double dot = 0.0;
        for (std::size_t d = 0; d < kEmbedDim; ++d) dot += v[d] * q[d];
        for (std::size_t d = 0; d < kEmbedDim; ++d) v[d] -= dot * q[d];
      }
    } else {
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t d = 0; d < kEmbedDim; ++d) v[d] += prompts.vector(c)[d];
      }
    }
    for (double x : v) set.values.push_back(x);
  }
  return set;
}

void write_config(const fs::path& path, const PipelineConfig& cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, path.string(), "cannot open for writing");
  const auto& s = cfg.sampler;
  os << "{\n"
     << fmt::format("  \"filter\": {{\"min_mat_pix\": {}, \"max_sq_rel\": {}, \"min_overall_sim\": {}}},\n",
                    *cfg.filter.min_mat_pix, *cfg.filter.max_sq_rel, *cfg.filter.min_overall_sim)
     << fmt::format(
            "  \"sampler\": {{\"gamma\": {}, \"lambda\": {}, \"alpha\": {}, \"seed\": {}, \"total_steps\": {}, "
            "\"phase_switch_step\": {}, \"batch_size\": {}, \"strata_mode\": \"{}\"}},\n",
            s.gamma, s.lambda, s.alpha, s.seed, s.total_steps, s.switch_step(), s.batch_size,
            sampler::strata_mode_name(s.strata_mode))
     << fmt::format("  \"metrics\": {{\"window_length\": {}, \"smoothness_scope\": \"full_episode\"}}\n",
                    cfg.metrics.window_length)
     << "}\n";
}

}  // namespace

PipelineConfig demo_config(std::uint64_t seed, const DemoOptions& opts) {
  PipelineConfig cfg;
  cfg.filter.min_mat_pix = 8.0;
  cfg.filter.max_sq_rel = 0.05;
  cfg.filter.min_overall_sim = 0.3;
  cfg.sampler.gamma = 0.1;
  cfg.sampler.lambda = 1.0;
  cfg.sampler.alpha = 0.5;
  cfg.sampler.seed = seed;
  cfg.sampler.total_steps = opts.total_steps;
  cfg.sampler.phase_switch_step = opts.total_steps / 2;
  cfg.sampler.batch_size = opts.batch_size;
  cfg.sampler.strata_mode = sampler::StrataMode::kPerSource;
  cfg.validate();
  return cfg;
}

DemoSummary run_demo(std::uint64_t seed, const fs::path& out_dir, const DemoOptions& opts) {
  if (opts.samples < 20 || opts.frames < 31 || opts.joints < 1) {
    throw Error(ErrorCode::kInvalidConfig, "demo", "need >= 20 samples, >= 31 frames, >= 1 joint");
  }
  const PipelineConfig cfg = demo_config(seed, opts);
  const CounterRng rng(seed);
  const quality::PatchMatcher matcher(cfg.matcher);

  for (const char* sub : {"traj", "pred", "depth", "embed", "weights"}) fs::create_directories(out_dir / sub);

  const auto samples = plan_samples(seed, opts);
  DatasetManifest manifest;
  manifest.task = "synthetic";
  manifest.base_dir = out_dir;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& p = samples[i];
    ManifestEntry e;
    e.id = p.id;
    e.source = p.source;
    e.task = "synthetic";

    const auto traj = make_trajectory(rng, i, p.hard, opts);
    const std::string traj_rel = "traj/" + p.id + ".emtr";
    write_trajectory(out_dir / traj_rel, traj);
    e.trajectory = make_file_ref(out_dir, traj_rel);

    const std::string pred_rel = "pred/" + p.id + ".empr";
    write_predictions(out_dir / pred_rel, make_predictions(traj, p.hard));
    e.predictions = make_file_ref(out_dir, pred_rel);

    if (p.source == Source::kGenerated) {
      DepthGrid pred, gt;
      make_depth(rng, i, p.defect == Defect::kDepth, pred, gt);
      const std::string dp = "depth/" + p.id + ".pred.emdp";
      const std::string dg = "depth/" + p.id + ".gt.emdp";
      write_depth(out_dir / dp, pred);
      write_depth(out_dir / dg, gt);
      e.depth_pred = make_file_ref(out_dir, dp);
      e.depth_gt = make_file_ref(out_dir, dg);

      e.match_counts = make_match_counts(rng, i, p.defect == Defect::kViews, matcher);

      const auto prompts = make_prompts(rng, i);
      const std::string pr = "embed/" + p.id + ".prompt.emem";
      const std::string fr = "embed/" + p.id + ".frames.emem";
      write_embeddings(out_dir / pr, prompts);
      write_embeddings(out_dir / fr, make_frame_embeddings(rng, i, prompts, p.defect == Defect::kAlignment));
      e.prompt_embeddings = make_file_ref(out_dir, pr);
      e.prompt_tags = {"foreground", "background", "lighting"};
      e.frame_embeddings = make_file_ref(out_dir, fr);
    }
    manifest.entries.push_back(std::move(e));
  }
  write_manifest(out_dir / "manifest.jsonl", manifest);
  write_config(out_dir / "config.json", cfg);

  DemoSummary summary;
  summary.out_dir = out_dir;
  summary.samples = samples.size();

  const auto filtered = run_filter(out_dir / "manifest.jsonl", cfg, out_dir / "quality.jsonl",
                                   out_dir / "manifest.filtered.jsonl");
  summary.generated = filtered.generated;
  summary.retained_generated = filtered.retained;

  const auto scored = run_score(out_dir / "manifest.filtered.jsonl", cfg, out_dir / "scores.jsonl");
  summary.scored = scored.scored;

  SampleRequest req;
  req.manifest = out_dir / "manifest.filtered.jsonl";
  req.scores = out_dir / "scores.jsonl";
  req.plan_out = out_dir / "plan.jsonl";
  req.weights_dir = out_dir / "weights";
  std::ostringstream unused;
  summary.refresh_markers = run_sample(req, cfg, unused).refresh_markers;

  // Measure what the plan actually drew.
  const auto final_manifest = load_manifest(out_dir / "manifest.filtered.jsonl");
  const auto adaptive = sampler::read_weight_table(out_dir / "weights" / "weights_end.jsonl");
  std::set<std::string> filtered_ids;
  for (const auto& e : final_manifest.entries) {
    if (!e.retained()) filtered_ids.insert(e.id);
  }
  std::map<std::string, std::size_t> draws;
  std::ifstream plan_in(out_dir / "plan.jsonl");
  const std::uint64_t sw = cfg.sampler.switch_step();
  for (const auto& ev : sampler::read_text_plan(plan_in)) {
    const auto* batch = std::get_if<sampler::PlannedBatch>(&ev);
    if (!batch) continue;
    for (const auto& id : batch->ids) {
      if (filtered_ids.contains(id)) ++summary.filtered_draws;
      if (batch->step >= sw) {
        ++draws[id];
        ++summary.adaptive_draws;
      }
    }
  }

  std::map<std::string, bool> hard_by_id;
  for (const auto& p : samples) hard_by_id[p.id] = p.hard;
  bool ratios_ok = true;
  for (const auto stratum : {sampler::Stratum::kReal, sampler::Stratum::kGenerated}) {
    StratumRatio r;
    r.stratum = std::string(sampler::stratum_name(stratum));
    double hard_w = 0.0, easy_w = 0.0, hard_d = 0.0, easy_d = 0.0;
    for (const auto& e : adaptive.entries) {
      if (e.stratum != stratum || e.weight == 0.0) continue;
      const double d = static_cast<double>(draws[e.id]);
      if (hard_by_id.at(e.id)) {
        ++r.hard;
        hard_w += e.weight;
        hard_d += d;
      } else {
        ++r.easy;
        easy_w += e.weight;
        easy_d += d;
      }
    }
    if (r.hard == 0 || r.easy == 0 || easy_d == 0.0) {
      ratios_ok = false;
    } else {
      const double nh = static_cast<double>(r.hard);
      const double ne = static_cast<double>(r.easy);
      r.expected = (hard_w / nh) / (easy_w / ne);
      r.measured = (hard_d / nh) / (easy_d / ne);
      r.within_tolerance = std::abs(r.measured / r.expected - 1.0) <= kDemoRatioTolerance;
      ratios_ok = ratios_ok && r.within_tolerance;
    }
    summary.ratios.push_back(r);
  }
  summary.passed = ratios_ok && summary.filtered_draws == 0 && summary.refresh_markers == 1;
  return summary;
}

std::string format_demo_summary(const DemoSummary& s) {
  std::string out;
  out += fmt::format("samples {} (generated {}), retained {}/{} generated samples\n", s.samples, s.generated,
                     s.retained_generated, s.generated);
  out += fmt::format("scored {} retained samples, {} refresh marker(s), {} adaptive draws\n", s.scored,
                     s.refresh_markers, s.adaptive_draws);
  out += fmt::format("draws of filtered samples: {}\n", s.filtered_draws);
  for (const auto& r : s.ratios) {
    out += fmt::format("{:<9} hard/easy draw ratio {:.3f} (expected {:.3f}, {} hard / {} easy) {}\n", r.stratum,
                       r.measured, r.expected, r.hard, r.easy, r.within_tolerance ? "ok" : "OUT OF TOLERANCE");
  }
  out += s.passed ? "ratio law: PASS\n" : "ratio law: FAIL\n";
  return out;
}

}  // namespace emma::pipeline
