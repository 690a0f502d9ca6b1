// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Tolerances are the published ones, not tuned to the implementation.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emma/behavior/behavior_score.hpp"
#include "emma/metrics/trajectory_metrics.hpp"
#include "emma/pipeline/commands.hpp"
#include "emma/pipeline/demo.hpp"
#include "emma/quality/depth.hpp"
#include "emma/quality/filter.hpp"
#include "emma/sampler/plan.hpp"
#include "emma/sampler/weights.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace emma;
using emma::test::rel_close;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kRules = EMMA_RULES_DIR;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int failures = 0;

void report(const std::string& name, const Verdict& v) {
  if (!v.ok) ++failures;
  std::cout << (v.ok ? "PASS " : "FAIL ") << name << (v.detail.empty() ? "" : ": " + v.detail) << "\n";
}

template <class F>
void criterion(const std::string& name, F&& body) {
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("threw ") + e.what());
  }
  report(name, v);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& tag) {
  const auto p = fs::temp_directory_path() / fmt::format("emma_accept_{}_{}", tag, ::getpid());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

sampler::Candidate cand(std::string id, Source src, double score, bool retained = true) {
  return {std::move(id), src, retained, score};
}

// Draws until at least `n` ids have been produced and counts them by id.
template <class F>
std::size_t draw(const sampler::BatchSampler& s, std::size_t n, F&& on_id) {
  std::size_t total = 0;
  for (std::uint64_t step = 0; total < n; ++step) {
    for (const auto& id : s.draw_batch(step)) {
      on_id(id);
      ++total;
    }
  }
  return total;
}

void metric_oracle(Verdict& v) {
  const auto t0 = Clock::now();
  emma::test::Gen g(20240607);
  for (int trial = 0; trial < 1000 && v.ok; ++trial) {
    const auto t = g.trajectory(20, 7, 3);
    const std::size_t len = g.size(3, t.frames());
    const std::size_t start = g.size(0, t.frames() - len);
    const ActionChunkPair p{g.matrix(len, t.joints()), window(t, start, len), start};
    v.require(rel_close(metrics::action_mse_score(p), emma::test::brute::mse(p.predicted, p.reference), 1e-9),
              fmt::format("r_mse differs on trial {}", trial));
    v.require(rel_close(metrics::smoothness_score(t, start, len), emma::test::brute::smooth(t, start, len), 1e-9),
              fmt::format("r_smooth differs on trial {}", trial));
    v.require(metrics::joint_limit_score(t, start, len) == emma::test::brute::limit(t, start, len),
              fmt::format("r_limit differs on trial {}", trial));
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, fmt::format("took {:.2f} s", secs));
  if (v.ok) v.detail = fmt::format("1000 trajectories in {:.3f} s", secs);
}

void depth_fixture(Verdict& v) {
  const auto m = quality::depth_metrics(DepthGrid{1, 1, 3, {1, 1, 3}}, DepthGrid{1, 1, 3, {1, 2, 3}});
  v.require(std::fabs(m.rmse - std::sqrt(10.0 / 3.0)) <= 1e-12, fmt::format("rmse {}", m.rmse));
  v.require(std::fabs(m.abs_rel - 2.0 / 3.0) <= 1e-12, fmt::format("abs_rel {}", m.abs_rel));
  v.require(std::fabs(m.sq_rel - 4.0 / 3.0) <= 1e-12, fmt::format("sq_rel {}", m.sq_rel));

  emma::test::Gen g(11);
  for (int trial = 0; trial < 200 && v.ok; ++trial) {
    const auto gt = g.depth(g.size(1, 3), g.size(1, 8), g.size(1, 8));
    const auto pred = g.depth(gt.frames, gt.height, gt.width);
    const auto base = quality::depth_metrics(pred, gt);
    for (double c : {0.1, 3.0, 1000.0}) {
      const auto m2 = quality::depth_metrics(pred.scaled(c), gt);
      v.require(rel_close(m2.rmse, base.rmse, 1e-12) && rel_close(m2.abs_rel, base.abs_rel, 1e-12) &&
                    rel_close(m2.sq_rel, base.sq_rel, 1e-12),
                fmt::format("scale {} changes the metrics on trial {}", c, trial));
    }
  }
}

void weight_law(Verdict& v) {
  sampler::SamplerConfig cfg;
  cfg.gamma = 0.1;
  cfg.lambda = 1.0;
  cfg.alpha = 0.0;
  cfg.seed = 7;
  const std::vector<sampler::Candidate> c{cand("easy", Source::kReal, 1.0), cand("hard", Source::kReal, 0.0)};
  const auto table = sampler::compute_weights(c, cfg, sampler::Phase::kAdaptive);
  const double w_hard = *table.weight("hard"), w_easy = *table.weight("easy");
  v.require(std::fabs(w_hard - 11.0 / 12.0) <= 1e-12, fmt::format("w(s=0) = {}", w_hard));
  v.require(std::fabs(w_easy - 1.0 / 12.0) <= 1e-12, fmt::format("w(s=1) = {}", w_easy));

  std::size_t hard = 0, easy = 0;
  draw(sampler::BatchSampler(table, cfg), 100000, [&](const std::string& id) { (id == "hard" ? hard : easy)++; });
  const double ratio = static_cast<double>(hard) / static_cast<double>(easy);
  v.require(std::fabs(ratio - 11.0) <= 0.55, fmt::format("draw ratio {:.4f}", ratio));
  if (v.ok) v.detail = fmt::format("draw ratio {:.4f}", ratio);
}

std::vector<sampler::Candidate> mixed(std::size_t n) {
  std::vector<sampler::Candidate> c;
  for (std::size_t i = 0; i < n; ++i) {
    c.push_back(cand(fmt::format("real_{:02}", i), Source::kReal, static_cast<double>(i % 5) / 4.0));
    c.push_back(cand(fmt::format("gen_{:02}", i), Source::kGenerated, static_cast<double>(i % 3) / 2.0));
  }
  return c;
}

void mixing_ratio(Verdict& v) {
  const auto cohort = mixed(12);
  for (double alpha : {0.5, 0.0, 1.0}) {
    sampler::SamplerConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = 7;
    const sampler::BatchSampler s(sampler::compute_weights(cohort, cfg, sampler::Phase::kAdaptive), cfg);
    std::size_t gen = 0;
    const std::size_t total = draw(s, 100000, [&](const std::string& id) { gen += id.starts_with("gen_"); });
    const double frac = static_cast<double>(gen) / static_cast<double>(total);
    if (alpha == 0.5) {
      v.require(frac >= 0.495 && frac <= 0.505, fmt::format("generated fraction {:.5f}", frac));
      if (v.ok) v.detail = fmt::format("generated fraction {:.5f}", frac);
    } else {
      v.require(frac == alpha, fmt::format("alpha {} gave generated fraction {}", alpha, frac));
    }
  }
}

void zero_weight(Verdict& v) {
  // Generated samples with alternating quality; the bad ones fail sq_rel.
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 20; ++i) {
    SampleRecord r;
    r.id = fmt::format("{}_{:02}", i < 10 ? "real" : "gen", i);
    r.source = i < 10 ? Source::kReal : Source::kGenerated;
    r.score = (i % 4) / 3.0;
    if (r.source == Source::kGenerated) {
      quality::QualityReport q;
      q.depth = quality::DepthMetrics{1.0, 0.1, i % 3 == 0 ? 0.9 : 0.1, 1.0};
      r.quality = q;
    }
    samples.push_back(std::move(r));
  }
  quality::FilterConfig fc;
  fc.max_sq_rel = 0.5;
  samples = quality::apply_filter(std::move(samples), fc);

  std::set<std::string> failing;
  for (const auto& s : samples) {
    if (s.quality && !s.quality->passed()) failing.insert(s.id);
  }
  v.require(failing.size() == 3, fmt::format("{} samples failed the filter, expected 3", failing.size()));

  sampler::SamplerConfig cfg;
  cfg.alpha = 0.5;
  cfg.seed = 7;
  const auto cand = sampler::candidates(samples);
  std::size_t hits = 0;
  for (auto phase : {sampler::Phase::kUniform, sampler::Phase::kAdaptive}) {
    const sampler::BatchSampler s(sampler::compute_weights(cand, cfg, phase), cfg);
    draw(s, 100000, [&](const std::string& id) { hits += failing.contains(id); });
  }
  v.require(hits == 0, fmt::format("filtered samples drawn {} times", hits));
}

void phase_protocol(Verdict& v) {
  sampler::SamplerConfig cfg;
  cfg.total_steps = 10000;
  cfg.phase_switch_step = 5000;
  cfg.batch_size = 1;
  const auto cohort = mixed(6);
  sampler::EpochPlan plan(cfg, sampler::compute_weights(cohort, cfg, sampler::Phase::kUniform),
                          sampler::compute_weights(cohort, cfg, sampler::Phase::kAdaptive), 0, 10000);
  std::vector<std::uint64_t> markers;
  std::uint64_t next_batch = 0;
  while (auto ev = plan.next()) {
    if (const auto* m = std::get_if<sampler::RefreshMarker>(&*ev)) {
      markers.push_back(m->step);
      v.require(next_batch == m->step, "marker not right before the switch batch");
    } else {
      next_batch = std::get<sampler::PlannedBatch>(*ev).step + 1;
    }
  }
  v.require(markers == std::vector<std::uint64_t>{5000},
            fmt::format("{} markers, first at {}", markers.size(), markers.empty() ? 0 : markers[0]));

  // Switch at the end of the run: the tables in effect at the first and last
  // step must be the same file.
  const auto dir = scratch("fixmix");
  pipeline::DemoOptions o;
  o.samples = 20;
  o.total_steps = 200;
  o.batch_size = 8;
  pipeline::run_demo(3, dir, o);
  auto pc = pipeline::demo_config(3, o);
  pc.sampler.total_steps = 10000;
  pc.sampler.phase_switch_step = 10000;
  pc.sampler.batch_size = 1;
  pipeline::SampleRequest req;
  req.manifest = dir / "manifest.filtered.jsonl";
  req.scores = dir / "scores.jsonl";
  req.plan_out = dir / "fixmix_plan.jsonl";
  req.weights_dir = dir / "fixmix_weights";
  std::ostringstream sink;
  const auto s = pipeline::run_sample(req, pc, sink);
  v.require(s.refresh_markers == 0, "FixMix run emitted a refresh marker");
  const auto start = slurp(dir / "fixmix_weights/weights_start.jsonl");
  v.require(!start.empty() && start == slurp(dir / "fixmix_weights/weights_end.jsonl"),
            "weight tables differ before and after");
  fs::remove_all(dir);
}

void behavior_goldens(Verdict& v) {
  auto score = [](const std::string& task, const std::string& event) {
    return behavior::score_episode({task, {event}, false}, behavior::load_rule_table(kRules / (task + ".json")));
  };
  v.require(score("fold_cloth", "one_corner_missed") == 3, "fold_cloth one corner");
  v.require(score("fold_cloth", "no_interaction") == 0, "fold_cloth no interaction");
  v.require(score("clean_desk", "one_bowl_missed") == 3, "clean_desk one bowl");
  v.require(score("throw_bottle", "two_bottles_missed") == 1, "throw_bottle two bottles");
  std::vector<bool> wins(20, false);
  for (int i = 0; i < 13; ++i) wins[i] = true;
  const auto sr = behavior::format_success_rate(behavior::aggregate(std::vector<int>(20, 5), wins).success_rate);
  v.require(sr == "65%", "13/20 printed as " + sr);
}

double demo_seconds = -1.0;

void determinism(Verdict& v) {
  const auto a = scratch("demo_a"), b = scratch("demo_b");
  const auto t0 = Clock::now();
  const auto sa = pipeline::run_demo(7, a);
  demo_seconds = seconds_since(t0);
  const auto sb = pipeline::run_demo(7, b);
  for (const char* f : {"scores.jsonl", "weights/weights_start.jsonl", "weights/weights_end.jsonl", "plan.jsonl"}) {
    const auto bytes = slurp(a / f);
    v.require(!bytes.empty() && bytes == slurp(b / f), std::string(f) + " differs between runs");
  }
  v.require(sa.passed && sb.passed, "ratio check failed:\n" + pipeline::format_demo_summary(sa));
  v.require(sa.filtered_draws == 0, "filtered samples were drawn");
  if (v.ok) {
    std::string ratios;
    for (const auto& r : sa.ratios) ratios += fmt::format(" {} {:.3f}/{:.3f}", r.stratum, r.measured, r.expected);
    v.detail = "hard/easy" + ratios;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

void end_to_end(Verdict& v) {
  v.require(demo_seconds >= 0.0, "demo did not run");
  v.require(demo_seconds < 30.0, fmt::format("took {:.2f} s", demo_seconds));
  if (v.ok) v.detail = fmt::format("200 samples in {:.2f} s", demo_seconds);
}

}  // namespace

int main() {
  criterion("metric oracle equivalence", metric_oracle);
  criterion("depth metrics fixture and scale invariance", depth_fixture);
  criterion("weight law", weight_law);
  criterion("mixing ratio", mixing_ratio);
  criterion("zero-weight filter", zero_weight);
  criterion("phase protocol", phase_protocol);
  criterion("behavior score goldens", behavior_goldens);
  criterion("determinism", determinism);
  criterion("end-to-end pipeline", end_to_end);
  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << "\n";
  return failures == 0 ? 0 : 1;
}
