#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "emma/sampler/counter_rng.hpp"
#include "emma/sampler/plan.hpp"
#include "emma/sampler/weights.hpp"
#include "support.hpp"

using namespace emma;
using namespace emma::sampler;
using emma::test::code_of;
using emma::test::Gen;

namespace {

Candidate cand(std::string id, Source src, std::optional<double> score, bool retained = true) {
  return Candidate{std::move(id), src, retained, score};
}

std::vector<Candidate> mixed_cohort(std::size_t n_real, std::size_t n_gen) {
  std::vector<Candidate> c;
  for (std::size_t i = 0; i < n_real; ++i) c.push_back(cand("r" + std::to_string(i), Source::kReal, (i % 4) / 3.0));
  for (std::size_t i = 0; i < n_gen; ++i) {
    c.push_back(cand("g" + std::to_string(i), Source::kGenerated, (i % 3) / 2.0, i % 5 != 0));
  }
  return c;
}

SamplerConfig cfg_with(double alpha, std::uint64_t seed = 7) {
  SamplerConfig cfg;
  cfg.alpha = alpha;
  cfg.seed = seed;
  return cfg;
}

std::map<Stratum, double> stratum_sums(const WeightTable& t) {
  std::map<Stratum, double> sums;
  for (const auto& e : t.entries) sums[e.stratum] += e.weight;
  return sums;
}

}  // namespace

TEST(Config, Validation) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 0.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
  c = {};
  c.alpha = 1.5;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
  c = {};
  c.phase_switch_step = c.total_steps + 1;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
  c = {};
  c.batch_size = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
  c = {};
  c.lambda = -1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
}

TEST(Phase, Schedule) {
  SamplerConfig c;
  c.total_steps = 10000;
  EXPECT_EQ(c.switch_step(), 5000u);
  EXPECT_EQ(phase_schedule(4999, c), Phase::kUniform);
  EXPECT_EQ(phase_schedule(5000, c), Phase::kAdaptive);
  c.phase_switch_step = 10000;
  for (std::uint64_t s : {0, 5000, 9999}) EXPECT_EQ(phase_schedule(s, c), Phase::kUniform);
}

TEST(Weights, HandExample) {
  SamplerConfig cfg = cfg_with(0.0);
  const std::vector<Candidate> c{cand("a", Source::kReal, 1.0), cand("b", Source::kReal, 0.0)};
  const auto t = compute_weights(c, cfg, Phase::kAdaptive);
  EXPECT_NEAR(*t.weight("a"), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(*t.weight("b"), 11.0 / 12.0, 1e-12);
}

TEST(Weights, LambdaZeroIsUniform) {
  SamplerConfig cfg = cfg_with(0.0);
  cfg.lambda = 0.0;
  const std::vector<Candidate> c{cand("a", Source::kReal, 1.0), cand("b", Source::kReal, 0.0),
                                 cand("c", Source::kReal, 0.3)};
  const auto t = compute_weights(c, cfg, Phase::kAdaptive);
  for (const auto& e : t.entries) EXPECT_NEAR(e.weight, 1.0 / 3.0, 1e-15);
}

TEST(Weights, FilteredSampleIsZeroAndOthersRenormalize) {
  SamplerConfig cfg = cfg_with(0.0);
  const std::vector<Candidate> c{cand("a", Source::kReal, 0.5), cand("b", Source::kReal, 0.5, false),
                                 cand("c", Source::kReal, 0.5)};
  for (Phase p : {Phase::kUniform, Phase::kAdaptive}) {
    const auto t = compute_weights(c, cfg, p);
    EXPECT_EQ(*t.weight("b"), 0.0);
    EXPECT_EQ(*t.weight("a"), 0.5);
    EXPECT_EQ(*t.weight("c"), 0.5);
  }
}

TEST(Weights, Errors) {
  SamplerConfig cfg = cfg_with(0.5);
  EXPECT_EQ(code_of([&] {
              compute_weights(std::vector<Candidate>{cand("a", Source::kReal, std::nullopt),
                                                     cand("g", Source::kGenerated, 0.0)},
                              cfg, Phase::kAdaptive);
            }),
            ErrorCode::kMissingScore);
  // Missing scores are fine before the switch.
  EXPECT_NO_THROW(compute_weights(std::vector<Candidate>{cand("a", Source::kReal, std::nullopt),
                                                         cand("g", Source::kGenerated, std::nullopt)},
                                  cfg, Phase::kUniform));
  const std::vector<Candidate> only_real{cand("a", Source::kReal, 0.0), cand("g", Source::kGenerated, 0.0, false)};
  EXPECT_EQ(code_of([&] { compute_weights(only_real, cfg, Phase::kUniform); }), ErrorCode::kEmptyStratum);
  EXPECT_NO_THROW(compute_weights(only_real, cfg_with(0.0), Phase::kUniform));
  EXPECT_EQ(code_of([&] { compute_weights(only_real, cfg_with(1.0), Phase::kUniform); }), ErrorCode::kEmptyStratum);
  EXPECT_EQ(code_of([&] {
              compute_weights(std::vector<Candidate>{cand("a", Source::kReal, 0.0), cand("a", Source::kReal, 0.0)},
                              cfg_with(0.0), Phase::kUniform);
            }),
            ErrorCode::kDuplicateId);
}

TEST(Weights, TableInvariantsProperty) {
  Gen g(1);
  for (int trial = 0; trial < 100; ++trial) {
    SamplerConfig cfg = cfg_with(0.5);
    cfg.gamma = g.real(0.01, 2.0);
    cfg.lambda = g.real(0.0, 5.0);
    cfg.strata_mode = g.coin() ? StrataMode::kGlobal : StrataMode::kPerSource;
    std::vector<Candidate> c;
    const std::size_t n = g.size(2, 40);
    for (std::size_t i = 0; i < n; ++i) {
      c.push_back(cand("s" + std::to_string(i), i % 2 ? Source::kGenerated : Source::kReal, g.real(0, 1),
                       i < 2 || g.coin(0.8)));
    }
    const auto t = compute_weights(c, cfg, Phase::kAdaptive);
    for (const auto& [stratum, sum] : stratum_sums(t)) EXPECT_NEAR(sum, 1.0, 1e-12);
    std::map<std::string, Candidate> by_id;
    for (const auto& x : c) by_id[x.id] = x;
    for (const auto& a : t.entries) {
      const auto& ca = by_id[a.id];
      if (!ca.retained) {
        EXPECT_EQ(a.weight, 0.0);
        continue;
      }
      // Minimum support.
      EXPECT_GT(a.weight, 0.0);
      for (const auto& b : t.entries) {
        const auto& cb = by_id[b.id];
        if (!cb.retained || a.stratum != b.stratum) continue;
        const double expect = (cfg.gamma + cfg.lambda * (1 - *ca.score)) / (cfg.gamma + cfg.lambda * (1 - *cb.score));
        EXPECT_TRUE(emma::test::rel_close(a.weight / b.weight, expect, 1e-12));
        if (*ca.score < *cb.score) EXPECT_GE(a.weight, b.weight);
      }
    }
  }
}

TEST(Weights, CohortChecksumIgnoresOrder) {
  auto c = mixed_cohort(3, 3);
  const auto a = cohort_checksum(c);
  std::reverse(c.begin(), c.end());
  EXPECT_EQ(cohort_checksum(c), a);
  c[0].id = "zz";
  EXPECT_NE(cohort_checksum(c), a);
}

TEST(Weights, TableFileRoundTrip) {
  emma::test::ScratchDir dir("weights");
  SamplerConfig cfg = cfg_with(0.25, 99);
  cfg.phase_switch_step = 1234;
  const auto t = compute_weights(mixed_cohort(5, 7), cfg, Phase::kAdaptive);
  write_weight_table(dir / "w.jsonl", t);
  const auto back = read_weight_table(dir / "w.jsonl");
  EXPECT_EQ(back.entries, t.entries);
  EXPECT_EQ(back.phase, Phase::kAdaptive);
  EXPECT_EQ(back.cohort_checksum, t.cohort_checksum);
  EXPECT_EQ(back.config.seed, 99u);
  EXPECT_EQ(back.config.alpha, 0.25);
  EXPECT_EQ(back.config.phase_switch_step, 1234u);
  write_weight_table(dir / "w2.jsonl", back);
  EXPECT_EQ(emma::test::slurp(dir / "w2.jsonl"), emma::test::slurp(dir / "w.jsonl"));
}

TEST(Rng, CounterKeyed) {
  const CounterRng a(7), b(7), c(8);
  EXPECT_EQ(a.bits(1, 2, 0), b.bits(1, 2, 0));
  EXPECT_NE(a.bits(1, 2, 0), c.bits(1, 2, 0));
  EXPECT_NE(a.bits(1, 2, 0), a.bits(2, 1, 0));
  EXPECT_NE(a.bits(1, 2, 0), a.bits(1, 2, 1));
  // splitmix64 reference value for state 0 after one increment.
  EXPECT_EQ(CounterRng::mix(0), 0xe220a8397b1dcdafULL);
}

TEST(Draw, PureStrataAtExtremeAlpha) {
  const auto cohort = mixed_cohort(10, 10);
  for (double alpha : {0.0, 1.0}) {
    const auto cfg = cfg_with(alpha);
    const BatchSampler s(compute_weights(cohort, cfg, Phase::kAdaptive), cfg);
    for (std::uint64_t step = 0; step < 200; ++step) {
      for (const auto& id : s.draw_batch(step)) EXPECT_EQ(id[0], alpha == 0.0 ? 'r' : 'g');
    }
  }
}

TEST(Draw, MixingRatioMatchesIndependentCount) {
  const auto cfg = cfg_with(0.5);
  const BatchSampler s(compute_weights(mixed_cohort(10, 10), cfg, Phase::kUniform), cfg);
  std::size_t gen = 0, total = 0;
  for (std::uint64_t step = 0; total < 100000; ++step) {
    for (const auto& id : s.draw_batch(step)) {
      gen += id[0] == 'g';
      ++total;
    }
  }
  const double frac = static_cast<double>(gen) / static_cast<double>(total);
  EXPECT_GE(frac, 0.495);
  EXPECT_LE(frac, 0.505);
  // The stratum coin is the first variate of each slot; recount it from the
  // generator directly.
  const CounterRng rng(cfg.seed);
  std::size_t coins = 0;
  for (std::size_t i = 0; i < total; ++i) coins += rng.uniform(i / cfg.batch_size, i % cfg.batch_size, 0) < cfg.alpha;
  EXPECT_EQ(coins, gen);
}

TEST(Draw, GlobalModeIgnoresAlpha) {
  auto cfg = cfg_with(0.0);
  cfg.strata_mode = StrataMode::kGlobal;
  const BatchSampler s(compute_weights(mixed_cohort(10, 10), cfg, Phase::kUniform), cfg);
  std::size_t gen = 0;
  for (std::uint64_t step = 0; step < 100; ++step) {
    for (const auto& id : s.draw_batch(step)) gen += id[0] == 'g';
  }
  EXPECT_GT(gen, 0u);
}

TEST(Draw, ZeroWeightNeverDrawn) {
  const auto cohort = mixed_cohort(10, 10);
  const auto cfg = cfg_with(0.5);
  const BatchSampler s(compute_weights(cohort, cfg, Phase::kAdaptive), cfg);
  std::set<std::string> filtered;
  for (const auto& c : cohort) {
    if (!c.retained) filtered.insert(c.id);
  }
  for (std::uint64_t step = 0; step < 2000; ++step) {
    for (const auto& id : s.draw_batch(step)) EXPECT_FALSE(filtered.contains(id)) << id;
  }
}

TEST(Draw, RatioLawOverManyDraws) {
  const auto cfg = cfg_with(0.0, 3);
  std::vector<Candidate> c{cand("easy", Source::kReal, 1.0), cand("hard", Source::kReal, 0.0)};
  const BatchSampler s(compute_weights(c, cfg, Phase::kAdaptive), cfg);
  std::size_t hard = 0, easy = 0;
  for (std::uint64_t step = 0; hard + easy < 100000; ++step) {
    for (const auto& id : s.draw_batch(step)) (id == "hard" ? hard : easy)++;
  }
  const double ratio = static_cast<double>(hard) / static_cast<double>(easy);
  EXPECT_NEAR(ratio, 11.0, 0.55);
}

TEST(Draw, MinimumSupportEverySampleAppears) {
  std::vector<Candidate> c;
  for (int i = 0; i < 50; ++i) c.push_back(cand("s" + std::to_string(i), Source::kReal, i == 0 ? 0.0 : 1.0));
  const auto cfg = cfg_with(0.0);
  const BatchSampler s(compute_weights(c, cfg, Phase::kAdaptive), cfg);
  std::set<std::string> seen;
  for (std::uint64_t step = 0; step * cfg.batch_size < 1000 * c.size(); ++step) {
    for (const auto& id : s.draw_batch(step)) seen.insert(id);
  }
  EXPECT_EQ(seen.size(), c.size());
}

TEST(Draw, BatchIsPureFunctionOfSeedAndStep) {
  const auto cohort = mixed_cohort(10, 10);
  const auto cfg = cfg_with(0.5, 42);
  const auto table = compute_weights(cohort, cfg, Phase::kAdaptive);
  const BatchSampler a(table, cfg), b(table, cfg);
  EXPECT_EQ(a.draw_batch(17), b.draw_batch(17));
  EXPECT_EQ(a.draw_batch(17), draw_batch(table, cfg, 17));
  EXPECT_NE(a.draw_batch(17), a.draw_batch(18));
  EXPECT_EQ(a.draw_batch(17).size(), cfg.batch_size);
}

namespace {

std::vector<PlanEvent> drain(EpochPlan plan) {
  std::vector<PlanEvent> out;
  while (auto ev = plan.next()) out.push_back(*ev);
  return out;
}

struct Tables {
  WeightTable uniform;
  WeightTable adaptive;
};

Tables tables(const SamplerConfig& cfg) {
  const auto c = mixed_cohort(6, 6);
  return {compute_weights(c, cfg, Phase::kUniform), compute_weights(c, cfg, Phase::kAdaptive)};
}

std::vector<std::uint64_t> markers(const std::vector<PlanEvent>& evs) {
  std::vector<std::uint64_t> m;
  for (const auto& ev : evs) {
    if (const auto* r = std::get_if<RefreshMarker>(&ev)) m.push_back(r->step);
  }
  return m;
}

}  // namespace

TEST(Plan, OneMarkerAtSwitch) {
  auto cfg = cfg_with(0.5);
  cfg.total_steps = 10000;
  cfg.phase_switch_step = 5000;
  cfg.batch_size = 2;
  const auto t = tables(cfg);
  const auto evs = drain(EpochPlan(cfg, t.uniform, t.adaptive, 0, 10000));
  EXPECT_EQ(markers(evs), std::vector<std::uint64_t>{5000});
  EXPECT_EQ(evs.size(), 10001u);
  // The marker sits right before the first adaptive batch.
  EXPECT_EQ(std::get<PlannedBatch>(evs[5001]).step, 5000u);
}

TEST(Plan, NoMarkerOutsideSwitch) {
  auto cfg = cfg_with(0.5);
  cfg.batch_size = 1;
  const auto t = tables(cfg);
  EXPECT_TRUE(markers(drain(EpochPlan(cfg, t.uniform, std::nullopt, 0, 5000))).empty());
  EXPECT_TRUE(markers(drain(EpochPlan(cfg, std::nullopt, t.adaptive, 5001, 6000))).empty());
  // A range starting exactly at the switch still announces the refresh.
  EXPECT_EQ(markers(drain(EpochPlan(cfg, std::nullopt, t.adaptive, 5000, 5010))), std::vector<std::uint64_t>{5000});
}

TEST(Plan, MissingTableAndCohortMismatch) {
  auto cfg = cfg_with(0.5);
  const auto t = tables(cfg);
  EXPECT_EQ(code_of([&] { EpochPlan(cfg, t.uniform, std::nullopt, 0, 6000); }), ErrorCode::kMissingScore);
  auto other = t.adaptive;
  other.cohort_checksum ^= 1;
  EXPECT_EQ(code_of([&] { EpochPlan(cfg, t.uniform, other, 0, 6000); }), ErrorCode::kChecksumMismatch);
}

TEST(Plan, TextRoundTripAndReplay) {
  auto cfg = cfg_with(0.5, 9);
  cfg.total_steps = 40;
  cfg.batch_size = 3;
  const auto t = tables(cfg);
  std::ostringstream first, second;
  for (auto* os : {&first, &second}) {
    EpochPlan plan(cfg, t.uniform, t.adaptive, 0, 40);
    PlanTextWriter w(*os, plan);
    write_plan(plan, w);
  }
  EXPECT_EQ(first.str(), second.str());
  std::istringstream in(first.str());
  PlanHeader h;
  const auto evs = read_text_plan(in, &h);
  EXPECT_EQ(evs, drain(EpochPlan(cfg, t.uniform, t.adaptive, 0, 40)));
  EXPECT_EQ(h.seed, 9u);
  EXPECT_EQ(h.batch_size, 3u);
  EXPECT_EQ(h.cohort_checksum, t.uniform.cohort_checksum);
}

TEST(Plan, BinaryFrameLayout) {
  auto cfg = cfg_with(0.5, 9);
  cfg.total_steps = 4;
  cfg.batch_size = 1;
  const auto t = tables(cfg);
  std::ostringstream os;
  EpochPlan plan(cfg, t.uniform, t.adaptive, 1, 3);
  PlanBinaryWriter w(os, plan);
  write_plan(plan, w);
  const std::string bytes = os.str();
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 4), "EMBP");
  std::uint64_t checksum = 0;
  std::memcpy(&checksum, bytes.data() + 8, 8);
  EXPECT_EQ(checksum, t.uniform.cohort_checksum);

  const auto expected = drain(EpochPlan(cfg, t.uniform, t.adaptive, 1, 3));
  std::size_t pos = 16;
  for (const auto& ev : expected) {
    ASSERT_EQ(bytes.substr(pos, 4), "EMBT");
    std::uint64_t step = 0;
    std::uint32_t slot = 0, len = 0;
    std::memcpy(&step, bytes.data() + pos + 4, 8);
    std::memcpy(&slot, bytes.data() + pos + 12, 4);
    std::memcpy(&len, bytes.data() + pos + 16, 4);
    const std::string id = bytes.substr(pos + 20, len);
    pos += 20 + len;
    if (const auto* m = std::get_if<RefreshMarker>(&ev)) {
      EXPECT_EQ(step, m->step);
      EXPECT_EQ(slot, kRefreshSlot);
      EXPECT_TRUE(id.empty());
    } else {
      const auto& b = std::get<PlannedBatch>(ev);
      EXPECT_EQ(step, b.step);
      EXPECT_EQ(slot, 0u);
      EXPECT_EQ(id, b.ids[0]);
    }
  }
  EXPECT_EQ(pos, bytes.size());
}

TEST(Plan, FixMixKeepsTablesConstant) {
  auto cfg = cfg_with(0.5);
  cfg.total_steps = 100;
  cfg.phase_switch_step = 100;
  cfg.batch_size = 4;
  const auto t = tables(cfg);
  const auto evs = drain(EpochPlan(cfg, t.uniform, std::nullopt, 0, 100));
  EXPECT_TRUE(markers(evs).empty());
  const BatchSampler s(t.uniform, cfg);
  for (const auto& ev : evs) {
    const auto& b = std::get<PlannedBatch>(ev);
    EXPECT_EQ(b.ids, s.draw_batch(b.step));
  }
}
