// Runs the emma binary end to end and checks exit codes and output.

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include "emma/pipeline/demo.hpp"
#include "support.hpp"

using emma::test::ScratchDir;
using emma::test::slurp;
using emma::test::spit;

namespace {

const std::string kCli = EMMA_CLI;
const std::filesystem::path kData = EMMA_TEST_DATA;
const std::filesystem::path kRules = EMMA_RULES_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// `env` is prepended to the command line, e.g. "EMMA_SAMPLER_ALPHA=0".
Run run(const ScratchDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "env -u EMMA_SAMPLER_ALPHA " + env + " '" + kCli + "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// A 20-sample synthetic dataset (10 generated, 2 of them low quality) plus
// the config the demo used.
void dataset(const ScratchDir& dir) {
  emma::pipeline::DemoOptions o;
  o.samples = 20;
  o.total_steps = 200;
  o.batch_size = 8;
  emma::pipeline::run_demo(5, dir / "ds", o);
}

bool only_prefix(const std::string& plan, const std::string& prefix) {
  std::size_t pos = 0, ids = 0;
  while ((pos = plan.find("\"id\":\"", pos)) != std::string::npos) {
    pos += 6;
    ++ids;
    if (plan.compare(pos, prefix.size(), prefix) != 0) return false;
  }
  return ids > 0;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  ScratchDir dir("cli_usage");
  EXPECT_EQ(run(dir, "").code, 1);
  EXPECT_EQ(run(dir, "frobnicate").code, 1);
  EXPECT_EQ(run(dir, "score").code, 1);
  EXPECT_EQ(run(dir, "sample --manifest x --alpha notanumber").code, 1);
  EXPECT_EQ(run(dir, "--help").code, 0);
}

TEST(Cli, FilterSummaryAndExitCodes) {
  ScratchDir dir("cli_filter");
  dataset(dir);
  const auto m = dir / "ds/manifest.jsonl";
  auto r = run(dir, "--config " + q(dir / "ds/config.json") + " filter --manifest " + q(m) + " --out " +
                        q(dir / "f.jsonl") + " --quality-out " + q(dir / "q.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "retained 8/10 generated samples\n");

  r = run(dir, "filter --manifest " + q(m) + " --out " + q(dir / "f2.jsonl"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "retained 10/10 generated samples\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "ds/manifest.quality.jsonl"));

  std::filesystem::remove(dir / "ds/depth/gen_008.pred.emdp");
  r = run(dir, "filter --manifest " + q(m) + " --out " + q(dir / "f3.jsonl"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gen_008"), std::string::npos) << r.err;
}

TEST(Cli, ScoreGoldenAndMissingPredictionWarning) {
  ScratchDir dir("cli_score");
  auto r = run(dir, "score --manifest " + q(kData / "golden3/manifest.jsonl") + " --out " + q(dir / "s.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "s.jsonl"), slurp(kData / "golden3/scores.golden.jsonl"));
  EXPECT_NE(r.err.find("MissingScore(ep_c)"), std::string::npos) << r.err;
}

TEST(Cli, SampleDeterminismAlphaAndMarker) {
  ScratchDir dir("cli_sample");
  dataset(dir);
  const std::string base = "--config " + q(dir / "ds/config.json") + " sample --manifest " +
                           q(dir / "ds/manifest.filtered.jsonl") + " --scores " + q(dir / "ds/scores.jsonl");
  auto a = run(dir, base + " --seed 7");
  auto b = run(dir, base + " --seed 7");
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run(dir, base + " --seed 8").out);

  std::size_t markers = 0;
  for (std::size_t p = 0; (p = a.out.find("{\"refresh\":", p)) != std::string::npos; ++p) ++markers;
  EXPECT_EQ(markers, 1u);
  EXPECT_NE(a.out.find("{\"refresh\":100}"), std::string::npos);

  EXPECT_TRUE(only_prefix(run(dir, base + " --alpha 0").out, "real_"));
  EXPECT_TRUE(only_prefix(run(dir, base + " --alpha 1").out, "gen_"));

  auto part = run(dir, base + " --steps 0..50");
  EXPECT_EQ(part.code, 0);
  EXPECT_EQ(part.out.find("refresh"), std::string::npos);
  EXPECT_EQ(run(dir, base + " --steps 50..40").code, 2);
  EXPECT_EQ(run(dir, base + " --steps fifty").code, 2);

  auto bin = run(dir, base + " --binary --out " + q(dir / "p.bin"));
  EXPECT_EQ(bin.code, 0);
  EXPECT_EQ(slurp(dir / "p.bin").substr(0, 4), "EMBP");
}

TEST(Cli, FlagsOverrideEnvOverrideFile) {
  ScratchDir dir("cli_precedence");
  dataset(dir);
  const std::string base = "--config " + q(dir / "ds/config.json") + " sample --manifest " +
                           q(dir / "ds/manifest.filtered.jsonl") + " --scores " + q(dir / "ds/scores.jsonl");
  // The demo config file says alpha 0.5.
  EXPECT_TRUE(only_prefix(run(dir, base, "EMMA_SAMPLER_ALPHA=0").out, "real_"));
  EXPECT_TRUE(only_prefix(run(dir, base + " --alpha 1", "EMMA_SAMPLER_ALPHA=0").out, "gen_"));
  auto bad = run(dir, base, "EMMA_SAMPLER_ALPHA=7");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("sampler.alpha"), std::string::npos) << bad.err;
}

TEST(Cli, EvalAndExec) {
  ScratchDir dir("cli_eval");
  auto r = run(dir, "eval --logs " + q(kData / "eval/fold_cloth_logs.jsonl") + " --rules " +
                        q(kRules / "fold_cloth.json"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "task\tScore\tSR\tN\nfold_cloth\t3.8\t65%\t20\n");

  dataset(dir);
  r = run(dir, "exec --manifest " + q(dir / "ds/manifest.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "task\tTime\tSmth\tJOL");
  EXPECT_EQ(r.out.substr(r.out.find('\n') + 1, 10), "synthetic\t");
}

TEST(Cli, DemoRuns) {
  ScratchDir dir("cli_demo");
  auto r = run(dir, "demo --seed 7 --out " + q(dir / "d"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ratio law: PASS"), std::string::npos) << r.out;
}

TEST(Cli, BadConfigFileExitsTwo) {
  ScratchDir dir("cli_badcfg");
  spit(dir / "c.json", R"({"sampler": {"colour": 1}})");
  auto r = run(dir, "--config " + q(dir / "c.json") + " score --manifest " + q(kData / "golden3/manifest.jsonl") +
                        " --out " + q(dir / "s.jsonl"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sampler.colour"), std::string::npos) << r.err;
}
