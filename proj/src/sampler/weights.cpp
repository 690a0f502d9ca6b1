#include "emma/sampler/weights.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "emma/core/checksum.hpp"
#include "emma/core/error.hpp"
#include "emma/core/ndjson.hpp"
#include "emma/sampler/counter_rng.hpp"

namespace emma::sampler {
namespace {

using nlohmann::json;

Stratum stratum_for(Source source, StrataMode mode) {
  if (mode == StrataMode::kGlobal) return Stratum::kGlobal;
  return source == Source::kReal ? Stratum::kReal : Stratum::kGenerated;
}

std::optional<Stratum> parse_stratum(std::string_view text) {
  if (text == "real") return Stratum::kReal;
  if (text == "generated") return Stratum::kGenerated;
  if (text == "global") return Stratum::kGlobal;
  return std::nullopt;
}

std::string config_json(const SamplerConfig& cfg) {
  return JsonLine()
      .exact("alpha", cfg.alpha)
      .field("batch_size", static_cast<std::uint64_t>(cfg.batch_size))
      .exact("gamma", cfg.gamma)
      .exact("lambda", cfg.lambda)
      .field("phase_switch_step", cfg.switch_step())
      .field("seed", cfg.seed)
      .field("strata_mode", strata_mode_name(cfg.strata_mode))
      .field("total_steps", cfg.total_steps)
      .str();
}

SamplerConfig config_from_json(const json& obj) {
  SamplerConfig cfg;
  cfg.alpha = obj.at("alpha").get<double>();
  cfg.batch_size = obj.at("batch_size").get<std::size_t>();
  cfg.gamma = obj.at("gamma").get<double>();
  cfg.lambda = obj.at("lambda").get<double>();
  cfg.phase_switch_step = obj.at("phase_switch_step").get<std::uint64_t>();
  cfg.seed = obj.at("seed").get<std::uint64_t>();
  const auto mode = parse_strata_mode(obj.at("strata_mode").get<std::string>());
  if (!mode) throw Error(ErrorCode::kMalformedRecord, "config.strata_mode");
  cfg.strata_mode = *mode;
  cfg.total_steps = obj.at("total_steps").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::string_view stratum_name(Stratum stratum) {
  switch (stratum) {
    case Stratum::kReal: return "real";
    case Stratum::kGenerated: return "generated";
    case Stratum::kGlobal: return "global";
  }
  return "global";
}

std::optional<double> WeightTable::weight(std::string_view id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const WeightEntry& e, std::string_view key) { return e.id < key; });
  if (it == entries.end() || it->id != id) return std::nullopt;
  return it->weight;
}

std::uint64_t cohort_checksum(std::span<const Candidate> cohort) {
  std::vector<std::string> lines;
  lines.reserve(cohort.size());
  for (const auto& c : cohort) lines.push_back(c.id + "\t" + std::string(source_name(c.source)) + "\n");
  std::sort(lines.begin(), lines.end());
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& l : lines) h = fnv1a64(l, h);
  return h;
}

std::uint64_t cohort_checksum(const DatasetManifest& manifest) {
  std::vector<Candidate> cohort;
  cohort.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) cohort.push_back({e.id, e.source, e.retained(), std::nullopt});
  return cohort_checksum(cohort);
}

WeightTable compute_weights(std::span<const Candidate> cohort, const SamplerConfig& cfg, Phase phase) {
  cfg.validate();
  WeightTable table;
  table.phase = phase;
  table.config = cfg;
  table.cohort_checksum = cohort_checksum(cohort);

  std::vector<std::size_t> order(cohort.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cohort[a].id < cohort[b].id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (cohort[order[i]].id == cohort[order[i - 1]].id) throw Error(ErrorCode::kDuplicateId, cohort[order[i]].id);
  }

  // Unnormalized weights, then a per-stratum sum.
  double sums[3] = {0.0, 0.0, 0.0};
  std::size_t retained[3] = {0, 0, 0};
  table.entries.reserve(cohort.size());
  for (std::size_t idx : order) {
    const Candidate& c = cohort[idx];
    WeightEntry e{c.id, c.source, stratum_for(c.source, cfg.strata_mode), 0.0};
    if (c.retained) {
      if (phase == Phase::kUniform) {
        e.weight = 1.0;
      } else {
        if (!c.score) throw Error(ErrorCode::kMissingScore, c.id, "adaptive weights need a unified score");
        const double s = *c.score;
        if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::kOutOfRange, c.id, "score must lie in [0, 1]");
        e.weight = cfg.gamma + cfg.lambda * (1.0 - s);
      }
      const auto k = static_cast<std::size_t>(e.stratum);
      sums[k] += e.weight;
      ++retained[k];
    }
    table.entries.push_back(std::move(e));
  }

  auto require = [&](Stratum s, bool needed) {
    if (needed && retained[static_cast<std::size_t>(s)] == 0) {
      throw Error(ErrorCode::kEmptyStratum, std::string(stratum_name(s)), "no retained samples to draw from");
    }
  };
  if (cfg.strata_mode == StrataMode::kPerSource) {
    require(Stratum::kGenerated, cfg.alpha > 0.0);
    require(Stratum::kReal, cfg.alpha < 1.0);
  } else {
    require(Stratum::kGlobal, true);
  }

  for (auto& e : table.entries) {
    if (e.weight != 0.0) e.weight /= sums[static_cast<std::size_t>(e.stratum)];
  }
  return table;
}

std::vector<Candidate> candidates(std::span<const SampleRecord> samples) {
  std::vector<Candidate> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.id, s.source, s.retained(), s.score});
  return out;
}

void write_weight_table(std::ostream& out, const WeightTable& table) {
  out << JsonLine()
             .field("cohort_checksum", checksum_hex(table.cohort_checksum))
             .raw("config", config_json(table.config))
             .field("format", "emma-weights")
             .field("phase", phase_name(table.phase))
             .str()
      << '\n';
  for (const auto& e : table.entries) {
    out << JsonLine()
               .field("id", e.id)
               .exact("weight", e.weight)
               .field("phase", phase_name(table.phase))
               .field("stratum", stratum_name(e.stratum))
               .str()
        << '\n';
  }
}

void write_weight_table(const std::filesystem::path& path, const WeightTable& table) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, path.string(), "cannot open for writing");
  write_weight_table(os, table);
}

WeightTable read_weight_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  WeightTable table;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto where = fmt::format("{}:{}", path.filename().string(), line);
    try {
      const auto obj = json::parse(text);
      if (line == 1) {
        if (obj.at("format").get<std::string>() != "emma-weights") {
          throw Error(ErrorCode::kMalformedRecord, where, "not a weight table");
        }
        if (!parse_checksum_hex(obj.at("cohort_checksum").get<std::string>(), table.cohort_checksum)) {
          throw Error(ErrorCode::kMalformedRecord, where, "bad cohort checksum");
        }
        const auto phase = parse_phase(obj.at("phase").get<std::string>());
        if (!phase) throw Error(ErrorCode::kMalformedRecord, where, "bad phase");
        table.phase = *phase;
        table.config = config_from_json(obj.at("config"));
        continue;
      }
      WeightEntry e;
      e.id = obj.at("id").get<std::string>();
      e.weight = obj.at("weight").get<double>();
      const auto stratum = parse_stratum(obj.at("stratum").get<std::string>());
      if (!stratum) throw Error(ErrorCode::kMalformedRecord, where, "bad stratum");
      e.stratum = *stratum;
      e.source = e.stratum == Stratum::kGenerated ? Source::kGenerated : Source::kReal;
      table.entries.push_back(std::move(e));
    } catch (const json::exception& err) {
      throw Error(ErrorCode::kMalformedRecord, where, err.what());
    }
  }
  if (line == 0) throw Error(ErrorCode::kMalformedRecord, path.filename().string(), "empty weight table");
  return table;
}

BatchSampler::BatchSampler(WeightTable table, const SamplerConfig& cfg) : table_(std::move(table)), cfg_(cfg) {
  for (std::size_t i = 0; i < table_.entries.size(); ++i) {
    const auto& e = table_.entries[i];
    if (e.weight <= 0.0) continue;
    Cdf& cdf = e.stratum == Stratum::kReal ? real_ : (e.stratum == Stratum::kGenerated ? generated_ : global_);
    const double prev = cdf.cumulative.empty() ? 0.0 : cdf.cumulative.back();
    cdf.cumulative.push_back(prev + e.weight);
    cdf.index.push_back(i);
  }
  if (cfg_.strata_mode == StrataMode::kGlobal) {
    if (global_.empty()) throw Error(ErrorCode::kEmptyStratum, "global", "no retained samples to draw from");
  } else {
    if (cfg_.alpha > 0.0 && generated_.empty()) throw Error(ErrorCode::kEmptyStratum, "generated");
    if (cfg_.alpha < 1.0 && real_.empty()) throw Error(ErrorCode::kEmptyStratum, "real");
  }
}

std::size_t BatchSampler::invert(const Cdf& cdf, double u) const {
  const double target = u * cdf.cumulative.back();
  auto it = std::upper_bound(cdf.cumulative.begin(), cdf.cumulative.end(), target);
  const auto pos = std::min(static_cast<std::size_t>(it - cdf.cumulative.begin()), cdf.index.size() - 1);
  return cdf.index[pos];
}

std::size_t BatchSampler::draw_index(std::uint64_t step, std::uint64_t slot) const {
  const CounterRng rng(cfg_.seed);
  if (cfg_.strata_mode == StrataMode::kGlobal) return invert(global_, rng.uniform(step, slot, 1));
  const bool generated = rng.uniform(step, slot, 0) < cfg_.alpha;
  return invert(generated ? generated_ : real_, rng.uniform(step, slot, 1));
}

std::vector<std::string> BatchSampler::draw_batch(std::uint64_t step) const {
  std::vector<std::string> ids;
  ids.reserve(cfg_.batch_size);
  for (std::size_t slot = 0; slot < cfg_.batch_size; ++slot) ids.push_back(table_.entries[draw_index(step, slot)].id);
  return ids;
}

std::vector<std::string> draw_batch(const WeightTable& table, const SamplerConfig& cfg, std::uint64_t step) {
  return BatchSampler(table, cfg).draw_batch(step);
}

}  // namespace emma::sampler
