#pragma once

// Weight table file: newline-delimited JSON. The header line carries the
// cohort checksum, phase and config snapshot:
//
//   {"cohort_checksum":"..","config":{..},"format":"emma-weights","phase":"adaptive"}
//
// followed by one {id, weight, phase, stratum} record per sample, sorted by id.
// Weights are printed as the shortest text that reads back to the same double.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emma/core/manifest.hpp"
#include "emma/sampler/config.hpp"

namespace emma::sampler {

enum class Stratum { kReal, kGenerated, kGlobal };

std::string_view stratum_name(Stratum stratum);

struct Candidate {
  std::string id;
  Source source = Source::kReal;
  bool retained = true;
  std::optional<double> score;  // unified score s in [0, 1]
};

struct WeightEntry {
  std::string id;
  Source source = Source::kReal;
  Stratum stratum = Stratum::kGlobal;
  double weight = 0.0;

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

struct WeightTable {
  Phase phase = Phase::kUniform;
  SamplerConfig config;
  std::uint64_t cohort_checksum = 0;
  std::vector<WeightEntry> entries;  // sorted by id

  std::optional<double> weight(std::string_view id) const;
};

// FNV-1a over "id\tsource\n" lines sorted by id. Shared by the weight table,
// batch plan header and any client that needs to match a plan to a manifest.
std::uint64_t cohort_checksum(std::span<const Candidate> cohort);
std::uint64_t cohort_checksum(const DatasetManifest& manifest);

// UNIFORM: equal weight over retained samples. ADAPTIVE: weight proportional
// to gamma + lambda * (1 - s). Normalized per stratum (PER_SOURCE) or over
// everything (GLOBAL); filtered samples are always exactly 0.
WeightTable compute_weights(std::span<const Candidate> cohort, const SamplerConfig& cfg, Phase phase);

std::vector<Candidate> candidates(std::span<const SampleRecord> samples);

void write_weight_table(std::ostream& out, const WeightTable& table);
void write_weight_table(const std::filesystem::path& path, const WeightTable& table);
WeightTable read_weight_table(const std::filesystem::path& path);

// Draws batches from one weight table by inverse transform sampling over
// cumulative weights. Each slot uses its own counter-keyed variates, so a
// batch depends only on (seed, step).
class BatchSampler {
 public:
  BatchSampler(WeightTable table, const SamplerConfig& cfg);

  // Index into table().entries for one slot.
  std::size_t draw_index(std::uint64_t step, std::uint64_t slot) const;
  std::vector<std::string> draw_batch(std::uint64_t step) const;

  const WeightTable& table() const noexcept { return table_; }

 private:
  struct Cdf {
    std::vector<double> cumulative;
    std::vector<std::size_t> index;  // entry index per cumulative slot
    bool empty() const noexcept { return index.empty(); }
  };

  std::size_t invert(const Cdf& cdf, double u) const;

  WeightTable table_;
  SamplerConfig cfg_;
  Cdf real_;
  Cdf generated_;
  Cdf global_;
};

std::vector<std::string> draw_batch(const WeightTable& table, const SamplerConfig& cfg, std::uint64_t step);

}  // namespace emma::sampler
