#pragma once

// Batch plan streams.
//
// Text: a header line
//   {"batch_size":..,"cohort_checksum":"..","first_step":..,"format":"emma-plan","last_step":..,"seed":..}
// then one {"step":..,"slot":..,"id":".."} record per drawn sample and a
// {"refresh":<step>} line right before the first adaptive batch.
//
// Binary (little-endian): "EMBP", u32 version = 1, u64 cohort checksum, then
// one frame per drawn sample: "EMBT", u64 step, u32 slot, u32 id length, id
// bytes. A refresh marker is a frame with slot 0xFFFFFFFF and an empty id.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "emma/sampler/config.hpp"
#include "emma/sampler/weights.hpp"

namespace emma::sampler {

inline constexpr std::uint32_t kRefreshSlot = 0xFFFFFFFFu;

struct RefreshMarker {
  std::uint64_t step = 0;
  friend bool operator==(const RefreshMarker&, const RefreshMarker&) = default;
};

struct PlannedBatch {
  std::uint64_t step = 0;
  std::vector<std::string> ids;
  friend bool operator==(const PlannedBatch&, const PlannedBatch&) = default;
};

using PlanEvent = std::variant<RefreshMarker, PlannedBatch>;

// Streams the batches of steps [first, last). Steps before the switch draw
// from `uniform`, later ones from `adaptive`; a refresh marker precedes the
// switch step so the caller can re-score before adaptive batches start. Both
// samplers are built up front, so no batch ever mixes tables.
class EpochPlan {
 public:
  EpochPlan(const SamplerConfig& cfg, std::optional<WeightTable> uniform, std::optional<WeightTable> adaptive,
            std::uint64_t first, std::uint64_t last);

  std::optional<PlanEvent> next();

  std::uint64_t cohort_checksum() const noexcept { return cohort_checksum_; }
  const SamplerConfig& config() const noexcept { return cfg_; }
  std::uint64_t first_step() const noexcept { return first_; }
  std::uint64_t last_step() const noexcept { return last_; }

 private:
  SamplerConfig cfg_;
  std::optional<BatchSampler> uniform_;
  std::optional<BatchSampler> adaptive_;
  std::uint64_t first_;
  std::uint64_t last_;
  std::uint64_t step_;
  bool marker_pending_;
  std::uint64_t cohort_checksum_ = 0;
};

class PlanTextWriter {
 public:
  PlanTextWriter(std::ostream& out, const EpochPlan& plan);
  void write(const PlanEvent& event);

 private:
  std::ostream& out_;
};

class PlanBinaryWriter {
 public:
  PlanBinaryWriter(std::ostream& out, const EpochPlan& plan);
  void write(const PlanEvent& event);

 private:
  std::ostream& out_;
};

// Drains the plan into a writer.
template <class Writer>
std::size_t write_plan(EpochPlan& plan, Writer& writer) {
  std::size_t events = 0;
  while (auto ev = plan.next()) {
    writer.write(*ev);
    ++events;
  }
  return events;
}

struct PlanHeader {
  std::uint64_t cohort_checksum = 0;
  std::uint64_t first_step = 0;
  std::uint64_t last_step = 0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
};

// Parses a text plan back into events (header returned separately).
std::vector<PlanEvent> read_text_plan(std::istream& in, PlanHeader* header = nullptr);

}  // namespace emma::sampler
