#include "emma/sampler/plan.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "emma/core/checksum.hpp"
#include "emma/core/error.hpp"
#include "emma/core/ndjson.hpp"

namespace emma::sampler {

EpochPlan::EpochPlan(const SamplerConfig& cfg, std::optional<WeightTable> uniform,
                     std::optional<WeightTable> adaptive, std::uint64_t first, std::uint64_t last)
    : cfg_(cfg), first_(first), last_(last), step_(first), marker_pending_(false) {
  cfg_.validate();
  if (first > last || last > cfg_.total_steps) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("steps {}..{}", first, last),
                fmt::format("range must lie within [0, {}]", cfg_.total_steps));
  }
  const std::uint64_t sw = cfg_.switch_step();
  const bool needs_uniform = first < std::min(sw, last);
  const bool needs_adaptive = last > sw && sw < cfg_.total_steps;
  if (needs_uniform) {
    if (!uniform || uniform->phase != Phase::kUniform) {
      throw Error(ErrorCode::kMissingScore, "uniform table", "steps before the switch need a uniform weight table");
    }
    uniform_.emplace(*uniform, cfg_);
    cohort_checksum_ = uniform->cohort_checksum;
  }
  if (needs_adaptive) {
    if (!adaptive || adaptive->phase != Phase::kAdaptive) {
      throw Error(ErrorCode::kMissingScore, "adaptive table", "steps after the switch need an adaptive weight table");
    }
    if (uniform_ && adaptive->cohort_checksum != cohort_checksum_) {
      throw Error(ErrorCode::kChecksumMismatch, "adaptive table", "cohort differs from the uniform table");
    }
    adaptive_.emplace(*adaptive, cfg_);
    cohort_checksum_ = adaptive->cohort_checksum;
    marker_pending_ = first <= sw;
  }
  if (!needs_uniform && !needs_adaptive && uniform) cohort_checksum_ = uniform->cohort_checksum;
}

std::optional<PlanEvent> EpochPlan::next() {
  if (step_ >= last_) return std::nullopt;
  const Phase phase = phase_schedule(step_, cfg_);
  if (phase == Phase::kAdaptive && marker_pending_) {
    marker_pending_ = false;
    return RefreshMarker{step_};
  }
  const BatchSampler& sampler = phase == Phase::kUniform ? *uniform_ : *adaptive_;
  PlannedBatch batch{step_, sampler.draw_batch(step_)};
  ++step_;
  return batch;
}

PlanTextWriter::PlanTextWriter(std::ostream& out, const EpochPlan& plan) : out_(out) {
  out_ << JsonLine()
              .field("batch_size", static_cast<std::uint64_t>(plan.config().batch_size))
              .field("cohort_checksum", checksum_hex(plan.cohort_checksum()))
              .field("first_step", plan.first_step())
              .field("format", "emma-plan")
              .field("last_step", plan.last_step())
              .field("seed", plan.config().seed)
              .str()
       << '\n';
}

void PlanTextWriter::write(const PlanEvent& event) {
  if (const auto* marker = std::get_if<RefreshMarker>(&event)) {
    out_ << JsonLine().field("refresh", marker->step).str() << '\n';
    return;
  }
  const auto& batch = std::get<PlannedBatch>(event);
  for (std::size_t slot = 0; slot < batch.ids.size(); ++slot) {
    out_ << JsonLine()
                .field("step", batch.step)
                .field("slot", static_cast<std::uint64_t>(slot))
                .field("id", batch.ids[slot])
                .str()
         << '\n';
  }
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 8);
}

void put_frame(std::ostream& out, std::uint64_t step, std::uint32_t slot, const std::string& id) {
  out.write("EMBT", 4);
  put_u64(out, step);
  put_u32(out, slot);
  put_u32(out, static_cast<std::uint32_t>(id.size()));
  out.write(id.data(), static_cast<std::streamsize>(id.size()));
}

}  // namespace

PlanBinaryWriter::PlanBinaryWriter(std::ostream& out, const EpochPlan& plan) : out_(out) {
  out_.write("EMBP", 4);
  put_u32(out_, 1);
  put_u64(out_, plan.cohort_checksum());
}

void PlanBinaryWriter::write(const PlanEvent& event) {
  if (const auto* marker = std::get_if<RefreshMarker>(&event)) {
    put_frame(out_, marker->step, kRefreshSlot, {});
    return;
  }
  const auto& batch = std::get<PlannedBatch>(event);
  for (std::size_t slot = 0; slot < batch.ids.size(); ++slot) {
    put_frame(out_, batch.step, static_cast<std::uint32_t>(slot), batch.ids[slot]);
  }
}

std::vector<PlanEvent> read_text_plan(std::istream& in, PlanHeader* header) {
  std::vector<PlanEvent> events;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto where = fmt::format("plan:{}", line);
    try {
      const auto obj = nlohmann::json::parse(text);
      if (line == 1) {
        if (obj.at("format").get<std::string>() != "emma-plan") {
          throw Error(ErrorCode::kMalformedRecord, where, "not a batch plan");
        }
        if (header) {
          if (!parse_checksum_hex(obj.at("cohort_checksum").get<std::string>(), header->cohort_checksum)) {
            throw Error(ErrorCode::kMalformedRecord, where, "bad cohort checksum");
          }
          header->first_step = obj.at("first_step").get<std::uint64_t>();
          header->last_step = obj.at("last_step").get<std::uint64_t>();
          header->seed = obj.at("seed").get<std::uint64_t>();
          header->batch_size = obj.at("batch_size").get<std::size_t>();
        }
        continue;
      }
      if (obj.contains("refresh")) {
        events.emplace_back(RefreshMarker{obj.at("refresh").get<std::uint64_t>()});
        continue;
      }
      const auto step = obj.at("step").get<std::uint64_t>();
      const auto slot = obj.at("slot").get<std::size_t>();
      auto* last = events.empty() ? nullptr : std::get_if<PlannedBatch>(&events.back());
      if (last == nullptr || last->step != step) {
        events.emplace_back(PlannedBatch{step, {}});
        last = std::get_if<PlannedBatch>(&events.back());
      }
      if (slot != last->ids.size()) throw Error(ErrorCode::kMalformedRecord, where, "slots out of order");
      last->ids.push_back(obj.at("id").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, where, e.what());
    }
  }
  return events;
}

}  // namespace emma::sampler
