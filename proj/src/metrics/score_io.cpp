#include "emma/metrics/score_io.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "emma/core/error.hpp"
#include "emma/core/ndjson.hpp"

namespace emma::metrics {

std::string score_line(const ScoredSample& sample) {
  return JsonLine()
      .field("id", sample.raw.id)
      .real("r_mse", sample.raw.mse)
      .real("r_smooth", sample.raw.smooth)
      .field("r_limit", sample.raw.limit)
      .real("mse_n", sample.normalized.mse_n)
      .real("smooth_n", sample.normalized.smooth_n)
      .real("limit_n", sample.normalized.limit_n)
      .real("s", sample.normalized.fused)
      .str();
}

void write_scores(std::ostream& out, std::vector<ScoredSample> samples) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.raw.id < b.raw.id; });
  for (const auto& s : samples) out << score_line(s) << '\n';
}

void write_scores(const std::filesystem::path& path, std::vector<ScoredSample> samples) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, path.string(), "cannot open for writing");
  write_scores(os, std::move(samples));
}

std::map<std::string, ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  std::map<std::string, ScoreRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto where = fmt::format("{}:{}", path.filename().string(), line);
    try {
      const auto obj = nlohmann::json::parse(text);
      ScoreRecord r;
      r.id = obj.at("id").get<std::string>();
      if (!obj.at("r_mse").is_null()) r.r_mse = obj.at("r_mse").get<double>();
      r.r_smooth = obj.at("r_smooth").get<double>();
      r.r_limit = obj.at("r_limit").get<int>();
      r.normalized.mse_n = obj.at("mse_n").get<double>();
      r.normalized.smooth_n = obj.at("smooth_n").get<double>();
      r.normalized.limit_n = obj.at("limit_n").get<double>();
      r.normalized.fused = obj.at("s").get<double>();
      if (!(r.normalized.fused >= 0.0 && r.normalized.fused <= 1.0)) {
        throw Error(ErrorCode::kMalformedRecord, where, "score s outside [0, 1]");
      }
      if (!out.emplace(r.id, r).second) throw Error(ErrorCode::kDuplicateId, r.id, where);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, where, e.what());
    }
  }
  return out;
}

}  // namespace emma::metrics
