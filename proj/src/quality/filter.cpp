#include "emma/quality/filter.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emma/core/binary_io.hpp"
#include "emma/core/error.hpp"
#include "emma/core/ndjson.hpp"
#include "emma/quality/alignment.hpp"
#include "emma/quality/depth.hpp"
#include "emma/quality/matcher.hpp"

namespace emma::quality {

void FilterConfig::validate() const {
  for (const auto& [name, v] : {std::pair{"filter.min_mat_pix", min_mat_pix},
                                std::pair{"filter.max_sq_rel", max_sq_rel},
                                std::pair{"filter.min_overall_sim", min_overall_sim}}) {
    if (v && !std::isfinite(*v)) throw Error(ErrorCode::kInvalidConfig, name, "threshold must be finite");
  }
}

std::vector<std::string> failed_criteria(const QualityReport& report, const FilterConfig& cfg, const std::string& id) {
  std::vector<std::string> failed;
  auto missing = [&](const char* what) {
    return Error(ErrorCode::kMissingQualityReport, id, fmt::format("no {} metrics for an enforced threshold", what));
  };
  if (cfg.min_mat_pix) {
    if (!report.views) throw missing("multi-view");
    if (report.views->mat_pix < *cfg.min_mat_pix) failed.emplace_back(kCriterionMatPix);
  }
  if (cfg.max_sq_rel) {
    if (!report.depth) throw missing("depth");
    if (report.depth->sq_rel > *cfg.max_sq_rel) failed.emplace_back(kCriterionSqRel);
  }
  if (cfg.min_overall_sim) {
    if (!report.alignment) throw missing("text-video alignment");
    if (report.alignment->overall < *cfg.min_overall_sim) failed.emplace_back(kCriterionOverallSim);
  }
  return failed;
}

std::vector<SampleRecord> apply_filter(std::vector<SampleRecord> samples, const FilterConfig& cfg) {
  cfg.validate();
  for (auto& s : samples) {
    if (s.source == Source::kReal) continue;
    if (!s.quality) throw Error(ErrorCode::kMissingQualityReport, s.id);
    s.quality->failed = failed_criteria(*s.quality, cfg, s.id);
    s.quality->evaluated = true;
    if (!s.quality->failed.empty()) s.weight = 0.0;
  }
  return samples;
}

QualityReport evaluate_entry(const DatasetManifest& manifest, const ManifestEntry& entry) {
  QualityReport rep;
  if (entry.depth_pred && entry.depth_gt) {
    try {
      rep.depth = depth_metrics(read_depth(manifest.resolve(*entry.depth_pred)),
                                read_depth(manifest.resolve(*entry.depth_gt)));
    } catch (const Error& e) {
      throw Error(e.code(), entry.id, e.what());
    }
  }
  if (entry.match_counts) {
    rep.views = match_report(entry.match_counts->left, entry.match_counts->right);
  }
  if (entry.frame_embeddings && entry.prompt_embeddings) {
    try {
      const auto frames = read_embeddings(manifest.resolve(*entry.frame_embeddings));
      const auto prompts = prompt_embeddings(read_embeddings(manifest.resolve(*entry.prompt_embeddings)),
                                             entry.prompt_tags);
      rep.alignment = clip_alignment(frames, prompts);
    } catch (const Error& e) {
      throw Error(e.code(), entry.id, e.what());
    }
  }
  return rep;
}

std::string verdict_text(const QualityReport& report) {
  if (report.failed.empty()) return "PASS";
  std::string out = "FAIL:";
  for (std::size_t i = 0; i < report.failed.size(); ++i) {
    if (i > 0) out += ',';
    out += report.failed[i];
  }
  return out;
}

std::string quality_line(const std::string& id, const QualityReport& report) {
  auto opt = [](bool present, double v) { return present ? std::optional<double>(v) : std::nullopt; };
  const bool d = report.depth.has_value();
  const bool a = report.alignment.has_value();
  return JsonLine()
      .field("id", id)
      .real("rmse", opt(d, d ? report.depth->rmse : 0.0))
      .real("abs_rel", opt(d, d ? report.depth->abs_rel : 0.0))
      .real("sq_rel", opt(d, d ? report.depth->sq_rel : 0.0))
      .real("mat_pix", opt(report.views.has_value(), report.views ? report.views->mat_pix : 0.0))
      .real("sim_fg", opt(a, a ? report.alignment->foreground : 0.0))
      .real("sim_bg", opt(a, a ? report.alignment->background : 0.0))
      .real("sim_light", opt(a, a ? report.alignment->lighting : 0.0))
      .real("overall_sim", opt(a, a ? report.alignment->overall : 0.0))
      .field("verdict", verdict_text(report))
      .str();
}

}  // namespace emma::quality
