#include "emma/quality/alignment.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma::quality {
namespace {

double norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double mean_cosine(const EmbeddingSet& frames, std::span<const double> component, const char* name) {
  if (component.size() != frames.dim) {
    throw Error(ErrorCode::kDimensionMismatch, name,
                fmt::format("prompt dim {} vs frame dim {}", component.size(), frames.dim));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < frames.count; ++i) total += cosine_similarity(frames.vector(i), component);
  return total / static_cast<double>(frames.count);
}

}  // namespace

PromptEmbeddings prompt_embeddings(const EmbeddingSet& set, std::span<const std::string> tags) {
  if (set.count != 3 || tags.size() != 3) {
    throw Error(ErrorCode::kDimensionMismatch, "prompt embeddings", "expected exactly 3 tagged vectors");
  }
  PromptEmbeddings out;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = set.vector(i);
    std::vector<double> copy(v.begin(), v.end());
    if (tags[i] == "foreground") {
      out.foreground = std::move(copy);
    } else if (tags[i] == "background") {
      out.background = std::move(copy);
    } else if (tags[i] == "lighting") {
      out.lighting = std::move(copy);
    } else {
      throw Error(ErrorCode::kMalformedRecord, tags[i], "unknown prompt component tag");
    }
  }
  if (out.foreground.empty() || out.background.empty() || out.lighting.empty()) {
    throw Error(ErrorCode::kMalformedRecord, "prompt_tags", "each component must appear once");
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine", fmt::format("{} vs {}", a.size(), b.size()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += (a[i] / na) * (b[i] / nb);
  return dot;
}

AlignmentReport clip_alignment(const EmbeddingSet& frame_embeddings, const PromptEmbeddings& prompts) {
  if (frame_embeddings.count == 0) throw Error(ErrorCode::kEmptyInput, "clip_alignment", "no frame embeddings");
  if (frame_embeddings.values.size() != frame_embeddings.count * frame_embeddings.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "clip_alignment", "embedding buffer does not match shape");
  }
  AlignmentReport rep;
  rep.foreground = mean_cosine(frame_embeddings, prompts.foreground, "foreground");
  rep.background = mean_cosine(frame_embeddings, prompts.background, "background");
  rep.lighting = mean_cosine(frame_embeddings, prompts.lighting, "lighting");
  rep.overall = (rep.foreground + rep.background + rep.lighting) / 3.0;
  return rep;
}

}  // namespace emma::quality
