#pragma once

#include <span>
#include <string>
#include <vector>

#include "emma/core/grids.hpp"
#include "emma/quality/report.hpp"

namespace emma::quality {

// Text embeddings of the three prompt components.
struct PromptEmbeddings {
  std::vector<double> foreground;
  std::vector<double> background;
  std::vector<double> lighting;
};

// Orders the vectors of a three-entry embedding set by their tags.
PromptEmbeddings prompt_embeddings(const EmbeddingSet& set, std::span<const std::string> tags);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Mean cosine similarity between every frame/view embedding and each prompt
// component; overall is the mean of the three component means.
AlignmentReport clip_alignment(const EmbeddingSet& frame_embeddings, const PromptEmbeddings& prompts);

}  // namespace emma::quality
