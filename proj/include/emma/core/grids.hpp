#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace emma {

// Per-frame depth maps in meters, frame-major then row-major.
struct DepthGrid {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  std::size_t pixel_count() const noexcept { return frames * height * width; }
  DepthGrid scaled(double factor) const;

  friend bool operator==(const DepthGrid&, const DepthGrid&) = default;
};

// `count` embedding vectors of length `dim`, stored contiguously.
struct EmbeddingSet {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> vector(std::size_t i) const { return {values.data() + i * dim, dim}; }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

}  // namespace emma
