#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "emma/quality/report.hpp"

namespace emma::quality {

// Single-channel image, row-major.
struct ImageGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
};

struct Correspondence {
  std::size_t center_x = 0;
  std::size_t center_y = 0;
  std::size_t side_x = 0;
  std::size_t side_y = 0;
};

// Pluggable view matcher. Implementations must be deterministic: identical
// inputs give identical correspondences.
class Matcher {
 public:
  virtual ~Matcher() = default;
  virtual std::vector<Correspondence> match(const ImageGrid& center, const ImageGrid& side) const = 0;
};

struct PatchMatcherOptions {
  std::size_t patch = 8;
  std::size_t stride = 8;
  double max_intensity = 1.0;
  // Defaults to 1e-6 * patch * patch * max_intensity^2 when unset.
  std::optional<double> tau;

  double threshold() const;
};

// Reference matcher. Every patch x patch block of the center image on a
// stride grid is compared against the side image at all horizontal offsets on
// the same rows (columns wrap around). A block matches when its best sum of
// squared differences is <= threshold(); ties go to the smallest column.
class PatchMatcher final : public Matcher {
 public:
  explicit PatchMatcher(PatchMatcherOptions opts = {});

  std::vector<Correspondence> match(const ImageGrid& center, const ImageGrid& side) const override;

  const PatchMatcherOptions& options() const noexcept { return opts_; }

 private:
  PatchMatcherOptions opts_;
};

std::size_t pixel_match_count(const ImageGrid& center, const ImageGrid& side, const Matcher& matcher);

// Pools per-frame counts of both view pairs into one mean.
MatchReport match_report(std::vector<std::size_t> left_counts, std::vector<std::size_t> right_counts);

// Runs the matcher over a multi-view video, frame by frame. Matcher errors are
// rethrown as MatcherFailure naming the frame.
MatchReport match_video(std::span<const ImageGrid> center, std::span<const ImageGrid> left,
                        std::span<const ImageGrid> right, const Matcher& matcher);

}  // namespace emma::quality
