#include "emma/quality/matcher.hpp"

#include <exception>
#include <limits>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma::quality {

double PatchMatcherOptions::threshold() const {
  if (tau) return *tau;
  return 1e-6 * static_cast<double>(patch * patch) * max_intensity * max_intensity;
}

PatchMatcher::PatchMatcher(PatchMatcherOptions opts) : opts_(opts) {
  if (opts_.patch == 0 || opts_.stride == 0) {
    throw Error(ErrorCode::kInvalidConfig, "matcher", "patch and stride must be >= 1");
  }
  if (!(opts_.threshold() >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "matcher", "tau must be >= 0");
}

std::vector<Correspondence> PatchMatcher::match(const ImageGrid& center, const ImageGrid& side) const {
  if (center.height != side.height) {
    throw Error(ErrorCode::kShapeMismatch, "matcher",
                fmt::format("center height {} vs side height {}", center.height, side.height));
  }
  if (center.pixels.size() != center.height * center.width || side.pixels.size() != side.height * side.width) {
    throw Error(ErrorCode::kShapeMismatch, "matcher", "pixel buffer does not match shape");
  }
  const std::size_t p = opts_.patch;
  std::vector<Correspondence> out;
  if (center.height < p || center.width < p || side.width < p) return out;

  const double tau = opts_.threshold();
  for (std::size_t y = 0; y + p <= center.height; y += opts_.stride) {
    for (std::size_t x = 0; x + p <= center.width; x += opts_.stride) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_x = 0;
      for (std::size_t sx = 0; sx < side.width; ++sx) {
        double ssd = 0.0;
        for (std::size_t dy = 0; dy < p && ssd < best; ++dy) {
          for (std::size_t dx = 0; dx < p; ++dx) {
            const double d = center.at(y + dy, x + dx) - side.at(y + dy, (sx + dx) % side.width);
            ssd += d * d;
          }
        }
        if (ssd < best) {
          best = ssd;
          best_x = sx;
        }
      }
      if (best <= tau) out.push_back({x, y, best_x, y});
    }
  }
  return out;
}

std::size_t pixel_match_count(const ImageGrid& center, const ImageGrid& side, const Matcher& matcher) {
  return matcher.match(center, side).size();
}

MatchReport match_report(std::vector<std::size_t> left_counts, std::vector<std::size_t> right_counts) {
  MatchReport rep;
  rep.left_counts = std::move(left_counts);
  rep.right_counts = std::move(right_counts);
  const std::size_t n = rep.left_counts.size() + rep.right_counts.size();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "match_report", "no per-frame counts");
  double total = 0.0;
  for (auto c : rep.left_counts) total += static_cast<double>(c);
  for (auto c : rep.right_counts) total += static_cast<double>(c);
  rep.mat_pix = total / static_cast<double>(n);
  return rep;
}

MatchReport match_video(std::span<const ImageGrid> center, std::span<const ImageGrid> left,
                        std::span<const ImageGrid> right, const Matcher& matcher) {
  if (center.size() != left.size() || center.size() != right.size()) {
    throw Error(ErrorCode::kShapeMismatch, "match_video", "views have different frame counts");
  }
  std::vector<std::size_t> lc, rc;
  for (std::size_t f = 0; f < center.size(); ++f) {
    try {
      lc.push_back(pixel_match_count(center[f], left[f], matcher));
      rc.push_back(pixel_match_count(center[f], right[f], matcher));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMatcherFailure, fmt::format("frame {}", f), e.what());
    }
  }
  return match_report(std::move(lc), std::move(rc));
}

}  // namespace emma::quality
