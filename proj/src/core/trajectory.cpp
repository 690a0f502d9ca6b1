#include "emma/core/trajectory.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma {

std::vector<Violation> validate_trajectory(const JointTrajectory& traj) {
  std::vector<Violation> out;
  if (traj.frames() < 1) out.push_back({"frames must be >= 1", std::nullopt, std::nullopt});
  if (traj.joints() < 1) out.push_back({"joints must be >= 1", std::nullopt, std::nullopt});
  if (!(traj.dt > 0.0) || !std::isfinite(traj.dt)) {
    out.push_back({"dt must be > 0", std::nullopt, std::nullopt});
  }
  if (traj.limits.size() != traj.joints()) {
    out.push_back({fmt::format("expected {} joint limits, found {}", traj.joints(), traj.limits.size()),
                   std::nullopt, std::nullopt});
  }
  for (std::size_t j = 0; j < traj.limits.size(); ++j) {
    const auto& lim = traj.limits[j];
    if (!std::isfinite(lim.lower) || !std::isfinite(lim.upper) || !(lim.lower < lim.upper)) {
      out.push_back({fmt::format("joint {} limits must satisfy lower < upper", j), std::nullopt, j});
    }
  }
  for (std::size_t f = 0; f < traj.frames(); ++f) {
    for (std::size_t j = 0; j < traj.joints(); ++j) {
      if (!std::isfinite(traj.angles(f, j))) {
        out.push_back({fmt::format("non-finite angle at ({},{})", f, j), f, j});
      }
    }
  }
  return out;
}

Matrix window(const JointTrajectory& traj, std::size_t start, std::size_t len) {
  if (len == 0 || start >= traj.frames() || len > traj.frames() - start) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("window[{}, +{})", start, len),
                fmt::format("trajectory has {} frames", traj.frames()));
  }
  return traj.angles.slice_rows(start, len);
}

void check_chunk_pair(const ActionChunkPair& pair, const JointTrajectory& traj) {
  if (pair.predicted.rows() != pair.reference.rows() || pair.predicted.cols() != pair.reference.cols()) {
    throw Error(ErrorCode::kShapeMismatch, fmt::format("window@{}", pair.window_start),
                "predicted and reference shapes differ");
  }
  if (pair.reference.cols() != traj.joints()) {
    throw Error(ErrorCode::kShapeMismatch, fmt::format("window@{}", pair.window_start),
                fmt::format("chunk has {} joints, trajectory has {}", pair.reference.cols(), traj.joints()));
  }
  if (pair.window_len() == 0 || pair.window_start + pair.window_len() > traj.frames()) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("window@{}", pair.window_start),
                fmt::format("length {} exceeds trajectory of {} frames", pair.window_len(), traj.frames()));
  }
}

}  // namespace emma
