#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "emma/core/matrix.hpp"

namespace emma {

struct JointLimit {
  double lower = 0.0;  // degrees
  double upper = 0.0;  // degrees

  friend bool operator==(const JointLimit&, const JointLimit&) = default;
};

// Time-indexed joint angles of one episode. `angles` is frames x joints in
// degrees, sampled every `dt` seconds.
struct JointTrajectory {
  Matrix angles;
  double dt = 0.0;
  std::vector<JointLimit> limits;

  std::size_t frames() const noexcept { return angles.rows(); }
  std::size_t joints() const noexcept { return angles.cols(); }

  friend bool operator==(const JointTrajectory&, const JointTrajectory&) = default;
};

// A policy's predicted action chunk paired with the demonstrated actions over
// the same frames. The window length is the number of rows.
struct ActionChunkPair {
  Matrix predicted;
  Matrix reference;
  std::size_t window_start = 0;

  std::size_t window_len() const noexcept { return reference.rows(); }

  friend bool operator==(const ActionChunkPair&, const ActionChunkPair&) = default;
};

struct Violation {
  std::string message;
  std::optional<std::size_t> frame;
  std::optional<std::size_t> joint;
};

// Lists every broken trajectory invariant. An empty result means valid.
std::vector<Violation> validate_trajectory(const JointTrajectory& traj);

// Rows [start, start + len) of the angle matrix. Throws OutOfRange when the
// window runs past the last frame or is empty.
Matrix window(const JointTrajectory& traj, std::size_t start, std::size_t len);

// Checks an ActionChunkPair against the trajectory it was cut from.
void check_chunk_pair(const ActionChunkPair& pair, const JointTrajectory& traj);

}  // namespace emma
