#pragma once

// Sidecar binary payloads. All integers and floats are little-endian; floats
// are IEEE-754 binary32.
//
//   trajectory  "EMTR" u32 frames, u32 joints, f32 dt
//               frames*joints f32 angles (row-major, degrees)
//               joints * (f32 lower, f32 upper) limits
//   prediction  "EMPR" u32 window count, then per window
//               u32 start, u32 len, len*joints f32 predicted, len*joints f32 reference
//               (joints is taken from the owning trajectory)
//   depth       "EMDP" u32 frames, u32 height, u32 width, frames*height*width f32
//   embedding   "EMEM" u32 count, u32 dim, count*dim f32

#include <cstddef>
#include <filesystem>
#include <vector>

#include "emma/core/grids.hpp"
#include "emma/core/trajectory.hpp"

namespace emma {

JointTrajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const JointTrajectory& traj);

std::vector<ActionChunkPair> read_predictions(const std::filesystem::path& path, std::size_t joints);
void write_predictions(const std::filesystem::path& path, const std::vector<ActionChunkPair>& windows);

DepthGrid read_depth(const std::filesystem::path& path);
void write_depth(const std::filesystem::path& path, const DepthGrid& grid);

EmbeddingSet read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);

}  // namespace emma
