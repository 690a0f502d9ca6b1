#include "emma/core/binary_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma {
namespace {

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

  void expect_magic(std::string_view magic) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, magic.data(), 4) != 0) {
      fail(fmt::format("bad magic, expected \"{}\"", magic));
    }
    pos_ += 4;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  // Checked before allocating so a corrupt header cannot request a huge buffer.
  void require_floats(std::size_t count) const {
    if ((bytes_.size() - pos_) / 4 < count) fail("truncated payload");
  }

  void f32_into(std::span<double> out) {
    require_floats(out.size());
    for (double& d : out) d = static_cast<double>(f32());
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) fail(fmt::format("{} trailing bytes", bytes_.size() - pos_));
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kMalformedRecord, name_, fmt::format("{} at byte {}", what, pos_));
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated payload");
  }

  std::vector<unsigned char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void f32_all(std::span<const double> vs) {
    for (double v : vs) f32(v);
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::kIo, path.string(), "cannot open for writing");
    os.write(out_.data(), static_cast<std::streamsize>(out_.size()));
    if (!os) throw Error(ErrorCode::kIo, path.string(), "write failed");
  }

 private:
  std::vector<char> out_;
};

ByteReader open_reader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ByteReader(std::move(bytes), path.filename().string());
}

std::uint32_t checked_u32(std::size_t v, const std::filesystem::path& path) {
  if (v > UINT32_MAX) throw Error(ErrorCode::kMalformedRecord, path.filename().string(), "dimension exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

JointTrajectory read_trajectory(const std::filesystem::path& path) {
  auto r = open_reader(path);
  r.expect_magic("EMTR");
  const std::size_t frames = r.u32();
  const std::size_t joints = r.u32();
  JointTrajectory traj;
  traj.dt = static_cast<double>(r.f32());
  r.require_floats(frames * joints + 2 * joints);
  traj.angles = Matrix(frames, joints);
  r.f32_into(traj.angles.values());
  traj.limits.resize(joints);
  for (auto& lim : traj.limits) {
    lim.lower = static_cast<double>(r.f32());
    lim.upper = static_cast<double>(r.f32());
  }
  r.expect_end();
  return traj;
}

void write_trajectory(const std::filesystem::path& path, const JointTrajectory& traj) {
  if (traj.limits.size() != traj.joints()) {
    throw Error(ErrorCode::kShapeMismatch, path.filename().string(), "limits do not match joint count");
  }
  ByteWriter w;
  w.magic("EMTR");
  w.u32(checked_u32(traj.frames(), path));
  w.u32(checked_u32(traj.joints(), path));
  w.f32(traj.dt);
  w.f32_all(traj.angles.values());
  for (const auto& lim : traj.limits) {
    w.f32(lim.lower);
    w.f32(lim.upper);
  }
  w.save(path);
}

std::vector<ActionChunkPair> read_predictions(const std::filesystem::path& path, std::size_t joints) {
  auto r = open_reader(path);
  r.expect_magic("EMPR");
  const std::uint32_t count = r.u32();
  std::vector<ActionChunkPair> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ActionChunkPair pair;
    pair.window_start = r.u32();
    const std::size_t len = r.u32();
    if (len == 0) r.fail(fmt::format("window {} has zero length", i));
    r.require_floats(2 * len * joints);
    pair.predicted = Matrix(len, joints);
    pair.reference = Matrix(len, joints);
    r.f32_into(pair.predicted.values());
    r.f32_into(pair.reference.values());
    out.push_back(std::move(pair));
  }
  r.expect_end();
  return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<ActionChunkPair>& windows) {
  ByteWriter w;
  w.magic("EMPR");
  w.u32(checked_u32(windows.size(), path));
  for (const auto& pair : windows) {
    if (pair.predicted.rows() != pair.reference.rows() || pair.predicted.cols() != pair.reference.cols()) {
      throw Error(ErrorCode::kShapeMismatch, path.filename().string(), "predicted and reference shapes differ");
    }
    w.u32(checked_u32(pair.window_start, path));
    w.u32(checked_u32(pair.window_len(), path));
    w.f32_all(pair.predicted.values());
    w.f32_all(pair.reference.values());
  }
  w.save(path);
}

DepthGrid read_depth(const std::filesystem::path& path) {
  auto r = open_reader(path);
  r.expect_magic("EMDP");
  DepthGrid grid;
  grid.frames = r.u32();
  grid.height = r.u32();
  grid.width = r.u32();
  r.require_floats(grid.frames * grid.height * grid.width);
  grid.values.resize(grid.pixel_count());
  r.f32_into(grid.values);
  r.expect_end();
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values[i];
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorCode::kNonPositiveDepth, path.filename().string(),
                  fmt::format("value {} at pixel {}", v, i));
    }
  }
  return grid;
}

void write_depth(const std::filesystem::path& path, const DepthGrid& grid) {
  if (grid.values.size() != grid.pixel_count()) {
    throw Error(ErrorCode::kShapeMismatch, path.filename().string(), "depth values do not match shape");
  }
  ByteWriter w;
  w.magic("EMDP");
  w.u32(checked_u32(grid.frames, path));
  w.u32(checked_u32(grid.height, path));
  w.u32(checked_u32(grid.width, path));
  w.f32_all(grid.values);
  w.save(path);
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  auto r = open_reader(path);
  r.expect_magic("EMEM");
  EmbeddingSet set;
  set.count = r.u32();
  set.dim = r.u32();
  r.require_floats(set.count * set.dim);
  set.values.resize(set.count * set.dim);
  r.f32_into(set.values);
  r.expect_end();
  return set;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  if (set.values.size() != set.count * set.dim) {
    throw Error(ErrorCode::kShapeMismatch, path.filename().string(), "embedding values do not match shape");
  }
  ByteWriter w;
  w.magic("EMEM");
  w.u32(checked_u32(set.count, path));
  w.u32(checked_u32(set.dim, path));
  w.f32_all(set.values);
  w.save(path);
}

}  // namespace emma
