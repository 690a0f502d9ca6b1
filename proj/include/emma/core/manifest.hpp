#pragma once

// Dataset manifest: newline-delimited JSON. The first line is a header
//
//   {"format":"emma-manifest","task":"fold_cloth","version":"1"}
//
// and every following line describes one episode. Keys are written in sorted
// order with compact separators so a canonical manifest survives a
// load/write round trip byte for byte. Record keys:
//
//   id, source ("real" | "generated"), task, traj_file, checksum_traj
//   pred_file + checksum_pred                          optional
//   depth_files {gt, pred} + checksum_depth_gt/_pred   optional
//   embed_file + checksum_embed                        optional, per frame/view
//   prompt_file + checksum_prompt + prompt_tags        optional, 3 vectors
//   match_counts {left: [..], right: [..]}             optional
//   weight, verdict                                    written by the filter
//
// File paths are relative to the manifest's directory. Checksums are FNV-1a
// 64 over the file bytes, as 16 lowercase hex digits.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emma/core/trajectory.hpp"
#include "emma/quality/report.hpp"

namespace emma {

enum class Source { kReal, kGenerated };

std::string_view source_name(Source source);
std::optional<Source> parse_source(std::string_view text);

struct FileRef {
  std::string path;
  std::uint64_t checksum = 0;
};

struct MatchCounts {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

struct ManifestEntry {
  std::string id;
  Source source = Source::kReal;
  std::string task;
  FileRef trajectory;
  std::optional<FileRef> predictions;
  std::optional<FileRef> depth_pred;
  std::optional<FileRef> depth_gt;
  std::optional<FileRef> frame_embeddings;
  std::optional<FileRef> prompt_embeddings;
  std::vector<std::string> prompt_tags;
  std::optional<MatchCounts> match_counts;
  std::optional<double> weight;
  std::optional<std::vector<std::string>> verdict;
  std::size_t line = 0;  // 1-based line in the source file, 0 if built in memory

  bool retained() const noexcept { return !weight || *weight != 0.0; }
};

struct DatasetManifest {
  std::string task;
  std::string version = "1";
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const FileRef& ref) const { return base_dir / ref.path; }
  const ManifestEntry* find(std::string_view id) const;
};

// Parses and validates a manifest. Ids and checksums are verified eagerly;
// payloads are left on disk until load_sample.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::istream& in, std::filesystem::path base_dir, std::string_view name);

void write_manifest(std::ostream& out, const DatasetManifest& manifest);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// Builds an entry for a payload already on disk, computing its checksum.
FileRef make_file_ref(const std::filesystem::path& base_dir, const std::string& relative);

// One materialized episode with everything the pipeline attaches to it.
struct SampleRecord {
  std::string id;
  Source source = Source::kReal;
  std::string task;
  JointTrajectory trajectory;
  std::vector<ActionChunkPair> prediction_windows;
  std::optional<quality::QualityReport> quality;
  std::optional<double> score;
  std::optional<double> weight;

  bool retained() const noexcept { return !weight || *weight != 0.0; }
};

struct LoadOptions {
  bool predictions = true;
  // Overrides the manifest's pred_file with <dir>/<id>.empr when set.
  std::optional<std::filesystem::path> prediction_dir;
};

// Reads and validates the trajectory (and predictions) for one entry.
SampleRecord load_sample(const DatasetManifest& manifest, const ManifestEntry& entry, const LoadOptions& opts = {});

}  // namespace emma
