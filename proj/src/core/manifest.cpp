#include "emma/core/manifest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "emma/core/binary_io.hpp"
#include "emma/core/checksum.hpp"
#include "emma/core/error.hpp"

namespace emma {
namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> kRecordKeys = {
    "checksum_depth_gt", "checksum_depth_pred", "checksum_embed", "checksum_pred", "checksum_prompt",
    "checksum_traj",     "depth_files",         "embed_file",     "id",            "match_counts",
    "pred_file",         "prompt_file",         "prompt_tags",    "source",        "task",
    "traj_file",         "verdict",             "weight"};

const std::set<std::string, std::less<>> kHeaderKeys = {"format", "task", "version"};

constexpr std::string_view kFormatTag = "emma-manifest";

class LineContext {
 public:
  LineContext(std::string_view name, std::size_t line) : name_(name), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}", name_, line_), what);
  }

  const json& require(const json& obj, std::string_view key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(fmt::format("missing field \"{}\"", key));
    return *it;
  }

  std::string string_field(const json& obj, std::string_view key) const {
    const json& v = require(obj, key);
    if (!v.is_string()) fail(fmt::format("field \"{}\" must be a string", key));
    return v.get<std::string>();
  }

  std::uint64_t checksum_field(const json& obj, std::string_view key) const {
    const std::string text = string_field(obj, key);
    std::uint64_t out = 0;
    if (!parse_checksum_hex(text, out)) fail(fmt::format("field \"{}\" is not a 16-digit hex checksum", key));
    return out;
  }

  std::vector<std::size_t> count_list(const json& v, std::string_view key) const {
    if (!v.is_array()) fail(fmt::format("\"{}\" must be an array", key));
    std::vector<std::size_t> out;
    for (const auto& c : v) {
      if (!c.is_number_unsigned()) fail(fmt::format("\"{}\" entries must be non-negative integers", key));
      out.push_back(c.get<std::size_t>());
    }
    return out;
  }

  std::vector<std::string> string_list(const json& v, std::string_view key) const {
    if (!v.is_array()) fail(fmt::format("\"{}\" must be an array", key));
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) fail(fmt::format("\"{}\" entries must be strings", key));
      out.push_back(s.get<std::string>());
    }
    return out;
  }

 private:
  std::string_view name_;
  std::size_t line_;
};

std::optional<FileRef> optional_ref(const LineContext& ctx, const json& obj, std::string_view path_key,
                                    std::string_view sum_key) {
  const bool has_path = obj.contains(path_key);
  const bool has_sum = obj.contains(sum_key);
  if (has_path != has_sum) ctx.fail(fmt::format("\"{}\" and \"{}\" must appear together", path_key, sum_key));
  if (!has_path) return std::nullopt;
  return FileRef{ctx.string_field(obj, path_key), ctx.checksum_field(obj, sum_key)};
}

ManifestEntry parse_entry(const json& obj, const LineContext& ctx, std::size_t line) {
  if (!obj.is_object()) ctx.fail("record must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!kRecordKeys.contains(key)) ctx.fail(fmt::format("unknown field \"{}\"", key));
  }
  ManifestEntry e;
  e.line = line;
  e.id = ctx.string_field(obj, "id");
  if (e.id.empty()) ctx.fail("empty id");
  const auto source = parse_source(ctx.string_field(obj, "source"));
  if (!source) ctx.fail("source must be \"real\" or \"generated\"");
  e.source = *source;
  e.task = ctx.string_field(obj, "task");
  e.trajectory = FileRef{ctx.string_field(obj, "traj_file"), ctx.checksum_field(obj, "checksum_traj")};
  e.predictions = optional_ref(ctx, obj, "pred_file", "checksum_pred");
  e.frame_embeddings = optional_ref(ctx, obj, "embed_file", "checksum_embed");
  e.prompt_embeddings = optional_ref(ctx, obj, "prompt_file", "checksum_prompt");

  if (obj.contains("depth_files")) {
    const json& d = obj.at("depth_files");
    if (!d.is_object() || d.size() != 2 || !d.contains("gt") || !d.contains("pred")) {
      ctx.fail("\"depth_files\" must be an object with exactly \"gt\" and \"pred\"");
    }
    e.depth_gt = FileRef{ctx.string_field(d, "gt"), ctx.checksum_field(obj, "checksum_depth_gt")};
    e.depth_pred = FileRef{ctx.string_field(d, "pred"), ctx.checksum_field(obj, "checksum_depth_pred")};
  } else if (obj.contains("checksum_depth_gt") || obj.contains("checksum_depth_pred")) {
    ctx.fail("depth checksums without \"depth_files\"");
  }

  if (obj.contains("prompt_tags")) {
    e.prompt_tags = ctx.string_list(obj.at("prompt_tags"), "prompt_tags");
    const std::set<std::string> tags(e.prompt_tags.begin(), e.prompt_tags.end());
    if (e.prompt_tags.size() != 3 || tags != std::set<std::string>{"background", "foreground", "lighting"}) {
      ctx.fail("\"prompt_tags\" must list foreground, background and lighting once each");
    }
  }
  if (e.prompt_embeddings.has_value() != !e.prompt_tags.empty()) {
    ctx.fail("\"prompt_file\" requires \"prompt_tags\" and vice versa");
  }

  if (obj.contains("match_counts")) {
    const json& m = obj.at("match_counts");
    if (!m.is_object() || m.size() != 2 || !m.contains("left") || !m.contains("right")) {
      ctx.fail("\"match_counts\" must be an object with exactly \"left\" and \"right\"");
    }
    e.match_counts = MatchCounts{ctx.count_list(m.at("left"), "match_counts.left"),
                                 ctx.count_list(m.at("right"), "match_counts.right")};
  }

  if (obj.contains("weight")) {
    const json& w = obj.at("weight");
    if (!w.is_number()) ctx.fail("\"weight\" must be a number");
    const double v = w.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) ctx.fail("\"weight\" must lie in [0, 1]");
    e.weight = v;
  }
  if (obj.contains("verdict")) e.verdict = ctx.string_list(obj.at("verdict"), "verdict");
  return e;
}

json entry_to_json(const ManifestEntry& e) {
  json obj = json::object();
  obj["id"] = e.id;
  obj["source"] = std::string(source_name(e.source));
  obj["task"] = e.task;
  obj["traj_file"] = e.trajectory.path;
  obj["checksum_traj"] = checksum_hex(e.trajectory.checksum);
  if (e.predictions) {
    obj["pred_file"] = e.predictions->path;
    obj["checksum_pred"] = checksum_hex(e.predictions->checksum);
  }
  if (e.depth_gt && e.depth_pred) {
    obj["depth_files"] = json{{"gt", e.depth_gt->path}, {"pred", e.depth_pred->path}};
    obj["checksum_depth_gt"] = checksum_hex(e.depth_gt->checksum);
    obj["checksum_depth_pred"] = checksum_hex(e.depth_pred->checksum);
  }
  if (e.frame_embeddings) {
    obj["embed_file"] = e.frame_embeddings->path;
    obj["checksum_embed"] = checksum_hex(e.frame_embeddings->checksum);
  }
  if (e.prompt_embeddings) {
    obj["prompt_file"] = e.prompt_embeddings->path;
    obj["checksum_prompt"] = checksum_hex(e.prompt_embeddings->checksum);
    obj["prompt_tags"] = e.prompt_tags;
  }
  if (e.match_counts) obj["match_counts"] = json{{"left", e.match_counts->left}, {"right", e.match_counts->right}};
  if (e.weight) obj["weight"] = *e.weight;
  if (e.verdict) obj["verdict"] = *e.verdict;
  return obj;
}

void verify_file(const DatasetManifest& m, const ManifestEntry& e, const FileRef& ref) {
  const auto path = m.resolve(ref);
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kMissingFile, ref.path, fmt::format("referenced by record \"{}\"", e.id));
  }
  const std::uint64_t actual = file_checksum(path);
  if (actual != ref.checksum) {
    throw Error(ErrorCode::kChecksumMismatch, ref.path,
                fmt::format("record \"{}\": expected {}, found {}", e.id, checksum_hex(ref.checksum),
                            checksum_hex(actual)));
  }
}

}  // namespace

std::string_view source_name(Source source) { return source == Source::kReal ? "real" : "generated"; }

std::optional<Source> parse_source(std::string_view text) {
  if (text == "real") return Source::kReal;
  if (text == "generated") return Source::kGenerated;
  return std::nullopt;
}

const ManifestEntry* DatasetManifest::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

DatasetManifest parse_manifest(std::istream& in, std::filesystem::path base_dir, std::string_view name) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  std::unordered_set<std::string> seen;
  while (std::getline(in, text)) {
    ++line;
    const LineContext ctx(name, line);
    if (text.empty()) ctx.fail("blank line");
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      ctx.fail(e.what());
    }
    if (!have_header) {
      if (!obj.is_object()) ctx.fail("header must be a JSON object");
      for (const auto& [key, _] : obj.items()) {
        if (!kHeaderKeys.contains(key)) ctx.fail(fmt::format("unknown header field \"{}\"", key));
      }
      if (ctx.string_field(obj, "format") != kFormatTag) ctx.fail("not an emma manifest");
      m.task = ctx.string_field(obj, "task");
      m.version = ctx.string_field(obj, "version");
      have_header = true;
      continue;
    }
    ManifestEntry e = parse_entry(obj, ctx, line);
    if (!seen.insert(e.id).second) {
      throw Error(ErrorCode::kDuplicateId, e.id, fmt::format("{}:{}", name, line));
    }
    m.entries.push_back(std::move(e));
  }
  if (!have_header) throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:1", name), "missing header line");

  for (const auto& e : m.entries) {
    verify_file(m, e, e.trajectory);
    for (const auto* ref : {&e.predictions, &e.depth_gt, &e.depth_pred, &e.frame_embeddings, &e.prompt_embeddings}) {
      if (*ref) verify_file(m, e, **ref);
    }
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  return parse_manifest(in, path.parent_path(), path.filename().string());
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  const json header{{"format", kFormatTag}, {"task", manifest.task}, {"version", manifest.version}};
  out << header.dump() << '\n';
  for (const auto& e : manifest.entries) out << entry_to_json(e).dump() << '\n';
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, path.string(), "cannot open for writing");
  write_manifest(os, manifest);
}

FileRef make_file_ref(const std::filesystem::path& base_dir, const std::string& relative) {
  return FileRef{relative, file_checksum(base_dir / relative)};
}

SampleRecord load_sample(const DatasetManifest& manifest, const ManifestEntry& entry, const LoadOptions& opts) {
  SampleRecord rec;
  rec.id = entry.id;
  rec.source = entry.source;
  rec.task = entry.task;
  rec.weight = entry.weight;
  rec.trajectory = read_trajectory(manifest.resolve(entry.trajectory));
  if (auto violations = validate_trajectory(rec.trajectory); !violations.empty()) {
    std::string detail;
    for (const auto& v : violations) detail += (detail.empty() ? "" : "; ") + v.message;
    throw Error(ErrorCode::kMalformedRecord, entry.id, detail);
  }
  if (opts.predictions) {
    std::optional<std::filesystem::path> pred_path;
    if (opts.prediction_dir) {
      auto p = *opts.prediction_dir / (entry.id + ".empr");
      if (std::filesystem::exists(p)) pred_path = p;
    } else if (entry.predictions) {
      pred_path = manifest.resolve(*entry.predictions);
    }
    if (pred_path) {
      rec.prediction_windows = read_predictions(*pred_path, rec.trajectory.joints());
      for (const auto& pair : rec.prediction_windows) {
        try {
          check_chunk_pair(pair, rec.trajectory);
        } catch (const Error& err) {
          throw Error(err.code(), entry.id, err.what());
        }
      }
    }
  }
  return rec;
}

}  // namespace emma
