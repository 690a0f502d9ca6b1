#include "emma/core/checksum.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "emma/core/error.hpp"

namespace emma {

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed) {
  return fnv1a64(std::as_bytes(std::span(text.data(), text.size())), seed);
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  std::array<char, 1 << 16> buf{};
  std::uint64_t h = kFnvOffsetBasis;
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    h = fnv1a64(std::as_bytes(std::span(buf.data(), got)), h);
  }
  return h;
}

std::string checksum_hex(std::uint64_t value) { return fmt::format("{:016x}", value); }

bool parse_checksum_hex(std::string_view text, std::uint64_t& out) {
  if (text.size() != 16) return false;
  for (char c : text) {
    const bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!hex) return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, 16);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace emma
