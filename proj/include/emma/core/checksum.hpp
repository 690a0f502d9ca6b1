#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace emma {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a. Pass a previous result as `seed` to hash incrementally.
std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed = kFnvOffsetBasis);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = kFnvOffsetBasis);

// Hashes the file contents; throws MissingFile if it cannot be opened.
std::uint64_t file_checksum(const std::filesystem::path& path);

// 16 lowercase hex digits.
std::string checksum_hex(std::uint64_t value);
// Inverse of checksum_hex; returns false on anything but 16 hex digits.
bool parse_checksum_hex(std::string_view text, std::uint64_t& out);

}  // namespace emma
