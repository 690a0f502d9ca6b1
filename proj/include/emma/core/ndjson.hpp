#pragma once

// Helpers for writing newline-delimited JSON with a fixed field order and
// fixed float formatting, so output diffs are reproducible.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace emma {

// 9 significant digits, printf "%.9g" style.
std::string format_real(double value);
// Shortest text that parses back to the same double.
std::string format_exact(double value);

class JsonLine {
 public:
  JsonLine& field(std::string_view key, std::string_view text);
  JsonLine& field(std::string_view key, const char* text) { return field(key, std::string_view(text)); }
  JsonLine& field(std::string_view key, std::int64_t value);
  JsonLine& field(std::string_view key, std::uint64_t value);
  JsonLine& field(std::string_view key, int value) { return field(key, static_cast<std::int64_t>(value)); }
  JsonLine& real(std::string_view key, double value);
  JsonLine& real(std::string_view key, std::optional<double> value);
  JsonLine& exact(std::string_view key, double value);
  JsonLine& raw(std::string_view key, std::string_view json_text);

  std::string str() const { return body_ + "}"; }

 private:
  void key(std::string_view k);
  std::string body_ = "{";
};

std::string quote_json(std::string_view text);

}  // namespace emma
