#include "emma/core/ndjson.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace emma {

std::string format_real(double value) { return fmt::format("{:.9g}", value == 0.0 ? 0.0 : value); }

std::string format_exact(double value) {
  // fmt's default float formatting is the shortest round-trip representation.
  return fmt::format("{}", value == 0.0 ? 0.0 : value);
}

std::string quote_json(std::string_view text) { return nlohmann::json(std::string(text)).dump(); }

void JsonLine::key(std::string_view k) {
  if (body_.size() > 1) body_ += ',';
  body_ += quote_json(k);
  body_ += ':';
}

JsonLine& JsonLine::field(std::string_view k, std::string_view text) {
  key(k);
  body_ += quote_json(text);
  return *this;
}

JsonLine& JsonLine::field(std::string_view k, std::int64_t value) {
  key(k);
  body_ += std::to_string(value);
  return *this;
}

JsonLine& JsonLine::field(std::string_view k, std::uint64_t value) {
  key(k);
  body_ += std::to_string(value);
  return *this;
}

JsonLine& JsonLine::real(std::string_view k, double value) {
  key(k);
  body_ += format_real(value);
  return *this;
}

JsonLine& JsonLine::real(std::string_view k, std::optional<double> value) {
  if (!value) return raw(k, "null");
  return real(k, *value);
}

JsonLine& JsonLine::exact(std::string_view k, double value) {
  key(k);
  body_ += format_exact(value);
  return *this;
}

JsonLine& JsonLine::raw(std::string_view k, std::string_view json_text) {
  key(k);
  body_ += json_text;
  return *this;
}

}  // namespace emma
