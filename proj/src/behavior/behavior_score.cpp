#include "emma/behavior/behavior_score.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "emma/core/error.hpp"

namespace emma::behavior {

using nlohmann::json;

const DeductionRule* RuleTable::find(const std::string& event) const {
  for (const auto& r : rules) {
    if (r.event == event) return &r;
  }
  return nullptr;
}

RuleTable parse_rule_table(const std::string& json_text, const std::string& name) {
  RuleTable table;
  try {
    const auto obj = json::parse(json_text);
    table.task = obj.at("task").get<std::string>();
    table.max_score = obj.value("max_score", 5);
    for (const auto& r : obj.at("rules")) {
      DeductionRule rule;
      rule.event = r.at("event").get<std::string>();
      rule.deduction = r.at("deduction").get<int>();
      rule.group = r.at("group").get<std::string>();
      rule.description = r.value("description", std::string{});
      rule.overrides = r.value("overrides", false);
      if (rule.deduction >= 0) {
        throw Error(ErrorCode::kMalformedRecord, name, fmt::format("rule \"{}\" must deduct", rule.event));
      }
      if (table.find(rule.event)) {
        throw Error(ErrorCode::kDuplicateId, rule.event, fmt::format("repeated in {}", name));
      }
      table.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, name, e.what());
  }
  if (table.max_score <= 0) throw Error(ErrorCode::kMalformedRecord, name, "max_score must be positive");
  return table;
}

RuleTable load_rule_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rule_table(ss.str(), path.filename().string());
}

std::vector<EpisodeLog> load_episode_logs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.filename().string(), path.string());
  std::vector<EpisodeLog> logs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    try {
      const auto obj = json::parse(text);
      EpisodeLog log;
      log.task = obj.at("task").get<std::string>();
      for (const auto& e : obj.at("events")) log.events.insert(e.get<std::string>());
      log.success = obj.at("success").get<bool>();
      logs.push_back(std::move(log));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}", path.filename().string(), line), e.what());
    }
  }
  return logs;
}

int score_episode(const EpisodeLog& log, const RuleTable& table) {
  if (log.task != table.task) {
    throw Error(ErrorCode::kTaskMismatch, log.task, fmt::format("rule table is for \"{}\"", table.task));
  }
  std::map<std::string, int> worst_per_group;
  for (const auto& event : log.events) {
    const DeductionRule* rule = table.find(event);
    if (!rule) throw Error(ErrorCode::kUnknownEvent, event, fmt::format("not in the {} rule table", table.task));
    if (rule->overrides) return std::max(0, table.max_score + rule->deduction);
    auto [it, inserted] = worst_per_group.emplace(rule->group, rule->deduction);
    if (!inserted) it->second = std::min(it->second, rule->deduction);
  }
  int score = table.max_score;
  for (const auto& [group, deduction] : worst_per_group) score += deduction;
  return std::max(0, score);
}

Summary aggregate(std::span<const int> scores, const std::vector<bool>& successes) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "aggregate");
  if (scores.size() != successes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "aggregate",
                fmt::format("{} scores vs {} outcomes", scores.size(), successes.size()));
  }
  Summary s;
  s.episodes = scores.size();
  long total = 0;
  for (int v : scores) total += v;
  const auto wins = std::count(successes.begin(), successes.end(), true);
  s.mean_score = static_cast<double>(total) / static_cast<double>(s.episodes);
  s.success_rate = 100.0 * static_cast<double>(wins) / static_cast<double>(s.episodes);
  return s;
}

std::string format_mean_score(double mean) { return fmt::format("{:.1f}", mean); }

std::string format_success_rate(double percent) { return fmt::format("{:.0f}%", percent); }

}  // namespace emma::behavior
