#pragma once

// Rule table file (JSON):
//
//   {"task": "fold_cloth", "max_score": 5,
//    "rules": [{"event": "one_corner_missed", "deduction": -2, "group": "grasp",
//               "description": "One corner not grasped"}, ...]}
//
// A rule with "overrides": true (no meaningful progress) replaces every other
// deduction when its event is present.

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace emma::behavior {

struct DeductionRule {
  std::string event;
  int deduction = 0;  // negative
  std::string group;  // at most one rule per group applies
  std::string description;
  bool overrides = false;
};

struct RuleTable {
  std::string task;
  int max_score = 5;
  std::vector<DeductionRule> rules;

  const DeductionRule* find(const std::string& event) const;
};

RuleTable parse_rule_table(const std::string& json_text, const std::string& name);
RuleTable load_rule_table(const std::filesystem::path& path);

struct EpisodeLog {
  std::string task;
  std::set<std::string> events;
  bool success = false;
};

// Episode log file: one {"task", "events": [..], "success"} object per line.
std::vector<EpisodeLog> load_episode_logs(const std::filesystem::path& path);

// max_score plus the most severe matching deduction of each group, clamped
// at 0. An overriding rule, when triggered, is the only deduction applied.
int score_episode(const EpisodeLog& log, const RuleTable& table);

struct Summary {
  double mean_score = 0.0;
  double success_rate = 0.0;  // percent
  std::size_t episodes = 0;
};

Summary aggregate(std::span<const int> scores, const std::vector<bool>& successes);

// "4.4" / "65%" style cells as they appear in results tables.
std::string format_mean_score(double mean);
std::string format_success_rate(double percent);

}  // namespace emma::behavior
