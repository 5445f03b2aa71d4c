#pragma once

// Prompt templates, compiled in from assets/prompts/*.txt. Placeholders are
// written {{name}}.

#include <map>
#include <string>
#include <string_view>

namespace mcts_repair::prompts {

inline constexpr std::string_view kVersion = "v1";

extern const std::string_view repair_system;
extern const std::string_view repair_user;
extern const std::string_view partial_patch;
extern const std::string_view reflect_user;
extern const std::string_view judge_system;
extern const std::string_view judge_user;
extern const std::string_view judge_reask;

/// Replaces every {{name}} with vars[name]. Unknown placeholders are left
/// as written. Substituted text is not rescanned.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

}  // namespace mcts_repair::prompts
