#pragma once

#include <array>
#include <string>
#include <string_view>

#include "lexiscreen/error.hpp"

namespace lexiscreen {

/// Audio-level word-decoding categories, in reporting (and tie-break) order.
enum class SkillClass : int { C_A = 0, M_A = 1, I_A = 2 };

inline constexpr std::array<SkillClass, 3> kSkillClasses = {SkillClass::C_A, SkillClass::M_A,
                                                            SkillClass::I_A};

inline constexpr int index_of(SkillClass c) { return static_cast<int>(c); }

inline std::string_view to_string(SkillClass c) {
  switch (c) {
    case SkillClass::C_A: return "C_A";
    case SkillClass::M_A: return "M_A";
    case SkillClass::I_A: return "I_A";
  }
  return "?";
}

inline SkillClass parse_skill_class(std::string_view s) {
  for (auto c : kSkillClasses) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::UnknownLabel, "unknown skill class '" + std::string(s) + "'");
}

}  // namespace lexiscreen
