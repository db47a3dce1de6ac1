#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace kgabduct {

// One step of a serialized hypothesis. The kind order matches the vocabulary
// layout (operators, then relations, then entities), so comparing actions
// compares token ids.
enum class ActionKind : std::uint8_t {
  kIntersection,
  kUnion,
  kNegation,
  kRelation,
  kEntity,
};

struct Action {
  ActionKind kind = ActionKind::kEntity;
  std::uint32_t id = 0;  // relation or entity id; 0 for operators

  friend auto operator<=>(const Action&, const Action&) = default;
};

using ActionSequence = std::vector<Action>;

}  // namespace kgabduct
