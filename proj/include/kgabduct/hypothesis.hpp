#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgabduct/action.hpp"
#include "kgabduct/graph.hpp"

namespace kgabduct {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { kAnchor, kVariable, kTarget };

struct HypothesisNode {
  NodeKind kind = NodeKind::kVariable;
  EntityId entity = 0;  // meaningful for anchors only

  friend bool operator==(const HypothesisNode&, const HypothesisNode&) = default;
};

enum class EdgeLabel : std::uint8_t {
  kProjection,
  kIntersection,
  kUnion,
  kNegation,
};

// child -> parent. Every in-edge of a node carries that node's operator.
struct HypothesisEdge {
  NodeId child = 0;
  NodeId parent = 0;
  EdgeLabel label = EdgeLabel::kProjection;
  RelationId relation = 0;  // meaningful for projections only

  friend bool operator==(const HypothesisEdge&, const HypothesisEdge&) = default;
};

enum class Pattern : std::uint8_t {
  k1p, k2p, k2i, k3i, kIp, kPi, k2u, kUp, k2in, k3in, kInp, kPni, kPin,
};

inline constexpr std::array<Pattern, 13> kAllPatterns = {
    Pattern::k1p, Pattern::k2p,  Pattern::k2i,  Pattern::k3i, Pattern::kIp,
    Pattern::kPi, Pattern::k2u,  Pattern::kUp,  Pattern::k2in, Pattern::k3in,
    Pattern::kInp, Pattern::kPni, Pattern::kPin,
};

const char* to_string(Pattern pattern) noexcept;
std::optional<Pattern> parse_pattern(std::string_view name);
bool has_negation(Pattern pattern) noexcept;

// Rooted DAG over anchors and set-valued variables; `root` is the target V?.
// Edges are kept in insertion order, which is the branch order.
struct HypothesisGraph {
  std::vector<HypothesisNode> nodes;
  std::vector<HypothesisEdge> edges;
  NodeId root = 0;
  Pattern pattern = Pattern::k1p;

  // Indices into `edges` whose parent is `node`, in branch order.
  std::vector<std::size_t> in_edges(NodeId node) const;
  std::vector<NodeId> children(NodeId node) const;

  friend bool operator==(const HypothesisGraph&, const HypothesisGraph&) = default;
};

// Tree-shaped construction helper. Anchors carry an entity; every other term
// is an operator over its children.
struct HypothesisTerm {
  enum class Op : std::uint8_t { kAnchor, kProject, kIntersect, kUnite, kNegate };

  Op op = Op::kAnchor;
  std::uint32_t id = 0;  // entity for anchors, relation for projections
  std::vector<HypothesisTerm> children;

  friend bool operator==(const HypothesisTerm&, const HypothesisTerm&) = default;
};

namespace term {
HypothesisTerm anchor(EntityId entity);
HypothesisTerm project(RelationId relation, HypothesisTerm child);
HypothesisTerm intersect(HypothesisTerm a, HypothesisTerm b);
HypothesisTerm unite(HypothesisTerm a, HypothesisTerm b);
HypothesisTerm negate(HypothesisTerm child);
}  // namespace term

// Builds the graph (preorder node ids) and sets its pattern. Throws
// kInvalidArgument when the term is not one of the thirteen shapes.
HypothesisGraph make_hypothesis(const HypothesisTerm& term);

// Requires a tree rooted at `h.root`.
HypothesisTerm to_term(const HypothesisGraph& h);

// Abstract shape of each pattern with placeholder ids.
const HypothesisTerm& pattern_template(Pattern pattern);

struct Violation {
  std::string kind;  // cycle, dangling, arity, ...
  std::string message;
};

// Never throws; an empty result means the hypothesis is well formed and its
// stored pattern is the one its structure matches.
std::vector<Violation> validate(const HypothesisGraph& h);

// Structure-only match against the thirteen grammars. Throws kInvalidArgument
// when nothing matches.
Pattern pattern_of(const HypothesisGraph& h);
std::optional<Pattern> match_pattern(const HypothesisGraph& h);

// Reorders merge branches by their serialized actions (negated branches
// last) and renumbers nodes in depth-first order.
HypothesisGraph canonicalize(const HypothesisGraph& h);

// {"pattern","nodes":[{id,kind,entity?}],"edges":[{child,parent,label,relation?}]}
// of the canonical form, compact.
std::string to_canonical_json(const HypothesisGraph& h);
HypothesisGraph parse_hypothesis_json(std::string_view text);

// Number of logical variables: V? plus one per projection whose child is not
// an anchor.
std::size_t count_variables(const HypothesisGraph& h);

}  // namespace kgabduct
