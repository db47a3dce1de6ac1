#include "kgabduct/executor.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <set>

#include "kgabduct/error.hpp"

namespace kgabduct {

namespace {

EntitySet intersect_sets(const EntitySet& a, const EntitySet& b) {
  EntitySet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

EntitySet unite_sets(const EntitySet& a, const EntitySet& b) {
  EntitySet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

EntitySet subtract_sets(const EntitySet& a, const EntitySet& b) {
  EntitySet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

class Evaluator {
 public:
  Evaluator(const HypothesisGraph& h, const KnowledgeGraph& graph) : h_(h), graph_(graph) {}

  EntitySet eval(NodeId node) const {
    const auto& n = h_.nodes[node];
    if (n.kind == NodeKind::kAnchor) return {n.entity};
    const auto in = h_.in_edges(node);
    const auto& first = h_.edges[in.front()];
    switch (first.label) {
      case EdgeLabel::kProjection:
        return graph_.out_image(eval(first.child), first.relation);
      case EdgeLabel::kUnion: {
        EntitySet acc = eval(first.child);
        for (std::size_t i = 1; i < in.size(); ++i) {
          acc = unite_sets(acc, eval(h_.edges[in[i]].child));
        }
        return acc;
      }
      case EdgeLabel::kIntersection: {
        // Left branch first; negated branches are held back and subtracted
        // once the positive part is known.
        std::optional<EntitySet> positive;
        std::vector<NodeId> negated;
        for (std::size_t e : in) {
          const NodeId child = h_.edges[e].child;
          if (is_negation(child)) {
            negated.push_back(child);
            continue;
          }
          EntitySet s = eval(child);
          positive = positive ? intersect_sets(*positive, s) : std::move(s);
        }
        if (!positive) {
          throw Error(ErrorKind::kInvalidArgument, "intersection without a positive branch");
        }
        for (NodeId neg : negated) {
          if (positive->empty()) break;
          const NodeId inner = h_.edges[h_.in_edges(neg).front()].child;
          *positive = subtract_sets(*positive, eval(inner));
        }
        return *positive;
      }
      case EdgeLabel::kNegation:
        break;
    }
    throw Error(ErrorKind::kInvalidArgument, "negation outside an intersection");
  }

 private:
  bool is_negation(NodeId node) const {
    if (h_.nodes[node].kind == NodeKind::kAnchor) return false;
    for (const auto& e : h_.edges) {
      if (e.parent == node) return e.label == EdgeLabel::kNegation;
    }
    return false;
  }

  const HypothesisGraph& h_;
  const KnowledgeGraph& graph_;
};

// First-order reading of a hypothesis term: projections out of a non-anchor
// child introduce an existentially quantified variable scoped to that branch.
class Enumerator {
 public:
  explicit Enumerator(const KnowledgeGraph& graph)
      : num_entities_(static_cast<EntityId>(graph.num_entities())),
        edges_(graph.edges().begin(), graph.edges().end()) {}

  bool holds(const HypothesisTerm& t, EntityId y) const {
    using Op = HypothesisTerm::Op;
    switch (t.op) {
      case Op::kAnchor:
        return t.id == y;
      case Op::kProject: {
        const auto& child = t.children.front();
        if (child.op == Op::kAnchor) return edge(child.id, t.id, y);
        for (EntityId x = 0; x < num_entities_; ++x) {
          if (edge(x, t.id, y) && holds(child, x)) return true;
        }
        return false;
      }
      case Op::kIntersect:
        return std::all_of(t.children.begin(), t.children.end(),
                           [&](const HypothesisTerm& c) { return holds(c, y); });
      case Op::kUnite:
        return std::any_of(t.children.begin(), t.children.end(),
                           [&](const HypothesisTerm& c) { return holds(c, y); });
      case Op::kNegate:
        return !holds(t.children.front(), y);
    }
    return false;
  }

 private:
  bool edge(EntityId h, RelationId r, EntityId t) const {
    return edges_.count(Triple{h, r, t}) != 0;
  }

  EntityId num_entities_;
  std::set<Triple> edges_;
};

}  // namespace

void check_symbols(const HypothesisGraph& h, const KnowledgeGraph& graph) {
  for (const auto& n : h.nodes) {
    if (n.kind == NodeKind::kAnchor && n.entity >= graph.num_entities()) {
      throw Error(ErrorKind::kForeignSymbol,
                  "foreign symbol: entity " + std::to_string(n.entity));
    }
  }
  for (const auto& e : h.edges) {
    if (e.label == EdgeLabel::kProjection && e.relation >= graph.num_relations()) {
      throw Error(ErrorKind::kForeignSymbol,
                  "foreign symbol: relation " + std::to_string(e.relation));
    }
  }
}

EntitySet conclusion(const HypothesisGraph& h, const KnowledgeGraph& graph) {
  if (auto violations = validate(h); !violations.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "invalid hypothesis: " + violations.front().message);
  }
  check_symbols(h, graph);
  return Evaluator(h, graph).eval(h.root);
}

EntitySet brute_force_conclusion(const HypothesisGraph& h, const KnowledgeGraph& graph,
                                 std::size_t max_assignments) {
  if (auto violations = validate(h); !violations.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "invalid hypothesis: " + violations.front().message);
  }
  check_symbols(h, graph);
  const double tuples = std::pow(static_cast<double>(graph.num_entities()),
                                 static_cast<double>(count_variables(h)));
  if (tuples > static_cast<double>(max_assignments)) {
    throw Error(ErrorKind::kTooLarge, "too large for oracle");
  }
  const HypothesisTerm t = to_term(h);
  const Enumerator enumerator(graph);
  EntitySet out;
  for (EntityId y = 0; y < graph.num_entities(); ++y) {
    if (enumerator.holds(t, y)) out.push_back(y);
  }
  return out;
}

double jaccard(const EntitySet& a, const EntitySet& b) {
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t unioned = a.size() + b.size() - common;
  if (unioned == 0) return 0.0;
  return static_cast<double>(common) / static_cast<double>(unioned);
}

EntitySet make_entity_set(std::vector<EntityId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace kgabduct
