#include "kgabduct/hypothesis.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "kgabduct/error.hpp"

namespace kgabduct {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kPatternNames[] = {"1p",  "2p",  "2i",  "3i", "ip",
                                         "pi",  "2u",  "up",  "2in", "3in",
                                         "inp", "pni", "pin"};

EdgeLabel label_for(HypothesisTerm::Op op) {
  switch (op) {
    case HypothesisTerm::Op::kProject: return EdgeLabel::kProjection;
    case HypothesisTerm::Op::kIntersect: return EdgeLabel::kIntersection;
    case HypothesisTerm::Op::kUnite: return EdgeLabel::kUnion;
    case HypothesisTerm::Op::kNegate: return EdgeLabel::kNegation;
    case HypothesisTerm::Op::kAnchor: break;
  }
  return EdgeLabel::kProjection;
}

HypothesisTerm::Op op_for(EdgeLabel label) {
  switch (label) {
    case EdgeLabel::kProjection: return HypothesisTerm::Op::kProject;
    case EdgeLabel::kIntersection: return HypothesisTerm::Op::kIntersect;
    case EdgeLabel::kUnion: return HypothesisTerm::Op::kUnite;
    case EdgeLabel::kNegation: return HypothesisTerm::Op::kNegate;
  }
  return HypothesisTerm::Op::kProject;
}

std::size_t expected_arity(EdgeLabel label) {
  return label == EdgeLabel::kIntersection || label == EdgeLabel::kUnion ? 2 : 1;
}

const char* label_name(EdgeLabel label) {
  switch (label) {
    case EdgeLabel::kProjection: return "projection";
    case EdgeLabel::kIntersection: return "intersection";
    case EdgeLabel::kUnion: return "union";
    case EdgeLabel::kNegation: return "negation";
  }
  return "?";
}

const char* kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kAnchor: return "anchor";
    case NodeKind::kVariable: return "variable";
    case NodeKind::kTarget: return "target";
  }
  return "?";
}

void flatten(const HypothesisTerm& t, HypothesisTerm::Op op,
             std::vector<const HypothesisTerm*>& out) {
  for (const auto& c : t.children) {
    if (c.op == op) {
      flatten(c, op, out);
    } else {
      out.push_back(&c);
    }
  }
}

// Shape string with nested merges of the same kind flattened and their
// members sorted, so equivalent nestings share one signature.
std::string signature(const HypothesisTerm& t) {
  using Op = HypothesisTerm::Op;
  switch (t.op) {
    case Op::kAnchor: return "e";
    case Op::kProject: return "p(" + signature(t.children.at(0)) + ")";
    case Op::kNegate: return "n(" + signature(t.children.at(0)) + ")";
    case Op::kIntersect:
    case Op::kUnite: {
      std::vector<const HypothesisTerm*> members;
      flatten(t, t.op, members);
      std::vector<std::string> sigs;
      for (const auto* m : members) sigs.push_back(signature(*m));
      std::sort(sigs.begin(), sigs.end());
      std::string out = t.op == Op::kIntersect ? "i[" : "u[";
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        if (i) out += ',';
        out += sigs[i];
      }
      return out + "]";
    }
  }
  return "?";
}

const std::map<std::string, Pattern>& signature_table() {
  static const std::map<std::string, Pattern> table = [] {
    std::map<std::string, Pattern> t;
    for (Pattern p : kAllPatterns) t.emplace(signature(pattern_template(p)), p);
    return t;
  }();
  return table;
}

// Checks everything except the pattern grammar.
std::vector<Violation> structural_violations(const HypothesisGraph& h) {
  std::vector<Violation> out;
  auto add = [&](const char* kind, std::string message) {
    out.push_back({kind, std::move(message)});
  };
  const std::size_t n = h.nodes.size();
  if (n == 0) {
    add("empty", "hypothesis has no nodes");
    return out;
  }
  if (h.root >= n) {
    add("bad-id", "root is not a node");
    return out;
  }
  bool ids_ok = true;
  for (const auto& e : h.edges) {
    if (e.child >= n || e.parent >= n) {
      add("bad-id", "edge references a missing node");
      ids_ok = false;
    } else if (e.child == e.parent) {
      add("cycle", "self-loop on node " + std::to_string(e.child));
      ids_ok = false;
    }
  }
  if (!ids_ok) return out;

  std::size_t targets = 0;
  for (const auto& node : h.nodes) targets += node.kind == NodeKind::kTarget;
  if (h.nodes[h.root].kind != NodeKind::kTarget) {
    add("target", "root is not the target node");
  }
  if (targets != 1) {
    add("target", "expected exactly one target node, found " + std::to_string(targets));
  }

  std::vector<std::vector<std::size_t>> incoming(n);
  std::vector<std::vector<std::size_t>> outgoing(n);
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    incoming[h.edges[i].parent].push_back(i);
    outgoing[h.edges[i].child].push_back(i);
  }

  // Cycle check by iterative colouring over child -> parent edges.
  {
    std::vector<std::uint8_t> colour(n, 0);
    bool cyclic = false;
    for (NodeId start = 0; start < n && !cyclic; ++start) {
      if (colour[start]) continue;
      std::vector<std::pair<NodeId, std::size_t>> stack{{start, 0}};
      colour[start] = 1;
      while (!stack.empty() && !cyclic) {
        auto& [node, next] = stack.back();
        if (next < outgoing[node].size()) {
          const NodeId parent = h.edges[outgoing[node][next++]].parent;
          if (colour[parent] == 1) {
            cyclic = true;
          } else if (colour[parent] == 0) {
            colour[parent] = 1;
            stack.push_back({parent, 0});
          }
        } else {
          colour[node] = 2;
          stack.pop_back();
        }
      }
    }
    if (cyclic) {
      add("cycle", "hypothesis graph contains a cycle");
      return out;
    }
  }

  // Reachability from the root along in-edges.
  {
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack{h.root};
    seen[h.root] = true;
    while (!stack.empty()) {
      const NodeId node = stack.back();
      stack.pop_back();
      for (std::size_t e : incoming[node]) {
        const NodeId child = h.edges[e].child;
        if (!seen[child]) {
          seen[child] = true;
          stack.push_back(child);
        }
      }
    }
    for (NodeId i = 0; i < n; ++i) {
      if (!seen[i]) add("dangling", "node " + std::to_string(i) + " is not connected to the root");
    }
  }

  for (NodeId i = 0; i < n; ++i) {
    const auto& node = h.nodes[i];
    const auto& in = incoming[i];
    if (i == h.root) {
      if (!outgoing[i].empty()) add("fan-out", "the target has an out-edge");
    } else if (outgoing[i].size() > 1) {
      add("fan-out", "node " + std::to_string(i) + " feeds more than one parent");
    }
    if (node.kind == NodeKind::kAnchor) {
      if (!in.empty()) add("anchor-in-edge", "anchor " + std::to_string(i) + " has in-edges");
      continue;
    }
    if (in.empty()) {
      add("leaf-not-anchor", "variable " + std::to_string(i) + " has no in-edges");
      continue;
    }
    const EdgeLabel label = h.edges[in.front()].label;
    bool uniform = true;
    for (std::size_t e : in) uniform &= h.edges[e].label == label;
    if (!uniform) {
      add("label-mismatch", "in-edges of node " + std::to_string(i) + " disagree on the operator");
      continue;
    }
    if (in.size() != expected_arity(label)) {
      add("arity", std::string(label_name(label)) + " node " + std::to_string(i) + " has " +
                       std::to_string(in.size()) + " children, expected " +
                       std::to_string(expected_arity(label)));
    }
    if (label == EdgeLabel::kNegation) {
      if (i == h.root || outgoing[i].empty() ||
          h.edges[outgoing[i].front()].label != EdgeLabel::kIntersection) {
        add("negation-placement", "negation must be a branch of an intersection");
      }
    }
  }
  return out;
}

void build_nodes(const HypothesisTerm& t, HypothesisGraph& h, NodeId self) {
  for (const auto& child : t.children) {
    const auto id = static_cast<NodeId>(h.nodes.size());
    h.nodes.push_back({child.op == HypothesisTerm::Op::kAnchor ? NodeKind::kAnchor
                                                               : NodeKind::kVariable,
                       child.op == HypothesisTerm::Op::kAnchor ? child.id : 0});
    h.edges.push_back({id, self, label_for(t.op),
                       t.op == HypothesisTerm::Op::kProject ? t.id : 0});
    build_nodes(child, h, id);
  }
}

HypothesisGraph build_graph(const HypothesisTerm& t) {
  HypothesisGraph h;
  h.nodes.push_back({t.op == HypothesisTerm::Op::kAnchor ? NodeKind::kAnchor : NodeKind::kTarget,
                     t.op == HypothesisTerm::Op::kAnchor ? t.id : 0});
  h.root = 0;
  build_nodes(t, h, 0);
  return h;
}

HypothesisTerm term_at(const HypothesisGraph& h, NodeId node, std::size_t depth) {
  if (depth > h.nodes.size()) {
    throw Error(ErrorKind::kInvalidArgument, "hypothesis graph is not a tree");
  }
  HypothesisTerm t;
  if (h.nodes.at(node).kind == NodeKind::kAnchor) {
    t.op = HypothesisTerm::Op::kAnchor;
    t.id = h.nodes[node].entity;
    return t;
  }
  const auto in = h.in_edges(node);
  if (in.empty()) throw Error(ErrorKind::kInvalidArgument, "variable without children");
  const auto& first = h.edges[in.front()];
  t.op = op_for(first.label);
  t.id = first.label == EdgeLabel::kProjection ? first.relation : 0;
  for (std::size_t e : in) t.children.push_back(term_at(h, h.edges[e].child, depth + 1));
  return t;
}

void serialize(const HypothesisTerm& t, ActionSequence& out) {
  using Op = HypothesisTerm::Op;
  switch (t.op) {
    case Op::kAnchor: out.push_back({ActionKind::kEntity, t.id}); return;
    case Op::kProject: out.push_back({ActionKind::kRelation, t.id}); break;
    case Op::kIntersect: out.push_back({ActionKind::kIntersection, 0}); break;
    case Op::kUnite: out.push_back({ActionKind::kUnion, 0}); break;
    case Op::kNegate: out.push_back({ActionKind::kNegation, 0}); break;
  }
  for (const auto& c : t.children) serialize(c, out);
}

HypothesisTerm canonical_term(const HypothesisTerm& t) {
  HypothesisTerm out = t;
  for (auto& c : out.children) c = canonical_term(c);
  if (out.op == HypothesisTerm::Op::kIntersect || out.op == HypothesisTerm::Op::kUnite) {
    using Key = std::pair<bool, ActionSequence>;
    std::vector<std::pair<Key, HypothesisTerm>> keyed;
    for (auto& c : out.children) {
      ActionSequence actions;
      serialize(c, actions);
      keyed.push_back({{c.op == HypothesisTerm::Op::kNegate, std::move(actions)}, std::move(c)});
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    out.children.clear();
    for (auto& [key, c] : keyed) out.children.push_back(std::move(c));
  }
  return out;
}

}  // namespace

const char* to_string(Pattern pattern) noexcept {
  return kPatternNames[static_cast<std::size_t>(pattern)];
}

std::optional<Pattern> parse_pattern(std::string_view name) {
  for (Pattern p : kAllPatterns) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

bool has_negation(Pattern pattern) noexcept {
  switch (pattern) {
    case Pattern::k2in:
    case Pattern::k3in:
    case Pattern::kInp:
    case Pattern::kPni:
    case Pattern::kPin:
      return true;
    default:
      return false;
  }
}

std::vector<std::size_t> HypothesisGraph::in_edges(NodeId node) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].parent == node) out.push_back(i);
  }
  return out;
}

std::vector<NodeId> HypothesisGraph::children(NodeId node) const {
  std::vector<NodeId> out;
  for (const auto& e : edges) {
    if (e.parent == node) out.push_back(e.child);
  }
  return out;
}

namespace term {

HypothesisTerm anchor(EntityId entity) {
  return {HypothesisTerm::Op::kAnchor, entity, {}};
}
HypothesisTerm project(RelationId relation, HypothesisTerm child) {
  return {HypothesisTerm::Op::kProject, relation, {std::move(child)}};
}
HypothesisTerm intersect(HypothesisTerm a, HypothesisTerm b) {
  return {HypothesisTerm::Op::kIntersect, 0, {std::move(a), std::move(b)}};
}
HypothesisTerm unite(HypothesisTerm a, HypothesisTerm b) {
  return {HypothesisTerm::Op::kUnite, 0, {std::move(a), std::move(b)}};
}
HypothesisTerm negate(HypothesisTerm child) {
  return {HypothesisTerm::Op::kNegate, 0, {std::move(child)}};
}

}  // namespace term

const HypothesisTerm& pattern_template(Pattern pattern) {
  using namespace term;
  static const std::array<HypothesisTerm, 13> templates = [] {
    auto pe = [] { return project(0, anchor(0)); };
    auto ppe = [&] { return project(0, pe()); };
    return std::array<HypothesisTerm, 13>{
        pe(),                                                    // 1p
        ppe(),                                                   // 2p
        intersect(pe(), pe()),                                   // 2i
        intersect(intersect(pe(), pe()), pe()),                  // 3i
        project(0, intersect(pe(), pe())),                       // ip
        intersect(ppe(), pe()),                                  // pi
        unite(pe(), pe()),                                       // 2u
        project(0, unite(pe(), pe())),                           // up
        intersect(pe(), negate(pe())),                           // 2in
        intersect(intersect(pe(), pe()), negate(pe())),          // 3in
        project(0, intersect(pe(), negate(pe()))),               // inp
        intersect(pe(), negate(ppe())),                          // pni
        intersect(ppe(), negate(pe())),                          // pin
    };
  }();
  return templates[static_cast<std::size_t>(pattern)];
}

HypothesisGraph make_hypothesis(const HypothesisTerm& t) {
  HypothesisGraph h = build_graph(t);
  const auto pattern = match_pattern(h);
  if (!pattern) {
    throw Error(ErrorKind::kInvalidArgument,
                "term does not match any hypothesis pattern: " + signature(t));
  }
  h.pattern = *pattern;
  return h;
}

HypothesisTerm to_term(const HypothesisGraph& h) { return term_at(h, h.root, 0); }

std::optional<Pattern> match_pattern(const HypothesisGraph& h) {
  if (!structural_violations(h).empty()) return std::nullopt;
  const auto& table = signature_table();
  auto it = table.find(signature(to_term(h)));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

Pattern pattern_of(const HypothesisGraph& h) {
  auto p = match_pattern(h);
  if (!p) throw Error(ErrorKind::kInvalidArgument, "hypothesis matches no pattern");
  return *p;
}

std::vector<Violation> validate(const HypothesisGraph& h) {
  auto out = structural_violations(h);
  if (!out.empty()) return out;
  const std::string sig = signature(to_term(h));
  const auto& table = signature_table();
  auto it = table.find(sig);
  if (it == table.end()) {
    out.push_back({"unknown-pattern", "shape " + sig + " is not one of the 13 patterns"});
  } else if (it->second != h.pattern) {
    out.push_back({"pattern-mismatch", std::string("declared ") + to_string(h.pattern) +
                                           " but structure is " + to_string(it->second)});
  }
  return out;
}

HypothesisGraph canonicalize(const HypothesisGraph& h) {
  HypothesisGraph out = build_graph(canonical_term(to_term(h)));
  out.pattern = h.pattern;
  return out;
}

std::string to_canonical_json(const HypothesisGraph& h) {
  const HypothesisGraph c = canonicalize(h);
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    ordered_json node = {{"id", i}, {"kind", kind_name(c.nodes[i].kind)}};
    if (c.nodes[i].kind == NodeKind::kAnchor) node["entity"] = c.nodes[i].entity;
    nodes.push_back(std::move(node));
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : c.edges) {
    ordered_json edge = {{"child", e.child}, {"parent", e.parent}, {"label", label_name(e.label)}};
    if (e.label == EdgeLabel::kProjection) edge["relation"] = e.relation;
    edges.push_back(std::move(edge));
  }
  ordered_json doc;
  doc["pattern"] = to_string(c.pattern);
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump();
}

HypothesisGraph parse_hypothesis_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    HypothesisGraph h;
    auto pattern = parse_pattern(doc.at("pattern").get<std::string>());
    if (!pattern) throw Error(ErrorKind::kParse, "unknown pattern name");
    h.pattern = *pattern;
    const auto& nodes = doc.at("nodes");
    h.nodes.resize(nodes.size());
    std::optional<NodeId> root;
    for (const auto& node : nodes) {
      const auto id = node.at("id").get<std::size_t>();
      if (id >= h.nodes.size()) throw Error(ErrorKind::kParse, "node id out of range");
      const auto kind = node.at("kind").get<std::string>();
      if (kind == "anchor") {
        h.nodes[id] = {NodeKind::kAnchor, node.at("entity").get<EntityId>()};
      } else if (kind == "variable") {
        h.nodes[id] = {NodeKind::kVariable, 0};
      } else if (kind == "target") {
        h.nodes[id] = {NodeKind::kTarget, 0};
        root = static_cast<NodeId>(id);
      } else {
        throw Error(ErrorKind::kParse, "unknown node kind " + kind);
      }
    }
    if (!root) throw Error(ErrorKind::kParse, "no target node");
    h.root = *root;
    for (const auto& edge : doc.at("edges")) {
      HypothesisEdge e;
      e.child = edge.at("child").get<NodeId>();
      e.parent = edge.at("parent").get<NodeId>();
      const auto label = edge.at("label").get<std::string>();
      if (label == "projection") {
        e.label = EdgeLabel::kProjection;
        e.relation = edge.at("relation").get<RelationId>();
      } else if (label == "intersection") {
        e.label = EdgeLabel::kIntersection;
      } else if (label == "union") {
        e.label = EdgeLabel::kUnion;
      } else if (label == "negation") {
        e.label = EdgeLabel::kNegation;
      } else {
        throw Error(ErrorKind::kParse, "unknown edge label " + label);
      }
      h.edges.push_back(e);
    }
    return h;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("hypothesis json: ") + e.what());
  }
}

std::size_t count_variables(const HypothesisGraph& h) {
  std::size_t count = 1;
  for (const auto& e : h.edges) {
    if (e.label == EdgeLabel::kProjection && h.nodes.at(e.child).kind != NodeKind::kAnchor) {
      ++count;
    }
  }
  return count;
}

}  // namespace kgabduct
