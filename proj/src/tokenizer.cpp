#include "kgabduct/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "kgabduct/error.hpp"

namespace kgabduct {

namespace {

constexpr const char* kSpecialNames[kNumSpecialTokens] = {
    "[PAD]", "[BOS]", "[EOS]", "[SEP]", "[I]", "[U]", "[N]"};

EdgeLabel label_of(const Action& a) {
  switch (a.kind) {
    case ActionKind::kIntersection: return EdgeLabel::kIntersection;
    case ActionKind::kUnion: return EdgeLabel::kUnion;
    case ActionKind::kNegation: return EdgeLabel::kNegation;
    default: return EdgeLabel::kProjection;
  }
}

int degree(const Action& a) {
  return a.kind == ActionKind::kIntersection || a.kind == ActionKind::kUnion ? 2 : 1;
}

void emit(const HypothesisGraph& h, NodeId node, ActionSequence& out) {
  const auto& n = h.nodes[node];
  const auto in = h.in_edges(node);
  if (n.kind == NodeKind::kAnchor) {
    out.push_back({ActionKind::kEntity, n.entity});
  } else {
    const auto& first = h.edges[in.front()];
    switch (first.label) {
      case EdgeLabel::kProjection: out.push_back({ActionKind::kRelation, first.relation}); break;
      case EdgeLabel::kIntersection: out.push_back({ActionKind::kIntersection, 0}); break;
      case EdgeLabel::kUnion: out.push_back({ActionKind::kUnion, 0}); break;
      case EdgeLabel::kNegation: out.push_back({ActionKind::kNegation, 0}); break;
    }
  }
  for (std::size_t e : in) emit(h, h.edges[e].child, out);
}

ParseOutcome fail(ParseErrorKind kind, std::size_t position, std::string message) {
  ParseOutcome out;
  out.error = ParseError{kind, position, std::move(message)};
  return out;
}

}  // namespace

Vocabulary::Vocabulary(const GraphLabels& labels)
    : num_relations_(labels.num_relations()), num_entities_(labels.num_entities()) {
  std::unordered_set<std::string> plain;
  for (const char* s : kSpecialNames) plain.insert(s);
  for (const auto& r : labels.relations()) typed_ |= !plain.insert("[" + r + "]").second;
  for (const auto& e : labels.entities()) typed_ |= !plain.insert("[" + e + "]").second;

  tokens_.reserve(kNumSpecialTokens + num_relations_ + num_entities_);
  for (const char* s : kSpecialNames) tokens_.emplace_back(s);
  for (const auto& r : labels.relations()) {
    tokens_.push_back(typed_ ? "[r:" + r + "]" : "[" + r + "]");
  }
  for (const auto& e : labels.entities()) {
    tokens_.push_back(typed_ ? "[e:" + e + "]" : "[" + e + "]");
  }
  for (TokenId i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw Error(ErrorKind::kInvalidArgument, "ambiguous vocabulary token " + tokens_[i]);
    }
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id_of(const Action& action) const {
  switch (action.kind) {
    case ActionKind::kIntersection: return static_cast<TokenId>(SpecialToken::kIntersection);
    case ActionKind::kUnion: return static_cast<TokenId>(SpecialToken::kUnion);
    case ActionKind::kNegation: return static_cast<TokenId>(SpecialToken::kNegation);
    case ActionKind::kRelation:
      if (action.id >= num_relations_) break;
      return relation_token(action.id);
    case ActionKind::kEntity:
      if (action.id >= num_entities_) break;
      return entity_token(action.id);
  }
  throw Error(ErrorKind::kInvalidArgument, "action outside the vocabulary");
}

std::optional<Action> Vocabulary::action_of(TokenId id) const {
  switch (id) {
    case static_cast<TokenId>(SpecialToken::kIntersection): return Action{ActionKind::kIntersection, 0};
    case static_cast<TokenId>(SpecialToken::kUnion): return Action{ActionKind::kUnion, 0};
    case static_cast<TokenId>(SpecialToken::kNegation): return Action{ActionKind::kNegation, 0};
    default: break;
  }
  if (id < kNumSpecialTokens || id >= tokens_.size()) return std::nullopt;
  const TokenId offset = id - kNumSpecialTokens;
  if (offset < num_relations_) return Action{ActionKind::kRelation, offset};
  return Action{ActionKind::kEntity, offset - static_cast<TokenId>(num_relations_)};
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::write(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + file.string());
  out << to_text();
}

ActionSequence hypothesis_to_actions(const HypothesisGraph& h) {
  const HypothesisGraph canonical = canonicalize(h);
  ActionSequence out;
  emit(canonical, canonical.root, out);
  return out;
}

const char* to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::kEmpty: return "empty";
    case ParseErrorKind::kUnknownToken: return "unknown_token";
    case ParseErrorKind::kTrailing: return "trailing";
    case ParseErrorKind::kIncomplete: return "incomplete";
    case ParseErrorKind::kInvalid: return "invalid";
  }
  return "invalid";
}

ParseOutcome actions_to_hypothesis(std::span<const Action> actions) {
  if (actions.empty()) return fail(ParseErrorKind::kEmpty, 0, "empty action sequence");

  struct Frame {
    NodeId node;
    Action op;
    int remaining;
  };
  std::vector<Frame> stack;
  HypothesisGraph h;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    if (i > 0 && stack.empty()) {
      return fail(ParseErrorKind::kTrailing, i, "tokens after the hypothesis is complete");
    }
    const bool anchor = a.kind == ActionKind::kEntity;
    const auto node = static_cast<NodeId>(h.nodes.size());
    h.nodes.push_back({anchor ? NodeKind::kAnchor : (i == 0 ? NodeKind::kTarget : NodeKind::kVariable),
                       anchor ? a.id : 0});
    if (!stack.empty()) {
      const Frame& top = stack.back();
      h.edges.push_back({node, top.node, label_of(top.op),
                         top.op.kind == ActionKind::kRelation ? top.op.id : 0});
    }
    if (anchor) {
      while (!stack.empty()) {
        Frame top = stack.back();
        stack.pop_back();
        if (--top.remaining > 0) {
          stack.push_back(top);
          break;
        }
      }
    } else {
      stack.push_back({node, a, degree(a)});
    }
  }
  if (!stack.empty()) {
    return fail(ParseErrorKind::kIncomplete, actions.size(), "action sequence ends mid-hypothesis");
  }
  h.root = 0;
  if (auto pattern = match_pattern(h)) h.pattern = *pattern;
  if (auto violations = validate(h); !violations.empty()) {
    return fail(ParseErrorKind::kInvalid, actions.size(),
                violations.front().kind + ": " + violations.front().message);
  }
  ParseOutcome out;
  out.hypothesis = std::move(h);
  return out;
}

ParseOutcome token_ids_to_hypothesis(std::span<const TokenId> ids, const Vocabulary& vocab) {
  ActionSequence actions;
  actions.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto a = vocab.action_of(ids[i]);
    if (!a) {
      return fail(ParseErrorKind::kUnknownToken, i,
                  "token id " + std::to_string(ids[i]) + " is not an action");
    }
    actions.push_back(*a);
  }
  return actions_to_hypothesis(actions);
}

ParseOutcome tokens_to_hypothesis(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto id = vocab.find(tokens[i]);
    if (!id || !vocab.action_of(*id)) {
      return fail(ParseErrorKind::kUnknownToken, i, "unknown action token " + tokens[i]);
    }
    ids.push_back(*id);
  }
  return token_ids_to_hypothesis(ids, vocab);
}

std::vector<std::string> to_tokens(std::span<const Action> actions, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(vocab.token(vocab.id_of(a)));
  return out;
}

std::vector<TokenId> encode_observation(std::span<const EntityId> observation,
                                        const Vocabulary& vocab) {
  std::vector<EntityId> sorted(observation.begin(), observation.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<TokenId> out;
  out.reserve(sorted.size());
  for (EntityId e : sorted) {
    if (e >= vocab.num_entities()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "entity " + std::to_string(e) + " is not in the vocabulary");
    }
    out.push_back(vocab.entity_token(e));
  }
  return out;
}

std::vector<TokenId> frame_example(std::span<const EntityId> observation,
                                   std::span<const Action> actions, const Vocabulary& vocab) {
  std::vector<TokenId> out = encode_observation(observation, vocab);
  out.push_back(static_cast<TokenId>(SpecialToken::kSep));
  for (const auto& a : actions) out.push_back(vocab.id_of(a));
  out.push_back(static_cast<TokenId>(SpecialToken::kEos));
  return out;
}

}  // namespace kgabduct
