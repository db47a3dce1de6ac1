#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgabduct/action.hpp"
#include "kgabduct/graph.hpp"
#include "kgabduct/hypothesis.hpp"

namespace kgabduct {

using TokenId = std::uint32_t;

enum class SpecialToken : TokenId {
  kPad = 0,
  kBos = 1,
  kEos = 2,
  kSep = 3,
  kIntersection = 4,
  kUnion = 5,
  kNegation = 6,
};

inline constexpr TokenId kNumSpecialTokens = 7;

// Token table: the seven specials, then one token per relation (ascending
// id), then one per entity (ascending id). Tokens read "[label]"; when any
// label would be ambiguous the whole table switches to "[r:label]" and
// "[e:label]".
class Vocabulary {
 public:
  explicit Vocabulary(const GraphLabels& labels);

  std::size_t size() const { return tokens_.size(); }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t num_entities() const { return num_entities_; }
  bool typed() const { return typed_; }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;

  TokenId id_of(const Action& action) const;
  // nullopt for [PAD], [BOS], [EOS], [SEP].
  std::optional<Action> action_of(TokenId id) const;

  TokenId relation_token(RelationId r) const { return kNumSpecialTokens + r; }
  TokenId entity_token(EntityId e) const {
    return kNumSpecialTokens + static_cast<TokenId>(num_relations_) + e;
  }

  // One token per line, line number = id.
  std::string to_text() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t num_relations_ = 0;
  std::size_t num_entities_ = 0;
  bool typed_ = false;
};

// Depth-first serialization from the target over the canonical branch order.
ActionSequence hypothesis_to_actions(const HypothesisGraph& h);

enum class ParseErrorKind {
  kEmpty,         // no tokens
  kUnknownToken,  // not an action token of the vocabulary
  kTrailing,      // tokens after the stack emptied
  kIncomplete,    // stack not empty at the end
  kInvalid,       // well-nested but not a valid hypothesis
};

const char* to_string(ParseErrorKind kind) noexcept;

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::kInvalid;
  std::size_t position = 0;
  std::string message;
};

struct ParseOutcome {
  std::optional<HypothesisGraph> hypothesis;
  std::optional<ParseError> error;

  bool ok() const { return hypothesis.has_value(); }
};

// Stack detokenizer: [I] and [U] take two branches, [N] and relations one,
// entities close branches. Total over arbitrary input.
ParseOutcome actions_to_hypothesis(std::span<const Action> actions);
ParseOutcome tokens_to_hypothesis(std::span<const std::string> tokens,
                                  const Vocabulary& vocab);
ParseOutcome token_ids_to_hypothesis(std::span<const TokenId> ids,
                                     const Vocabulary& vocab);

std::vector<std::string> to_tokens(std::span<const Action> actions,
                                   const Vocabulary& vocab);

// Entity tokens in ascending entity order, duplicates removed. Throws
// kInvalidArgument for entities outside the vocabulary.
std::vector<TokenId> encode_observation(std::span<const EntityId> observation,
                                        const Vocabulary& vocab);

// observation tokens, [SEP], actions, [EOS]
std::vector<TokenId> frame_example(std::span<const EntityId> observation,
                                   std::span<const Action> actions,
                                   const Vocabulary& vocab);

}  // namespace kgabduct
