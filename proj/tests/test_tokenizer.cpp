#include <sstream>

#include "doctest.h"
#include "kgabduct/error.hpp"
#include "kgabduct/sampler.hpp"
#include "kgabduct/tokenizer.hpp"
#include "support/oracles.hpp"

using namespace kgabduct;
using namespace kgabduct::term;

namespace {

const GraphLabels& branded_phone_labels() {
  static const GraphLabels labels({"Apple", "2010", "Phone"}, {"Brand", "Release", "Type"});
  return labels;
}

ParseOutcome parse(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  return tokens_to_hypothesis(tokens, vocab);
}

}  // namespace

TEST_CASE("vocabulary layout") {
  const Vocabulary v(branded_phone_labels());
  CHECK(v.size() == 13);
  CHECK_FALSE(v.typed());
  CHECK(v.token(0) == "[PAD]");
  CHECK(v.token(3) == "[SEP]");
  CHECK(v.token(4) == "[I]");
  CHECK(v.token(6) == "[N]");
  CHECK(v.token(v.relation_token(1)) == "[Release]");
  CHECK(v.token(v.entity_token(2)) == "[Phone]");
  CHECK(v.find("[Brand]") == v.relation_token(0));
  CHECK_FALSE(v.find("[Nope]").has_value());
  CHECK_FALSE(v.action_of(static_cast<TokenId>(SpecialToken::kEos)).has_value());
  CHECK(v.action_of(4) == Action{ActionKind::kIntersection, 0});
  CHECK(v.action_of(v.entity_token(1)) == Action{ActionKind::kEntity, 1});
  CHECK(v.id_of({ActionKind::kRelation, 2}) == v.relation_token(2));

  std::istringstream lines(v.to_text());
  std::string line;
  TokenId id = 0;
  while (std::getline(lines, line)) CHECK(line == v.token(id++));
  CHECK(id == v.size());
}

TEST_CASE("colliding labels switch to typed tokens") {
  const GraphLabels labels({"0", "1"}, {"0"});
  const Vocabulary v(labels);
  CHECK(v.typed());
  CHECK(v.token(v.relation_token(0)) == "[r:0]");
  CHECK(v.token(v.entity_token(0)) == "[e:0]");
  const auto out = parse({"[r:0]", "[e:1]"}, v);
  REQUIRE(out.ok());
  CHECK(out.hypothesis->pattern == Pattern::k1p);

  const GraphLabels special({"N"}, {"r"});
  CHECK(Vocabulary(special).typed());
}

TEST_CASE("branded phone sequence parses to the expected graph") {
  const Vocabulary v(branded_phone_labels());
  const std::vector<std::string> tokens = {"[I]",    "[I]",    "[Brand]", "[Apple]", "[Release]",
                                           "[2010]", "[N]",    "[Type]",  "[Phone]"};
  const auto out = parse(tokens, v);
  REQUIRE(out.ok());
  CHECK(out.hypothesis->pattern == Pattern::k3in);
  const auto expected = make_hypothesis(intersect(
      intersect(project(0, anchor(0)), project(1, anchor(1))), negate(project(2, anchor(2)))));
  CHECK(to_canonical_json(*out.hypothesis) == to_canonical_json(expected));
  // The parser's own node order is already canonical here.
  CHECK(*out.hypothesis == canonicalize(*out.hypothesis));
  CHECK(to_tokens(hypothesis_to_actions(*out.hypothesis), v) == tokens);
}

TEST_CASE("relation then entity is 1p") {
  const Vocabulary v(branded_phone_labels());
  const auto out = parse({"[Type]", "[Phone]"}, v);
  REQUIRE(out.ok());
  CHECK(out.hypothesis->pattern == Pattern::k1p);
  CHECK(*out.hypothesis == make_hypothesis(project(2, anchor(2))));
}

TEST_CASE("parse failures") {
  const Vocabulary v(branded_phone_labels());
  auto kind_of = [&](const std::vector<std::string>& tokens) {
    const auto out = parse(tokens, v);
    REQUIRE_FALSE(out.ok());
    REQUIRE(out.error.has_value());
    return out.error->kind;
  };
  CHECK(kind_of({}) == ParseErrorKind::kEmpty);
  CHECK(kind_of({"[I]", "[Type]", "[Phone]"}) == ParseErrorKind::kIncomplete);
  CHECK(kind_of({"[Type]", "[Phone]", "[Apple]"}) == ParseErrorKind::kTrailing);
  CHECK(kind_of({"[Type]", "[iPhone]"}) == ParseErrorKind::kUnknownToken);
  CHECK(kind_of({"[Type]", "[EOS]"}) == ParseErrorKind::kUnknownToken);
  // Negation at the target and negation under a union are not hypotheses.
  CHECK(kind_of({"[N]", "[Type]", "[Phone]"}) == ParseErrorKind::kInvalid);
  CHECK(kind_of({"[U]", "[Type]", "[Phone]", "[N]", "[Brand]", "[Apple]"}) ==
        ParseErrorKind::kInvalid);
  // A lone entity has no target.
  CHECK(kind_of({"[Apple]"}) == ParseErrorKind::kInvalid);
  // Three projections deep matches no pattern.
  CHECK(kind_of({"[Type]", "[Type]", "[Type]", "[Phone]"}) == ParseErrorKind::kInvalid);

  const auto truncated = parse({"[I]", "[Type]", "[Phone]"}, v);
  CHECK(truncated.error->position == 3);
  CHECK(std::string(to_string(ParseErrorKind::kUnknownToken)) == "unknown_token");
}

TEST_CASE("arbitrary token strings never crash the parser") {
  const Vocabulary v(branded_phone_labels());
  Rng rng(99);
  for (int i = 0; i < 3000; ++i) {
    std::vector<TokenId> ids(rng.below(12));
    for (auto& id : ids) id = static_cast<TokenId>(rng.below(v.size() + 2));
    const auto out = token_ids_to_hypothesis(ids, v);
    CHECK(out.ok() != out.error.has_value());
    if (out.ok()) CHECK(validate(*out.hypothesis).empty());
  }
}

TEST_CASE("sampled hypotheses round trip through tokens") {
  Rng rng(17);
  const auto g = oracle::random_graph(rng, 40, 5, 300);
  const Vocabulary v(g.labels());
  for (Pattern p : kAllPatterns) {
    for (int i = 0; i < 50; ++i) {
      const auto h = ground_type(g, p, rng).hypothesis;
      const auto tokens = to_tokens(hypothesis_to_actions(h), v);
      const auto back = tokens_to_hypothesis(tokens, v);
      REQUIRE(back.ok());
      CHECK(oracle::label_isomorphic(*back.hypothesis, h));
      CHECK(to_canonical_json(*back.hypothesis) == to_canonical_json(h));
    }
  }
}

TEST_CASE("observation encoding and framing") {
  const Vocabulary v(branded_phone_labels());
  const std::vector<EntityId> obs = {2, 0, 2};
  const auto enc = encode_observation(obs, v);
  CHECK(enc == std::vector<TokenId>{v.entity_token(0), v.entity_token(2)});
  CHECK_THROWS_AS(encode_observation(std::vector<EntityId>{7}, v), Error);

  const ActionSequence actions = {{ActionKind::kRelation, 2}, {ActionKind::kEntity, 2}};
  const auto framed = frame_example(obs, actions, v);
  const std::vector<TokenId> expected = {v.entity_token(0), v.entity_token(2),
                                         static_cast<TokenId>(SpecialToken::kSep),
                                         v.relation_token(2), v.entity_token(2),
                                         static_cast<TokenId>(SpecialToken::kEos)};
  CHECK(framed == expected);
}
