#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgabduct/hypothesis.hpp"

namespace kgabduct {

enum class AmrTripleKind : std::uint8_t { kInstance, kAttribute, kRelation };

// instance(v, v'), label(v, entity) or label(v, w). Variables are numbered
// from 0 (the target); `target` is an entity for attributes, a variable for
// relations and unused for instances.
struct AmrTriple {
  AmrTripleKind kind = AmrTripleKind::kInstance;
  std::string label;
  std::uint32_t source = 0;
  std::uint32_t target = 0;

  friend auto operator<=>(const AmrTriple&, const AmrTriple&) = default;
};

// Semantic-graph view of a hypothesis: one variable per logical variable,
// a virtual concept every variable is an instance of, relation names on the
// other edges. Negated atoms carry a "not:" prefix and union members an
// "or:" prefix. Triples are sorted and unique.
struct AmrView {
  std::size_t num_variables = 0;
  std::vector<AmrTriple> triples;
};

AmrView to_amr_view(const HypothesisGraph& h);

// Number of triples of `pred` matched in `gold` under a mapping from pred
// variables to gold variables (-1 = unmapped). The mapping must be injective.
std::size_t matched_triples(const AmrView& pred, const AmrView& gold,
                            const std::vector<int>& mapping);

struct SmatchOptions {
  std::size_t random_restarts = 10;
  std::uint64_t seed = 0;
};

struct SmatchResult {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t matched = 0;
  std::size_t pred_triples = 0;
  std::size_t gold_triples = 0;
  std::vector<int> mapping;
};

// Hill-climbing search for the variable mapping with the most matched
// triples: one attribute-guided start plus `random_restarts` random starts,
// each improved by reassign and swap moves until no move helps.
SmatchResult smatch(const AmrView& pred, const AmrView& gold, const SmatchOptions& options = {});
SmatchResult smatch(const HypothesisGraph& pred, const HypothesisGraph& gold,
                    const SmatchOptions& options = {});

double smatch_score(const HypothesisGraph& pred, const HypothesisGraph& gold,
                    const SmatchOptions& options = {});

}  // namespace kgabduct
