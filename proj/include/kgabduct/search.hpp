#pragma once

#include <optional>

#include "kgabduct/graph.hpp"
#include "kgabduct/hypothesis.hpp"

namespace kgabduct {

struct SearchResult {
  HypothesisGraph hypothesis;
  double train_jaccard = 0;
};

// Scores every one-hop hypothesis r(h, V?) with an edge (h, r, t), t in the
// observation, by Jaccard against the observation on `train`, and returns
// the best. Ties go to the smallest (relation, head). nullopt when no
// observed entity has an in-edge.
std::optional<SearchResult> one_hop_search(const EntitySet& observation,
                                           const KnowledgeGraph& train);

}  // namespace kgabduct
