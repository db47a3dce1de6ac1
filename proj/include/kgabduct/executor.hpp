#pragma once

#include <cstddef>

#include "kgabduct/graph.hpp"
#include "kgabduct/hypothesis.hpp"

namespace kgabduct {

// The set of entities V? for which the hypothesis holds on `graph`.
// Negated branches are applied as set differences at their intersection.
// Throws kForeignSymbol when the hypothesis names an id the graph lacks.
EntitySet conclusion(const HypothesisGraph& h, const KnowledgeGraph& graph);

// Same semantics by exhaustive enumeration of variable assignments over the
// graph's entities. Throws kTooLarge when |entities|^variables exceeds
// `max_assignments`.
EntitySet brute_force_conclusion(const HypothesisGraph& h,
                                 const KnowledgeGraph& graph,
                                 std::size_t max_assignments = 10'000);

// |a ∩ b| / |a ∪ b| over sorted sets; 0 when both are empty.
double jaccard(const EntitySet& a, const EntitySet& b);

// Sorts and deduplicates an arbitrary id list.
EntitySet make_entity_set(std::vector<EntityId> ids);

// Fails with kForeignSymbol on ids outside the graph.
void check_symbols(const HypothesisGraph& h, const KnowledgeGraph& graph);

}  // namespace kgabduct
