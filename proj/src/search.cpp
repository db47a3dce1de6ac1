#include "kgabduct/search.hpp"

#include <algorithm>
#include <tuple>

#include "kgabduct/error.hpp"
#include "kgabduct/executor.hpp"

namespace kgabduct {

std::optional<SearchResult> one_hop_search(const EntitySet& observation,
                                           const KnowledgeGraph& train) {
  if (observation.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "observation must be nonempty");
  }
  std::vector<HeadRelation> candidates;
  for (EntityId t : observation) {
    for (const auto& hr : train.in_edges(t)) candidates.push_back(hr);
  }
  // (relation, head) order so the first strict improvement is the tie winner.
  std::sort(candidates.begin(), candidates.end(), [](const HeadRelation& a, const HeadRelation& b) {
    return std::tie(a.relation, a.head) < std::tie(b.relation, b.head);
  });
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return std::nullopt;

  const HeadRelation* best = nullptr;
  double best_jaccard = -1.0;
  for (const auto& c : candidates) {
    const EntityId head[] = {c.head};
    const double score = jaccard(train.out_image(head, c.relation), observation);
    if (score > best_jaccard) {
      best_jaccard = score;
      best = &c;
    }
  }
  return SearchResult{make_hypothesis(term::project(best->relation, term::anchor(best->head))),
                      best_jaccard};
}

}  // namespace kgabduct
