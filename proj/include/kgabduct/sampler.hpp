#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgabduct/graph.hpp"
#include "kgabduct/hypothesis.hpp"
#include "kgabduct/rng.hpp"
#include "kgabduct/tokenizer.hpp"

namespace kgabduct {

struct SamplerOptions {
  std::size_t max_observation = 32;
  std::size_t retry_budget = 128;
};

struct Grounding {
  HypothesisGraph hypothesis;
  EntityId seed = 0;  // guaranteed to be in the hypothesis' conclusion
};

// Grounds the pattern backwards from a seed entity: projections draw a
// uniform in-edge of the current entity, intersections reuse the entity,
// unions move later branches to a random entity, and negated branches are
// grounded at a random entity and redrawn until they spare the current one.
// Dead ends restart with a new seed (or the given one) until the retry budget
// is spent, then throw kUnsatisfiable.
Grounding ground_type(const KnowledgeGraph& graph, Pattern pattern, Rng& rng,
                      const SamplerOptions& options = {},
                      std::optional<EntityId> seed = std::nullopt);

struct PairSample {
  HypothesisGraph hypothesis;
  EntitySet observation;  // ascending
  Pattern pattern = Pattern::k1p;
  SplitPart split = SplitPart::kTrain;
  EntityId seed = 0;
};

// Grounds and executes until the conclusion has 1..max_observation entities.
PairSample sample_pair(const KnowledgeGraph& graph, Pattern pattern, Rng& rng,
                       const SamplerOptions& options = {});

struct SplitDatasets {
  std::array<std::vector<PairSample>, 3> samples;
  std::vector<std::string> warnings;
};

// Per-pattern sample counts indexed by SplitPart.
using SplitCounts = std::array<std::size_t, 3>;

// Training pairs come from the train graph. Validation pairs are drawn on
// the valid graph and kept only when their conclusion strictly grows from
// train to valid; test pairs likewise from valid to test. Jobs are seeded per
// (split, pattern) so the output does not depend on `workers`.
SplitDatasets sample_split_datasets(const GraphSplit& split, std::span<const Pattern> patterns,
                                    const SplitCounts& counts, std::uint64_t seed,
                                    unsigned workers = 1, const SamplerOptions& options = {});

// {"pattern","hypothesis","actions","observation"} on one line.
std::string pair_to_json(const PairSample& sample, const Vocabulary& vocab);
void write_pairs(const std::filesystem::path& file, std::span<const PairSample> samples,
                 const Vocabulary& vocab);

}  // namespace kgabduct
