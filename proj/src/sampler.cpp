#include "kgabduct/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/executor.hpp"

namespace kgabduct {

namespace {

using Op = HypothesisTerm::Op;

void collect_members(const HypothesisTerm& t, Op op, std::vector<const HypothesisTerm*>& out) {
  for (const auto& c : t.children) {
    if (c.op == op) {
      collect_members(c, op, out);
    } else {
      out.push_back(&c);
    }
  }
}

bool has_duplicate_members(const HypothesisTerm& merge) {
  std::vector<const HypothesisTerm*> members;
  collect_members(merge, merge.op, members);
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (*members[i] == *members[j]) return true;
    }
  }
  return false;
}

class Grounder {
 public:
  Grounder(const KnowledgeGraph& graph, Rng& rng, const SamplerOptions& options)
      : graph_(graph), rng_(rng), options_(options) {}

  EntityId random_entity() {
    return static_cast<EntityId>(rng_.below(graph_.num_entities()));
  }

  std::optional<HypothesisTerm> ground(const HypothesisTerm& type, EntityId target) {
    switch (type.op) {
      case Op::kAnchor:
        return term::anchor(target);
      case Op::kProject: {
        const auto in = graph_.in_edges(target);
        if (in.empty()) return std::nullopt;
        const HeadRelation pick = in[rng_.below(in.size())];
        auto child = ground(type.children.front(), pick.head);
        if (!child) return std::nullopt;
        return term::project(pick.relation, std::move(*child));
      }
      case Op::kIntersect: {
        HypothesisTerm out{Op::kIntersect, 0, {}};
        for (const auto& sub : type.children) {
          auto child = sub.op == Op::kNegate ? ground_negated(sub.children.front(), target)
                                             : ground(sub, target);
          if (!child) return std::nullopt;
          out.children.push_back(std::move(*child));
        }
        if (has_duplicate_members(out)) return std::nullopt;
        return out;
      }
      case Op::kUnite: {
        HypothesisTerm out{Op::kUnite, 0, {}};
        for (std::size_t i = 0; i < type.children.size(); ++i) {
          auto child = ground(type.children[i], i == 0 ? target : random_entity());
          if (!child) return std::nullopt;
          out.children.push_back(std::move(*child));
        }
        if (has_duplicate_members(out)) return std::nullopt;
        return out;
      }
      case Op::kNegate:
        return ground_negated(type.children.front(), target);
    }
    return std::nullopt;
  }

 private:
  // The negated branch is grounded away from `target` and kept only if its
  // own conclusion leaves `target` in place.
  std::optional<HypothesisTerm> ground_negated(const HypothesisTerm& type, EntityId target) {
    for (std::size_t attempt = 0; attempt < options_.retry_budget; ++attempt) {
      auto branch = ground(type, random_entity());
      if (!branch) continue;
      const EntitySet removed = conclusion(make_hypothesis(*branch), graph_);
      if (!std::binary_search(removed.begin(), removed.end(), target)) {
        return term::negate(std::move(*branch));
      }
    }
    return std::nullopt;
  }

  const KnowledgeGraph& graph_;
  Rng& rng_;
  const SamplerOptions& options_;
};

std::optional<Grounding> try_ground(const KnowledgeGraph& graph, Pattern pattern, Rng& rng,
                                    const SamplerOptions& options,
                                    std::optional<EntityId> seed) {
  Grounder grounder(graph, rng, options);
  const EntityId start = seed ? *seed : grounder.random_entity();
  auto grounded = grounder.ground(pattern_template(pattern), start);
  if (!grounded) return std::nullopt;
  return Grounding{make_hypothesis(*grounded), start};
}

void require_sampleable(const KnowledgeGraph& graph) {
  if (graph.num_edges() == 0 || graph.num_entities() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "cannot sample from a graph without edges");
  }
}

bool strictly_grows(const EntitySet& before, const EntitySet& after) {
  return after.size() > before.size() &&
         std::includes(after.begin(), after.end(), before.begin(), before.end());
}

}  // namespace

Grounding ground_type(const KnowledgeGraph& graph, Pattern pattern, Rng& rng,
                      const SamplerOptions& options, std::optional<EntityId> seed) {
  require_sampleable(graph);
  if (seed && *seed >= graph.num_entities()) {
    throw Error(ErrorKind::kInvalidArgument, "seed entity outside the graph");
  }
  for (std::size_t attempt = 0; attempt < options.retry_budget; ++attempt) {
    if (auto g = try_ground(graph, pattern, rng, options, seed)) return std::move(*g);
  }
  throw Error(ErrorKind::kUnsatisfiable,
              std::string("unsatisfiable pattern ") + to_string(pattern));
}

PairSample sample_pair(const KnowledgeGraph& graph, Pattern pattern, Rng& rng,
                       const SamplerOptions& options) {
  require_sampleable(graph);
  for (std::size_t attempt = 0; attempt < options.retry_budget; ++attempt) {
    auto g = try_ground(graph, pattern, rng, options, std::nullopt);
    if (!g) continue;
    EntitySet observation = conclusion(g->hypothesis, graph);
    if (observation.empty() || observation.size() > options.max_observation) continue;
    return PairSample{std::move(g->hypothesis), std::move(observation), pattern,
                      SplitPart::kTrain, g->seed};
  }
  throw Error(ErrorKind::kUnsatisfiable,
              std::string("retry budget exhausted sampling ") + to_string(pattern));
}

SplitDatasets sample_split_datasets(const GraphSplit& split, std::span<const Pattern> patterns,
                                    const SplitCounts& counts, std::uint64_t seed,
                                    unsigned workers, const SamplerOptions& options) {
  struct Job {
    SplitPart part;
    Pattern pattern;
    std::vector<PairSample> samples;
    std::string warning;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < 3; ++p) {
    for (Pattern pattern : patterns) jobs.push_back({static_cast<SplitPart>(p), pattern, {}, {}});
  }

  auto run = [&](Job& job) {
    const auto part_index = static_cast<std::size_t>(job.part);
    Rng rng(mix_seed(seed, part_index, static_cast<std::uint64_t>(job.pattern)));
    const KnowledgeGraph& sampling = split.graph(job.part);
    const KnowledgeGraph* previous =
        part_index == 0 ? nullptr : &split.graph(static_cast<SplitPart>(part_index - 1));
    const std::size_t wanted = counts[part_index];
    try {
      while (job.samples.size() < wanted) {
        bool accepted = false;
        for (std::size_t attempt = 0; attempt < options.retry_budget && !accepted; ++attempt) {
          PairSample s = sample_pair(sampling, job.pattern, rng, options);
          if (previous && !strictly_grows(conclusion(s.hypothesis, *previous), s.observation)) {
            continue;
          }
          s.split = job.part;
          job.samples.push_back(std::move(s));
          accepted = true;
        }
        if (!accepted) {
          throw Error(ErrorKind::kUnsatisfiable, "no hypothesis met the growth constraint");
        }
      }
    } catch (const Error& e) {
      job.warning = std::string(to_string(job.part)) + "/" + to_string(job.pattern) + ": " +
                    std::to_string(job.samples.size()) + " of " + std::to_string(wanted) +
                    " samples (" + e.what() + ")";
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    for (auto& job : jobs) run(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run(jobs[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  SplitDatasets out;
  for (auto& job : jobs) {
    auto& bucket = out.samples[static_cast<std::size_t>(job.part)];
    std::move(job.samples.begin(), job.samples.end(), std::back_inserter(bucket));
    if (!job.warning.empty()) out.warnings.push_back(std::move(job.warning));
  }
  return out;
}

std::string pair_to_json(const PairSample& sample, const Vocabulary& vocab) {
  nlohmann::ordered_json doc;
  doc["pattern"] = to_string(sample.pattern);
  doc["hypothesis"] = nlohmann::ordered_json::parse(to_canonical_json(sample.hypothesis));
  doc["actions"] = to_tokens(hypothesis_to_actions(sample.hypothesis), vocab);
  doc["observation"] = sample.observation;
  return doc.dump();
}

void write_pairs(const std::filesystem::path& file, std::span<const PairSample> samples,
                 const Vocabulary& vocab) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + file.string());
  for (const auto& s : samples) out << pair_to_json(s, vocab) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + file.string());
}

}  // namespace kgabduct
