#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgabduct {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

// Sorted, duplicate-free list of entity ids. All set algebra in the library
// works on this representation.
using EntitySet = std::vector<EntityId>;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct HeadRelation {
  EntityId head = 0;
  RelationId relation = 0;

  friend auto operator<=>(const HeadRelation&, const HeadRelation&) = default;
};

// Dense id <-> external label tables shared by every graph of a split.
class GraphLabels {
 public:
  GraphLabels() = default;
  GraphLabels(std::vector<std::string> entities,
              std::vector<std::string> relations);

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

  const std::string& entity(EntityId id) const { return entities_.at(id); }
  const std::string& relation(RelationId id) const {
    return relations_.at(id);
  }
  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }

  std::optional<EntityId> find_entity(std::string_view label) const;
  std::optional<RelationId> find_relation(std::string_view label) const;

  // Returns the id of `label`, appending it if unseen.
  EntityId intern_entity(std::string_view label);
  RelationId intern_relation(std::string_view label);

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

// Immutable directed multigraph with CSR-style out- and in-adjacency.
class KnowledgeGraph {
 public:
  KnowledgeGraph(std::shared_ptr<const GraphLabels> labels,
                 std::vector<Triple> edges);

  std::size_t num_entities() const { return labels_->num_entities(); }
  std::size_t num_relations() const { return labels_->num_relations(); }
  std::size_t num_edges() const { return edges_.size(); }

  // Edges sorted by (head, relation, tail).
  std::span<const Triple> edges() const { return edges_; }

  bool has_edge(EntityId head, RelationId relation, EntityId tail) const;

  // Tails t with (head, relation, t) in the graph, ascending.
  std::span<const EntityId> tails(EntityId head, RelationId relation) const;

  // In-edges of `tail` as (head, relation) pairs, ascending.
  std::span<const HeadRelation> in_edges(EntityId tail) const;

  EntitySet out_image(std::span<const EntityId> heads,
                      RelationId relation) const;

  const GraphLabels& labels() const { return *labels_; }
  const std::shared_ptr<const GraphLabels>& shared_labels() const {
    return labels_;
  }

 private:
  std::shared_ptr<const GraphLabels> labels_;
  std::vector<Triple> edges_;
  std::vector<EntityId> out_tails_;
  std::vector<std::size_t> head_offsets_;
  std::vector<HeadRelation> in_pairs_;
  std::vector<std::size_t> tail_offsets_;
};

enum class TripleFormat { kLabelTsv, kIdTsv };

// Reads `head<TAB>relation<TAB>tail` lines. Labels get dense ids in order of
// first appearance; id-tsv files use the integers directly. Blank lines are
// skipped, duplicates dropped.
KnowledgeGraph load_triples(const std::filesystem::path& file,
                            TripleFormat format);
KnowledgeGraph parse_triples(std::string_view text, TripleFormat format);

// Reads a label-tsv edge list against fixed label tables; unknown labels are
// parse errors.
std::vector<Triple> load_edges(const std::filesystem::path& file,
                               const GraphLabels& labels);

struct SplitRatios {
  std::uint32_t train = 8;
  std::uint32_t valid = 1;
  std::uint32_t test = 1;
};

enum class SplitPart { kTrain = 0, kValid = 1, kTest = 2 };

const char* to_string(SplitPart part) noexcept;
std::optional<SplitPart> parse_split_part(std::string_view name);

// Cumulative graphs: train holds the training partition, valid adds the
// validation partition, test holds every edge.
struct GraphSplit {
  KnowledgeGraph train;
  KnowledgeGraph valid;
  KnowledgeGraph test;
  std::uint64_t seed = 0;
  // Disjoint partitions in draw order.
  std::array<std::vector<Triple>, 3> partitions;

  const KnowledgeGraph& graph(SplitPart part) const;
};

// Partition sizes: valid = round(E*valid/sum), test = round(E*test/sum),
// train takes the remainder.
std::array<std::size_t, 3> split_sizes(std::size_t num_edges,
                                       const SplitRatios& ratios);

GraphSplit split_edges(const KnowledgeGraph& graph, const SplitRatios& ratios,
                       std::uint64_t seed);

// Directory layout: entities.txt, relations.txt (one label per line, line
// number = id), train.tsv/valid.tsv/test.tsv holding the disjoint
// partitions, and manifest.json {seed, counts}.
void write_split(const GraphSplit& split, const std::filesystem::path& dir);
GraphSplit read_split(const std::filesystem::path& dir);

// Resolves a graph reference: a triple file (label-tsv), a split directory
// (its train graph), or `<split-dir>/<train|valid|test>` (that cumulative
// graph).
KnowledgeGraph open_graph(const std::filesystem::path& ref);

}  // namespace kgabduct
