#include "kgabduct/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/rng.hpp"

namespace kgabduct {

namespace fs = std::filesystem;

GraphLabels::GraphLabels(std::vector<std::string> entities,
                         std::vector<std::string> relations) {
  for (const auto& label : entities) {
    if (find_entity(label)) {
      throw Error(ErrorKind::kParse, "duplicate entity label: " + label);
    }
    intern_entity(label);
  }
  for (const auto& label : relations) {
    if (find_relation(label)) {
      throw Error(ErrorKind::kParse, "duplicate relation label: " + label);
    }
    intern_relation(label);
  }
}

std::optional<EntityId> GraphLabels::find_entity(std::string_view label) const {
  auto it = entity_index_.find(std::string(label));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> GraphLabels::find_relation(
    std::string_view label) const {
  auto it = relation_index_.find(std::string(label));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

EntityId GraphLabels::intern_entity(std::string_view label) {
  auto [it, inserted] = entity_index_.try_emplace(
      std::string(label), static_cast<EntityId>(entities_.size()));
  if (inserted) entities_.emplace_back(label);
  return it->second;
}

RelationId GraphLabels::intern_relation(std::string_view label) {
  auto [it, inserted] = relation_index_.try_emplace(
      std::string(label), static_cast<RelationId>(relations_.size()));
  if (inserted) relations_.emplace_back(label);
  return it->second;
}

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const GraphLabels> labels,
                               std::vector<Triple> edges)
    : labels_(std::move(labels)), edges_(std::move(edges)) {
  if (!labels_) labels_ = std::make_shared<GraphLabels>();
  const std::size_t n = labels_->num_entities();
  const std::size_t r = labels_->num_relations();
  for (const auto& e : edges_) {
    if (e.head >= n || e.tail >= n || e.relation >= r) {
      throw Error(ErrorKind::kInvalidArgument,
                  "edge references an id outside the label tables");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  out_tails_.reserve(edges_.size());
  head_offsets_.assign(n + 1, 0);
  tail_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    out_tails_.push_back(e.tail);
    ++head_offsets_[e.head + 1];
    ++tail_offsets_[e.tail + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    head_offsets_[i + 1] += head_offsets_[i];
    tail_offsets_[i + 1] += tail_offsets_[i];
  }
  in_pairs_.resize(edges_.size());
  std::vector<std::size_t> cursor(tail_offsets_.begin(), tail_offsets_.end() - 1);
  // Edges are sorted by head then relation, so each tail's bucket fills in
  // ascending (head, relation) order.
  for (const auto& e : edges_) {
    in_pairs_[cursor[e.tail]++] = HeadRelation{e.head, e.relation};
  }
}

bool KnowledgeGraph::has_edge(EntityId head, RelationId relation,
                              EntityId tail) const {
  return std::binary_search(edges_.begin(), edges_.end(),
                            Triple{head, relation, tail});
}

std::span<const EntityId> KnowledgeGraph::tails(EntityId head,
                                                RelationId relation) const {
  if (head >= num_entities()) return {};
  auto first = edges_.begin() + static_cast<std::ptrdiff_t>(head_offsets_[head]);
  auto last = edges_.begin() + static_cast<std::ptrdiff_t>(head_offsets_[head + 1]);
  auto [lo, hi] = std::equal_range(
      first, last, Triple{head, relation, 0},
      [](const Triple& a, const Triple& b) { return a.relation < b.relation; });
  const auto offset = static_cast<std::size_t>(lo - edges_.begin());
  return std::span<const EntityId>(out_tails_).subspan(
      offset, static_cast<std::size_t>(hi - lo));
}

std::span<const HeadRelation> KnowledgeGraph::in_edges(EntityId tail) const {
  if (tail >= num_entities()) return {};
  return std::span<const HeadRelation>(in_pairs_).subspan(
      tail_offsets_[tail], tail_offsets_[tail + 1] - tail_offsets_[tail]);
}

EntitySet KnowledgeGraph::out_image(std::span<const EntityId> heads,
                                    RelationId relation) const {
  EntitySet result;
  for (EntityId h : heads) {
    auto t = tails(h, relation);
    result.insert(result.end(), t.begin(), t.end());
  }
  if (heads.size() > 1) {
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
  }
  return result;
}

namespace {

struct TsvLine {
  std::string_view fields[3];
};

// Splits one line into exactly three tab-separated fields.
TsvLine split_line(std::string_view line, std::size_t line_no) {
  TsvLine out;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t tab = line.find('\t', start);
    if (i < 2) {
      if (tab == std::string_view::npos) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                           ": expected 3 tab-separated fields");
      }
      out.fields[i] = line.substr(start, tab - start);
      start = tab + 1;
    } else {
      if (tab != std::string_view::npos) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                           ": expected 3 tab-separated fields");
      }
      out.fields[i] = line.substr(start);
    }
  }
  for (const auto& f : out.fields) {
    if (f.empty()) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": empty field");
    }
  }
  return out;
}

std::uint32_t parse_id(std::string_view field, std::size_t line_no) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                       ": not an integer id: " +
                                       std::string(field));
  }
  return value;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!line.empty()) fn(line, line_no);
    pos = end + 1;
  }
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + file.string());
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + file.string());
}

std::vector<std::string> read_label_lines(const fs::path& file) {
  std::vector<std::string> labels;
  const std::string text = read_file(file);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    labels.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return labels;
}

}  // namespace

KnowledgeGraph parse_triples(std::string_view text, TripleFormat format) {
  auto labels = std::make_shared<GraphLabels>();
  std::vector<Triple> edges;
  if (format == TripleFormat::kLabelTsv) {
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
      const auto l = split_line(line, line_no);
      const EntityId h = labels->intern_entity(l.fields[0]);
      const RelationId r = labels->intern_relation(l.fields[1]);
      const EntityId t = labels->intern_entity(l.fields[2]);
      edges.push_back({h, r, t});
    });
  } else {
    std::uint32_t max_entity = 0;
    std::uint32_t max_relation = 0;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
      const auto l = split_line(line, line_no);
      Triple e{parse_id(l.fields[0], line_no), parse_id(l.fields[1], line_no),
               parse_id(l.fields[2], line_no)};
      max_entity = std::max({max_entity, e.head, e.tail});
      max_relation = std::max(max_relation, e.relation);
      edges.push_back(e);
    });
    if (!edges.empty()) {
      for (std::uint32_t i = 0; i <= max_entity; ++i) {
        labels->intern_entity(std::to_string(i));
      }
      for (std::uint32_t i = 0; i <= max_relation; ++i) {
        labels->intern_relation(std::to_string(i));
      }
    }
  }
  if (edges.empty()) throw Error(ErrorKind::kParse, "no triples in input");
  return KnowledgeGraph(std::move(labels), std::move(edges));
}

KnowledgeGraph load_triples(const fs::path& file, TripleFormat format) {
  try {
    return parse_triples(read_file(file), format);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParse) {
      throw Error(ErrorKind::kParse, file.string() + ": " + e.what());
    }
    throw;
  }
}

std::vector<Triple> load_edges(const fs::path& file, const GraphLabels& labels) {
  std::vector<Triple> edges;
  const std::string text = read_file(file);
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto l = split_line(line, line_no);
    auto h = labels.find_entity(l.fields[0]);
    auto r = labels.find_relation(l.fields[1]);
    auto t = labels.find_entity(l.fields[2]);
    if (!h || !r || !t) {
      throw Error(ErrorKind::kParse, file.string() + ": line " +
                                         std::to_string(line_no) +
                                         ": unknown label");
    }
    edges.push_back({*h, *r, *t});
  });
  return edges;
}

const char* to_string(SplitPart part) noexcept {
  switch (part) {
    case SplitPart::kTrain: return "train";
    case SplitPart::kValid: return "valid";
    case SplitPart::kTest: return "test";
  }
  return "?";
}

std::optional<SplitPart> parse_split_part(std::string_view name) {
  if (name == "train") return SplitPart::kTrain;
  if (name == "valid") return SplitPart::kValid;
  if (name == "test") return SplitPart::kTest;
  return std::nullopt;
}

const KnowledgeGraph& GraphSplit::graph(SplitPart part) const {
  switch (part) {
    case SplitPart::kTrain: return train;
    case SplitPart::kValid: return valid;
    case SplitPart::kTest: return test;
  }
  return test;
}

std::array<std::size_t, 3> split_sizes(std::size_t num_edges,
                                       const SplitRatios& ratios) {
  if (ratios.train == 0 || ratios.valid == 0 || ratios.test == 0) {
    throw Error(ErrorKind::kInvalidArgument, "split ratios must be positive");
  }
  const double total = double(ratios.train) + ratios.valid + ratios.test;
  const double e = static_cast<double>(num_edges);
  auto valid = static_cast<std::size_t>(std::llround(e * ratios.valid / total));
  auto test = static_cast<std::size_t>(std::llround(e * ratios.test / total));
  if (valid + test > num_edges) test = num_edges - valid;
  return {num_edges - valid - test, valid, test};
}

GraphSplit split_edges(const KnowledgeGraph& graph, const SplitRatios& ratios,
                       std::uint64_t seed) {
  if (graph.num_edges() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "cannot split an empty graph");
  }
  const auto sizes = split_sizes(graph.num_edges(), ratios);
  std::vector<Triple> order(graph.edges().begin(), graph.edges().end());
  Rng rng(seed);
  rng.shuffle(std::span<Triple>(order));

  std::array<std::vector<Triple>, 3> parts;
  auto it = order.begin();
  for (std::size_t p = 0; p < 3; ++p) {
    auto end = it + static_cast<std::ptrdiff_t>(sizes[p]);
    parts[p].assign(it, end);
    it = end;
  }
  std::vector<Triple> cumulative = parts[0];
  KnowledgeGraph train(graph.shared_labels(), cumulative);
  cumulative.insert(cumulative.end(), parts[1].begin(), parts[1].end());
  KnowledgeGraph valid(graph.shared_labels(), cumulative);
  cumulative.insert(cumulative.end(), parts[2].begin(), parts[2].end());
  KnowledgeGraph test(graph.shared_labels(), std::move(cumulative));
  return GraphSplit{std::move(train), std::move(valid), std::move(test), seed,
                    std::move(parts)};
}

void write_split(const GraphSplit& split, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  const GraphLabels& labels = split.test.labels();

  auto join = [](const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
      out += l;
      out += '\n';
    }
    return out;
  };
  write_file(dir / "entities.txt", join(labels.entities()));
  write_file(dir / "relations.txt", join(labels.relations()));

  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t p = 0; p < 3; ++p) {
    std::string out;
    for (const auto& e : split.partitions[p]) {
      out += labels.entity(e.head);
      out += '\t';
      out += labels.relation(e.relation);
      out += '\t';
      out += labels.entity(e.tail);
      out += '\n';
    }
    const auto part = static_cast<SplitPart>(p);
    write_file(dir / (std::string(to_string(part)) + ".tsv"), out);
    counts[to_string(part)] = split.partitions[p].size();
  }
  nlohmann::json manifest = {
      {"seed", split.seed},
      {"counts", counts},
      {"entities", labels.num_entities()},
      {"relations", labels.num_relations()},
  };
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

GraphSplit read_split(const fs::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, "manifest.json: " + std::string(e.what()));
  }
  auto labels = std::make_shared<GraphLabels>(
      read_label_lines(dir / "entities.txt"),
      read_label_lines(dir / "relations.txt"));
  std::array<std::vector<Triple>, 3> parts;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto part = static_cast<SplitPart>(p);
    parts[p] = load_edges(dir / (std::string(to_string(part)) + ".tsv"), *labels);
    const auto expected = manifest.at("counts").value(to_string(part), parts[p].size());
    if (expected != parts[p].size()) {
      throw Error(ErrorKind::kParse, std::string("manifest count mismatch for ") +
                                         to_string(part));
    }
  }
  std::vector<Triple> cumulative = parts[0];
  KnowledgeGraph train(labels, cumulative);
  cumulative.insert(cumulative.end(), parts[1].begin(), parts[1].end());
  KnowledgeGraph valid(labels, cumulative);
  cumulative.insert(cumulative.end(), parts[2].begin(), parts[2].end());
  KnowledgeGraph test(labels, std::move(cumulative));
  return GraphSplit{std::move(train), std::move(valid), std::move(test),
                    manifest.value("seed", std::uint64_t{0}), std::move(parts)};
}

KnowledgeGraph open_graph(const fs::path& given) {
  const fs::path ref = given.has_filename() ? given : given.parent_path();
  if (fs::is_directory(ref) && fs::exists(ref / "manifest.json")) {
    return read_split(ref).train;
  }
  const fs::path parent = ref.parent_path();
  if (auto part = parse_split_part(ref.filename().string());
      part && fs::exists(parent / "manifest.json")) {
    GraphSplit split = read_split(parent);
    switch (*part) {
      case SplitPart::kTrain: return std::move(split.train);
      case SplitPart::kValid: return std::move(split.valid);
      case SplitPart::kTest: return std::move(split.test);
    }
  }
  if (fs::is_regular_file(ref)) return load_triples(ref, TripleFormat::kLabelTsv);
  throw Error(ErrorKind::kIo, "not a triple file or split directory: " + ref.string());
}

}  // namespace kgabduct
