#include "kgabduct/kgabduct.h"

#include <cstring>
#include <filesystem>
#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "kgabduct/env.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/evaluation.hpp"
#include "kgabduct/graph.hpp"
#include "kgabduct/sampler.hpp"

struct kga_graph {
  std::shared_ptr<const kgabduct::KnowledgeGraph> graph;
};

struct kga_split {
  kgabduct::GraphSplit split;
};

struct kga_env {
  std::shared_ptr<const kgabduct::RewardEnvironment> env;
};

namespace {

using namespace kgabduct;

thread_local std::string last_error;

kga_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return KGA_ERR_IO;
    case ErrorKind::kParse: return KGA_ERR_PARSE;
    case ErrorKind::kInvalidArgument: return KGA_ERR_INVALID_ARGUMENT;
    case ErrorKind::kForeignSymbol: return KGA_ERR_FOREIGN_SYMBOL;
    case ErrorKind::kUnsatisfiable: return KGA_ERR_UNSATISFIABLE;
    case ErrorKind::kTooLarge: return KGA_ERR_TOO_LARGE;
  }
  return KGA_ERR_INTERNAL;
}

template <class Fn>
kga_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return KGA_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return KGA_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<Pattern> parse_pattern_list(std::string_view list) {
  if (list == "all") return {kAllPatterns.begin(), kAllPatterns.end()};
  std::vector<Pattern> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const std::string_view name = list.substr(0, comma);
    auto p = parse_pattern(name);
    if (!p) throw Error(ErrorKind::kInvalidArgument, "unknown pattern: " + std::string(name));
    out.push_back(*p);
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidArgument, "no patterns given");
  return out;
}

SmatchOptions smatch_options(std::uint64_t seed) {
  SmatchOptions o;
  o.seed = seed;
  return o;
}

}  // namespace

extern "C" {

const char* kga_last_error(void) { return last_error.c_str(); }

const char* kga_status_name(kga_status status) {
  switch (status) {
    case KGA_OK: return "ok";
    case KGA_ERR_IO: return "io";
    case KGA_ERR_PARSE: return "parse";
    case KGA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case KGA_ERR_FOREIGN_SYMBOL: return "foreign_symbol";
    case KGA_ERR_UNSATISFIABLE: return "unsatisfiable";
    case KGA_ERR_TOO_LARGE: return "too_large";
    case KGA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void kga_string_free(char* s) { std::free(s); }

kga_status kga_graph_load(const char* path, kga_triple_format format, kga_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto f = format == KGA_FORMAT_ID_TSV ? TripleFormat::kIdTsv : TripleFormat::kLabelTsv;
    *out = new kga_graph{std::make_shared<const KnowledgeGraph>(load_triples(path, f))};
  });
}

kga_status kga_graph_open(const char* ref, kga_graph** out) {
  return guarded([&] {
    require(ref, "ref");
    require(out, "out");
    *out = new kga_graph{std::make_shared<const KnowledgeGraph>(open_graph(ref))};
  });
}

size_t kga_graph_num_entities(const kga_graph* g) { return g ? g->graph->num_entities() : 0; }
size_t kga_graph_num_relations(const kga_graph* g) { return g ? g->graph->num_relations() : 0; }
size_t kga_graph_num_edges(const kga_graph* g) { return g ? g->graph->num_edges() : 0; }
void kga_graph_free(kga_graph* g) { delete g; }

kga_status kga_split_edges(const kga_graph* g, uint32_t train, uint32_t valid, uint32_t test,
                           uint64_t seed, kga_split** out) {
  return guarded([&] {
    require(g, "graph");
    require(out, "out");
    *out = new kga_split{split_edges(*g->graph, SplitRatios{train, valid, test}, seed)};
  });
}

kga_status kga_split_read(const char* dir, kga_split** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new kga_split{read_split(dir)};
  });
}

kga_status kga_split_write(const kga_split* s, const char* dir) {
  return guarded([&] {
    require(s, "split");
    require(dir, "dir");
    write_split(s->split, dir);
  });
}

void kga_split_counts(const kga_split* s, size_t counts[3]) {
  for (std::size_t p = 0; p < 3; ++p) counts[p] = s ? s->split.partitions[p].size() : 0;
}

kga_status kga_split_graph(const kga_split* s, const char* part, kga_graph** out) {
  return guarded([&] {
    require(s, "split");
    require(part, "part");
    require(out, "out");
    auto p = parse_split_part(part);
    if (!p) throw Error(ErrorKind::kInvalidArgument, "unknown split part: " + std::string(part));
    *out = new kga_graph{std::make_shared<const KnowledgeGraph>(s->split.graph(*p))};
  });
}

void kga_split_free(kga_split* s) { delete s; }

kga_status kga_sample(const kga_split* s, const char* patterns, const size_t counts[3],
                      uint64_t seed, unsigned workers, size_t max_observation,
                      const char* out_dir, char** report) {
  return guarded([&] {
    require(s, "split");
    require(patterns, "patterns");
    require(counts, "counts");
    require(out_dir, "out_dir");
    const auto chosen = parse_pattern_list(patterns);
    SamplerOptions options;
    if (max_observation) options.max_observation = max_observation;
    const SplitCounts wanted{counts[0], counts[1], counts[2]};
    const SplitDatasets data =
        sample_split_datasets(s->split, chosen, wanted, seed, workers, options);

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const Vocabulary vocab(s->split.train.labels());
    vocab.write(dir / "vocab.txt");
    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    for (std::size_t p = 0; p < 3; ++p) {
      const char* name = to_string(static_cast<SplitPart>(p));
      write_pairs(dir / (std::string(name) + ".jsonl"), data.samples[p], vocab);
      doc["counts"][name] = data.samples[p].size();
    }
    doc["vocab_size"] = vocab.size();
    doc["warnings"] = data.warnings;
    if (report) *report = dup_string(doc.dump());
  });
}

kga_status kga_evaluate(const kga_graph* g, const char* predictions, unsigned workers,
                        uint64_t seed, int pretty, char** report) {
  return guarded([&] {
    require(g, "graph");
    require(predictions, "predictions");
    require(report, "report");
    const Vocabulary vocab(g->graph->labels());
    const auto records = read_pair_records(predictions, &vocab);
    const auto result = evaluate_predictions(*g->graph, records, workers, smatch_options(seed));
    *report = dup_string(pretty ? to_table(result) : to_json(result));
  });
}

kga_status kga_search(const kga_graph* train, const kga_graph* eval, const char* pairs,
                      unsigned workers, uint64_t seed, int pretty, char** report) {
  return guarded([&] {
    require(train, "train");
    require(eval, "eval");
    require(pairs, "pairs");
    require(report, "report");
    const Vocabulary vocab(eval->graph->labels());
    const auto records = read_pair_records(pairs, &vocab);
    const auto result =
        evaluate_search(*train->graph, *eval->graph, records, workers, smatch_options(seed));
    *report = dup_string(pretty ? to_table(result) : to_json(result));
  });
}

kga_status kga_smatch_files(const kga_graph* vocab_graph, const char* pred, const char* gold,
                            uint64_t seed, char** report) {
  return guarded([&] {
    require(pred, "pred");
    require(gold, "gold");
    require(report, "report");
    std::optional<Vocabulary> vocab;
    if (vocab_graph) vocab.emplace(vocab_graph->graph->labels());
    const auto result =
        smatch_files(pred, gold, vocab ? &*vocab : nullptr, smatch_options(seed));
    *report = dup_string(to_json(result));
  });
}

kga_status kga_env_create(const kga_graph* train, kga_env** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    *out = new kga_env{std::make_shared<const RewardEnvironment>(train->graph)};
  });
}

kga_status kga_env_score_line(const kga_env* env, const char* line, unsigned workers,
                              char** response) {
  return guarded([&] {
    require(env, "env");
    require(line, "line");
    require(response, "response");
    *response = dup_string(env->env->handle_line(line, workers));
  });
}

kga_status kga_env_serve(const kga_env* env, const char* listen, unsigned workers) {
  return guarded([&] {
    require(env, "env");
    require(listen, "listen");
    if (std::string_view(listen) == "-") {
      serve_stream(*env->env, std::cin, std::cout, workers);
      return;
    }
    EnvServer server(env->env, workers);
    server.start(listen);
    std::cerr << nlohmann::json{{"listening", server.address()}}.dump() << std::endl;
    server.wait();
  });
}

void kga_env_free(kga_env* env) { delete env; }

}  // extern "C"
