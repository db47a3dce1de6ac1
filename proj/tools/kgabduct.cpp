// Command-line front end. Talks to the library only through the C API.
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgabduct/kgabduct.h"

namespace {

constexpr int kUsageExit = 64;

struct Failure {
  kga_status status;
  std::string message;
};

void check(kga_status status) {
  if (status != KGA_OK) throw Failure{status, kga_last_error()};
}

struct GraphDeleter {
  void operator()(kga_graph* g) const { kga_graph_free(g); }
};
struct SplitDeleter {
  void operator()(kga_split* s) const { kga_split_free(s); }
};
struct EnvDeleter {
  void operator()(kga_env* e) const { kga_env_free(e); }
};
struct StringDeleter {
  void operator()(char* s) const { kga_string_free(s); }
};

using GraphPtr = std::unique_ptr<kga_graph, GraphDeleter>;
using SplitPtr = std::unique_ptr<kga_split, SplitDeleter>;
using EnvPtr = std::unique_ptr<kga_env, EnvDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

GraphPtr open_graph(const std::string& ref) {
  kga_graph* g = nullptr;
  check(kga_graph_open(ref.c_str(), &g));
  return GraphPtr(g);
}

void print(char* raw) {
  StringPtr text(raw);
  std::string s(text.get());
  if (s.empty() || s.back() != '\n') s += '\n';
  std::fwrite(s.data(), 1, s.size(), stdout);
}

void report_error(const std::string& kind, const std::string& message) {
  nlohmann::json doc{{"error", kind}, {"message", message}};
  std::cerr << doc.dump() << std::endl;
}

// --flag-name -> KGABDUCT_FLAG_NAME
std::string env_name(std::string flag) {
  std::string out = "KGABDUCT_";
  for (char c : flag) {
    out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name));
}

struct Common {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool pretty = false;
};

void add_common(CLI::App* app, Common& c, bool with_pretty) {
  flag(app, "seed", c.seed, "random seed")->capture_default_str();
  flag(app, "workers", c.workers, "worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  if (with_pretty) {
    app->add_flag("--pretty", c.pretty, "human-readable table")->envname("KGABDUCT_PRETTY");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abductive hypothesis tooling for knowledge graphs"};
  app.require_subcommand(1);

  Common common;

  std::string split_in, split_out, split_format = "label";
  std::vector<std::uint32_t> ratios{8, 1, 1};
  auto* split = app.add_subcommand("split", "split a triple file into train/valid/test edges");
  flag(split, "in", split_in, "triple file")->required();
  flag(split, "out", split_out, "output directory")->required();
  flag(split, "format", split_format, "label or id")
      ->check(CLI::IsMember({"label", "id"}))
      ->capture_default_str();
  flag(split, "ratios", ratios, "train valid test weights")->expected(3)->delimiter(',');
  add_common(split, common, false);

  std::string sample_graph, sample_out, sample_patterns = "all";
  std::size_t count = 0, max_observation = 32;
  std::optional<std::size_t> valid_count, test_count;
  auto* sample = app.add_subcommand("sample", "sample hypothesis/observation pairs");
  flag(sample, "graph", sample_graph, "split directory")->required();
  flag(sample, "out", sample_out, "output directory (default <graph>/pairs)");
  flag(sample, "patterns", sample_patterns, "all or comma list")->capture_default_str();
  flag(sample, "count", count, "pairs per pattern and split")->required();
  flag(sample, "valid-count", valid_count, "pairs per pattern for valid");
  flag(sample, "test-count", test_count, "pairs per pattern for test");
  flag(sample, "max-observation", max_observation, "largest observation kept")
      ->capture_default_str();
  add_common(sample, common, false);

  std::string eval_pred, eval_graph;
  auto* evaluate = app.add_subcommand("evaluate", "score predicted action sequences");
  flag(evaluate, "pred", eval_pred, "predictions jsonl")->required();
  flag(evaluate, "graph", eval_graph, "graph reference, e.g. splits/test")->required();
  add_common(evaluate, common, true);

  std::string search_pairs, search_graph, search_eval = "test";
  auto* search = app.add_subcommand("search", "one-hop search baseline");
  flag(search, "pairs", search_pairs, "pairs jsonl")->required();
  flag(search, "graph", search_graph, "split directory")->required();
  flag(search, "eval-split", search_eval, "graph the found hypotheses are scored on")
      ->check(CLI::IsMember({"train", "valid", "test"}))
      ->capture_default_str();
  add_common(search, common, true);

  std::string serve_graph, serve_listen;
  auto* serve = app.add_subcommand("serve-env", "serve rewards over a stream socket");
  flag(serve, "graph", serve_graph, "training graph (split directory or file)")->required();
  flag(serve, "listen", serve_listen, "unix:/path, host:port, or - for stdio")->required();
  add_common(serve, common, false);

  std::string sm_pred, sm_gold, sm_graph;
  auto* smatch = app.add_subcommand("smatch", "Smatch between paired hypothesis files");
  flag(smatch, "pred", sm_pred, "predicted jsonl")->required();
  flag(smatch, "gold", sm_gold, "gold jsonl")->required();
  flag(smatch, "graph", sm_graph, "graph for token vocabularies");
  add_common(smatch, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kUsageExit;
  }

  try {
    if (*split) {
      kga_graph* raw = nullptr;
      check(kga_graph_load(split_in.c_str(),
                           split_format == "id" ? KGA_FORMAT_ID_TSV : KGA_FORMAT_LABEL_TSV, &raw));
      GraphPtr graph(raw);
      kga_split* s = nullptr;
      check(kga_split_edges(graph.get(), ratios[0], ratios[1], ratios[2], common.seed, &s));
      SplitPtr parts(s);
      check(kga_split_write(parts.get(), split_out.c_str()));
      std::size_t counts[3];
      kga_split_counts(parts.get(), counts);
      nlohmann::ordered_json doc;
      doc["out"] = split_out;
      doc["seed"] = common.seed;
      doc["entities"] = kga_graph_num_entities(graph.get());
      doc["relations"] = kga_graph_num_relations(graph.get());
      doc["edges"] = kga_graph_num_edges(graph.get());
      doc["counts"] = {{"train", counts[0]}, {"valid", counts[1]}, {"test", counts[2]}};
      std::cout << doc.dump() << '\n';
    } else if (*sample) {
      kga_split* s = nullptr;
      check(kga_split_read(sample_graph.c_str(), &s));
      SplitPtr parts(s);
      if (sample_out.empty()) sample_out = sample_graph + "/pairs";
      const std::size_t counts[3] = {count, valid_count.value_or(count),
                                     test_count.value_or(count)};
      char* report = nullptr;
      check(kga_sample(parts.get(), sample_patterns.c_str(), counts, common.seed, common.workers,
                       max_observation, sample_out.c_str(), &report));
      print(report);
    } else if (*evaluate) {
      GraphPtr graph = open_graph(eval_graph);
      char* report = nullptr;
      check(kga_evaluate(graph.get(), eval_pred.c_str(), common.workers, common.seed,
                         common.pretty, &report));
      print(report);
    } else if (*search) {
      kga_split* s = nullptr;
      check(kga_split_read(search_graph.c_str(), &s));
      SplitPtr parts(s);
      kga_graph* train = nullptr;
      kga_graph* eval = nullptr;
      check(kga_split_graph(parts.get(), "train", &train));
      GraphPtr train_graph(train);
      check(kga_split_graph(parts.get(), search_eval.c_str(), &eval));
      GraphPtr eval_graph_ptr(eval);
      char* report = nullptr;
      check(kga_search(train_graph.get(), eval_graph_ptr.get(), search_pairs.c_str(),
                       common.workers, common.seed, common.pretty, &report));
      print(report);
    } else if (*serve) {
      GraphPtr graph = open_graph(serve_graph);
      kga_env* e = nullptr;
      check(kga_env_create(graph.get(), &e));
      EnvPtr env(e);
      check(kga_env_serve(env.get(), serve_listen.c_str(), common.workers));
    } else if (*smatch) {
      GraphPtr graph;
      if (!sm_graph.empty()) graph = open_graph(sm_graph);
      char* report = nullptr;
      check(kga_smatch_files(graph.get(), sm_pred.c_str(), sm_gold.c_str(), common.seed,
                             &report));
      print(report);
    }
  } catch (const Failure& f) {
    report_error(kga_status_name(f.status), f.message);
    return static_cast<int>(f.status);
  }
  return 0;
}
