// Exercises the shared library through its C header only.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "kgabduct/kgabduct.h"
#include "support/temp_dir.hpp"

namespace {

std::string take(char* s) {
  std::string out(s);
  kga_string_free(s);
  return out;
}

void write_triples(const std::filesystem::path& file) {
  std::ofstream out(file);
  const char* names[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if ((i + 2 * j) % 3 == 0 && i != j) {
        out << names[i] << '\t' << (i % 2 ? "likes" : "knows") << '\t' << names[j] << '\n';
      }
    }
  }
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(kga_status_name(KGA_OK)) == "ok");
  CHECK(std::string(kga_status_name(KGA_ERR_PARSE)) == "parse");
  kga_graph* g = nullptr;
  CHECK(kga_graph_load("/nonexistent/triples.tsv", KGA_FORMAT_LABEL_TSV, &g) == KGA_ERR_IO);
  CHECK(g == nullptr);
  CHECK(std::string(kga_last_error()).find("/nonexistent") != std::string::npos);
  CHECK(kga_graph_open(nullptr, &g) == KGA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("split, sample, evaluate, search and smatch through the C API") {
  test_support::TempDir dir;
  write_triples(dir.path() / "t.tsv");

  kga_graph* g = nullptr;
  REQUIRE(kga_graph_load((dir.path() / "t.tsv").c_str(), KGA_FORMAT_LABEL_TSV, &g) == KGA_OK);
  CHECK(kga_graph_num_entities(g) == 8);
  CHECK(kga_graph_num_relations(g) == 2);
  const std::size_t edges = kga_graph_num_edges(g);

  kga_split* s = nullptr;
  REQUIRE(kga_split_edges(g, 8, 1, 1, 42, &s) == KGA_OK);
  std::size_t counts[3];
  kga_split_counts(s, counts);
  CHECK(counts[0] + counts[1] + counts[2] == edges);
  const auto split_dir = dir.path() / "split";
  REQUIRE(kga_split_write(s, split_dir.c_str()) == KGA_OK);
  kga_split_free(s);

  REQUIRE(kga_split_read(split_dir.c_str(), &s) == KGA_OK);
  const std::size_t wanted[3] = {5, 0, 0};
  char* report = nullptr;
  const auto pairs = dir.path() / "pairs";
  REQUIRE(kga_sample(s, "1p,2i", wanted, 3, 2, 32, pairs.c_str(), &report) == KGA_OK);
  const auto doc = nlohmann::json::parse(take(report));
  CHECK(doc["counts"]["train"] == 10);
  CHECK(std::filesystem::exists(pairs / "vocab.txt"));
  CHECK(std::filesystem::exists(pairs / "test.jsonl"));
  CHECK(kga_sample(s, "9z", wanted, 3, 1, 32, pairs.c_str(), &report) ==
        KGA_ERR_INVALID_ARGUMENT);

  kga_graph* train = nullptr;
  REQUIRE(kga_split_graph(s, "train", &train) == KGA_OK);
  CHECK(kga_graph_num_edges(train) == counts[0]);
  CHECK(kga_split_graph(s, "nope", &train) == KGA_ERR_INVALID_ARGUMENT);

  // Predictions equal to the references score 1 everywhere on train.
  {
    std::ifstream in(pairs / "train.jsonl");
    std::ofstream out(dir.path() / "pred.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      auto rec = nlohmann::json::parse(line);
      rec["prediction"] = rec["actions"];
      out << rec.dump() << '\n';
    }
  }
  REQUIRE(kga_evaluate(train, (dir.path() / "pred.jsonl").c_str(), 2, 0, 0, &report) == KGA_OK);
  const auto eval = nlohmann::json::parse(take(report));
  CHECK(eval["total"] == 10);
  CHECK(eval["mean_jaccard"] == 1.0);
  CHECK(eval["mean_smatch"] == 1.0);
  REQUIRE(kga_evaluate(train, (dir.path() / "pred.jsonl").c_str(), 1, 0, 1, &report) == KGA_OK);
  CHECK(take(report).find("ave.") != std::string::npos);

  REQUIRE(kga_search(train, train, (pairs / "train.jsonl").c_str(), 1, 0, 0, &report) == KGA_OK);
  CHECK(nlohmann::json::parse(take(report))["total"] == 10);

  REQUIRE(kga_smatch_files(train, (dir.path() / "pred.jsonl").c_str(),
                           (pairs / "train.jsonl").c_str(), 0, &report) == KGA_OK);
  CHECK(nlohmann::json::parse(take(report))["mean"] == 1.0);
  CHECK(kga_smatch_files(nullptr, (dir.path() / "pred.jsonl").c_str(),
                         (pairs / "train.jsonl").c_str(), 0, &report) ==
        KGA_ERR_INVALID_ARGUMENT);

  kga_env* env = nullptr;
  REQUIRE(kga_env_create(train, &env) == KGA_OK);
  {
    std::ifstream in(pairs / "train.jsonl");
    std::string line;
    std::getline(in, line);
    const auto rec = nlohmann::json::parse(line);
    const nlohmann::json req = {{"id", 1}, {"obs", rec["observation"]}, {"actions", rec["actions"]}};
    REQUIRE(kga_env_score_line(env, req.dump().c_str(), 1, &report) == KGA_OK);
    const auto resp = nlohmann::json::parse(take(report));
    CHECK(resp["valid"] == true);
    CHECK(resp["reward"] == 1.0);
  }
  CHECK(kga_env_serve(env, "no-such-host-xyz:1", 1) != KGA_OK);
  kga_env_free(env);

  kga_graph_free(train);
  kga_split_free(s);
  kga_graph_free(g);
}
