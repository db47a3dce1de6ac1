#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgabduct/graph.hpp"
#include "kgabduct/hypothesis.hpp"
#include "kgabduct/smatch.hpp"
#include "kgabduct/tokenizer.hpp"

namespace kgabduct {

// One line of a pair or prediction file. The reference comes from "actions"
// (token strings) or "hypothesis" (canonical JSON); "prediction" holds the
// generated tokens, if any.
struct PairRecord {
  std::optional<Pattern> pattern;
  std::optional<HypothesisGraph> reference;
  EntitySet observation;
  std::optional<std::vector<std::string>> prediction;
};

// `vocab` may be null when the line carries a "hypothesis" object.
PairRecord parse_pair_record(std::string_view line, const Vocabulary* vocab);
std::vector<PairRecord> read_pair_records(const std::filesystem::path& file,
                                          const Vocabulary* vocab);

struct PatternSummary {
  Pattern pattern = Pattern::k1p;
  std::size_t count = 0;
  std::size_t invalid = 0;  // unparseable predictions or no search result
  double jaccard = 0;       // mean
  double smatch = 0;        // mean
};

struct EvaluationReport {
  std::vector<PatternSummary> patterns;  // pattern order, present ones only
  std::size_t total = 0;
  std::size_t invalid = 0;
  double mean_jaccard = 0;  // mean of per-pattern means
  double mean_smatch = 0;
};

// Scores each record's prediction on `graph` against its observation, and
// against its reference with Smatch. Invalid predictions score 0 on both.
EvaluationReport evaluate_predictions(const KnowledgeGraph& graph,
                                      const std::vector<PairRecord>& records,
                                      unsigned workers = 1, const SmatchOptions& smatch = {});

// Runs the one-hop search on `train` for each observation and scores the
// found hypothesis on `eval`.
EvaluationReport evaluate_search(const KnowledgeGraph& train, const KnowledgeGraph& eval,
                                 const std::vector<PairRecord>& records, unsigned workers = 1,
                                 const SmatchOptions& smatch = {});

std::string to_json(const EvaluationReport& report);
std::string to_table(const EvaluationReport& report);

struct SmatchPairReport {
  std::vector<double> scores;
  double mean = 0;
};

// Pairs line i of `pred` with line i of `gold`. Pred lines use "prediction",
// then "actions", then "hypothesis"; an unparseable prediction scores 0.
SmatchPairReport smatch_files(const std::filesystem::path& pred,
                              const std::filesystem::path& gold, const Vocabulary* vocab,
                              const SmatchOptions& options = {});

std::string to_json(const SmatchPairReport& report);

}  // namespace kgabduct
