#include "kgabduct/evaluation.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/executor.hpp"
#include "kgabduct/search.hpp"

namespace kgabduct {

using json = nlohmann::json;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

std::optional<HypothesisGraph> parse_tokens(const json& tokens, const Vocabulary* vocab) {
  if (!vocab) throw Error(ErrorKind::kInvalidArgument, "token sequences need a graph vocabulary");
  const auto strings = tokens.get<std::vector<std::string>>();
  ParseOutcome parsed = tokens_to_hypothesis(strings, *vocab);
  if (!parsed.ok()) return std::nullopt;
  return std::move(parsed.hypothesis);
}

HypothesisGraph reference_from(const json& doc, const Vocabulary* vocab) {
  if (doc.contains("hypothesis")) {
    HypothesisGraph h = parse_hypothesis_json(doc["hypothesis"].dump());
    if (auto v = validate(h); !v.empty()) {
      throw Error(ErrorKind::kParse, "invalid reference hypothesis: " + v.front().message);
    }
    return h;
  }
  auto h = parse_tokens(doc.at("actions"), vocab);
  if (!h) throw Error(ErrorKind::kParse, "reference actions do not parse");
  return std::move(*h);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct Scored {
  Pattern pattern = Pattern::k1p;
  bool valid = false;
  double jaccard = 0;
  double smatch = 0;
};

EvaluationReport summarize(const std::vector<Scored>& scored) {
  std::array<PatternSummary, kAllPatterns.size()> buckets{};
  for (const auto& s : scored) {
    auto& b = buckets[static_cast<std::size_t>(s.pattern)];
    b.pattern = s.pattern;
    ++b.count;
    b.invalid += !s.valid;
    b.jaccard += s.jaccard;
    b.smatch += s.smatch;
  }
  EvaluationReport report;
  for (auto& b : buckets) {
    if (b.count == 0) continue;
    b.jaccard /= double(b.count);
    b.smatch /= double(b.count);
    report.total += b.count;
    report.invalid += b.invalid;
    report.mean_jaccard += b.jaccard;
    report.mean_smatch += b.smatch;
    report.patterns.push_back(b);
  }
  if (!report.patterns.empty()) {
    report.mean_jaccard /= double(report.patterns.size());
    report.mean_smatch /= double(report.patterns.size());
  }
  return report;
}

Pattern pattern_for(const PairRecord& r) {
  if (r.pattern) return *r.pattern;
  if (r.reference) return r.reference->pattern;
  throw Error(ErrorKind::kParse, "record has no pattern");
}

}  // namespace

PairRecord parse_pair_record(std::string_view line, const Vocabulary* vocab) {
  try {
    const json doc = json::parse(line);
    PairRecord r;
    if (doc.contains("pattern")) {
      r.pattern = parse_pattern(doc["pattern"].get<std::string>());
      if (!r.pattern) throw Error(ErrorKind::kParse, "unknown pattern");
    }
    if (doc.contains("hypothesis") || doc.contains("actions")) r.reference = reference_from(doc, vocab);
    r.observation = make_entity_set(doc.at("observation").get<std::vector<EntityId>>());
    if (doc.contains("prediction")) {
      r.prediction = doc["prediction"].get<std::vector<std::string>>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("pair record: ") + e.what());
  }
}

std::vector<PairRecord> read_pair_records(const std::filesystem::path& file,
                                          const Vocabulary* vocab) {
  std::vector<PairRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(file)) {
    ++line_no;
    try {
      out.push_back(parse_pair_record(line, vocab));
    } catch (const Error& e) {
      throw Error(e.kind(), file.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

EvaluationReport evaluate_predictions(const KnowledgeGraph& graph,
                                      const std::vector<PairRecord>& records, unsigned workers,
                                      const SmatchOptions& smatch) {
  const Vocabulary vocab(graph.labels());
  std::vector<Scored> scored(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) scored[i].pattern = pattern_for(records[i]);
  parallel_for(records.size(), workers, [&](std::size_t i) {
    const PairRecord& r = records[i];
    if (!r.prediction) return;
    ParseOutcome parsed = tokens_to_hypothesis(*r.prediction, vocab);
    if (!parsed.ok()) return;
    scored[i].valid = true;
    scored[i].jaccard = jaccard(conclusion(*parsed.hypothesis, graph), r.observation);
    if (r.reference) scored[i].smatch = smatch_score(*parsed.hypothesis, *r.reference, smatch);
  });
  return summarize(scored);
}

EvaluationReport evaluate_search(const KnowledgeGraph& train, const KnowledgeGraph& eval,
                                 const std::vector<PairRecord>& records, unsigned workers,
                                 const SmatchOptions& smatch) {
  std::vector<Scored> scored(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) scored[i].pattern = pattern_for(records[i]);
  parallel_for(records.size(), workers, [&](std::size_t i) {
    const PairRecord& r = records[i];
    if (r.observation.empty()) return;
    auto found = one_hop_search(r.observation, train);
    if (!found) return;
    scored[i].valid = true;
    scored[i].jaccard = jaccard(conclusion(found->hypothesis, eval), r.observation);
    if (r.reference) scored[i].smatch = smatch_score(found->hypothesis, *r.reference, smatch);
  });
  return summarize(scored);
}

std::string to_json(const EvaluationReport& report) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json patterns = nlohmann::ordered_json::object();
  for (const auto& p : report.patterns) {
    patterns[to_string(p.pattern)] = {{"count", p.count},
                                      {"invalid", p.invalid},
                                      {"jaccard", p.jaccard},
                                      {"smatch", p.smatch}};
  }
  doc["patterns"] = std::move(patterns);
  doc["total"] = report.total;
  doc["invalid"] = report.invalid;
  doc["mean_jaccard"] = report.mean_jaccard;
  doc["mean_smatch"] = report.mean_smatch;
  return doc.dump();
}

std::string to_table(const EvaluationReport& report) {
  std::string out = "pattern    count  invalid  jaccard  smatch\n";
  char buf[128];
  for (const auto& p : report.patterns) {
    std::snprintf(buf, sizeof(buf), "%-8s %7zu %8zu %8.3f %7.3f\n", to_string(p.pattern), p.count,
                  p.invalid, p.jaccard, p.smatch);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-8s %7zu %8zu %8.3f %7.3f\n", "ave.", report.total,
                report.invalid, report.mean_jaccard, report.mean_smatch);
  out += buf;
  return out;
}

SmatchPairReport smatch_files(const std::filesystem::path& pred, const std::filesystem::path& gold,
                              const Vocabulary* vocab, const SmatchOptions& options) {
  const auto pred_lines = read_lines(pred);
  const auto gold_lines = read_lines(gold);
  if (pred_lines.size() != gold_lines.size()) {
    throw Error(ErrorKind::kInvalidArgument, "pred and gold files differ in length");
  }
  SmatchPairReport report;
  for (std::size_t i = 0; i < pred_lines.size(); ++i) {
    try {
      const json p = json::parse(pred_lines[i]);
      const json g = json::parse(gold_lines[i]);
      const HypothesisGraph reference = reference_from(g, vocab);
      std::optional<HypothesisGraph> predicted;
      if (p.contains("prediction")) {
        predicted = parse_tokens(p["prediction"], vocab);
      } else if (p.contains("actions")) {
        predicted = parse_tokens(p["actions"], vocab);
      } else {
        HypothesisGraph h = parse_hypothesis_json(p.at("hypothesis").dump());
        if (validate(h).empty()) predicted = std::move(h);
      }
      report.scores.push_back(predicted ? smatch_score(*predicted, reference, options) : 0.0);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  for (double s : report.scores) report.mean += s;
  if (!report.scores.empty()) report.mean /= double(report.scores.size());
  return report;
}

std::string to_json(const SmatchPairReport& report) {
  json doc;
  doc["scores"] = report.scores;
  doc["mean"] = report.mean;
  return doc.dump();
}

}  // namespace kgabduct
