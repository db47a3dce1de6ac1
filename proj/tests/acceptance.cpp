// Acceptance checks, one status line per criterion. BLOCKED marks a check
// that needs data the environment does not provide; it is reported, never
// counted as a pass. The process fails only on FAIL.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <string>
#include <unordered_set>

#include "kgabduct/env.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/evaluation.hpp"
#include "kgabduct/executor.hpp"
#include "kgabduct/sampler.hpp"
#include "kgabduct/search.hpp"
#include "kgabduct/smatch.hpp"
#include "kgabduct/tokenizer.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace kgabduct;
using namespace kgabduct::term;

namespace {

enum class Status { kPass, kFail, kBlocked };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// Published sizes of FB15k-237.
constexpr std::size_t kEntities = 14'505;
constexpr std::size_t kRelations = 237;
constexpr std::size_t kEdges = 620'158;
constexpr std::array<std::size_t, 3> kSplit = {496'126, 62'016, 62'016};

bool within_one(const std::array<std::size_t, 3>& got) {
  for (std::size_t i = 0; i < 3; ++i) {
    const auto diff = got[i] > kSplit[i] ? got[i] - kSplit[i] : kSplit[i] - got[i];
    if (diff > 1) return false;
  }
  return true;
}

std::array<std::size_t, 3> part_sizes(const GraphSplit& s) {
  return {s.partitions[0].size(), s.partitions[1].size(), s.partitions[2].size()};
}

Outcome dataset_counts() {
  // Full-size arithmetic on a synthetic graph with the same edge count,
  // written to disk and loaded through the regular path.
  test_support::TempDir dir;
  const auto file = dir.path() / "synthetic.tsv";
  {
    Rng rng(1);
    std::unordered_set<std::uint64_t> seen;
    std::ofstream out(file);
    while (seen.size() < kEdges) {
      const auto h = rng.below(kEntities), r = rng.below(kRelations), t = rng.below(kEntities);
      if (!seen.insert((h * kRelations + r) * kEntities + t).second) continue;
      out << 'e' << h << "\tr" << r << "\te" << t << '\n';
    }
  }
  auto start = Clock::now();
  const auto synthetic = load_triples(file, TripleFormat::kLabelTsv);
  const auto split = split_edges(synthetic, {}, 0);
  const double synthetic_time = seconds_since(start);
  const bool arithmetic = synthetic.num_edges() == kEdges && part_sizes(split) == kSplit &&
                          synthetic_time < 60.0;
  std::string detail = fmt("synthetic %zu edges -> %zu/%zu/%zu in %.1fs", synthetic.num_edges(),
                           split.partitions[0].size(), split.partitions[1].size(),
                           split.partitions[2].size(), synthetic_time);
  if (!arithmetic) return {Status::kFail, detail};

  const char* path = std::getenv("KGABDUCT_FB15K237");
  if (!path || !*path) {
    return {Status::kBlocked,
            detail + "; dataset not available (set KGABDUCT_FB15K237 to a triple file)"};
  }
  start = Clock::now();
  const auto g = load_triples(path, TripleFormat::kLabelTsv);
  const auto real = split_edges(g, {}, 0);
  const double t = seconds_since(start);
  const bool ok = g.num_entities() == kEntities && g.num_relations() == kRelations &&
                  g.num_edges() == kEdges && within_one(part_sizes(real)) && t < 60.0;
  return {ok ? Status::kPass : Status::kFail,
          detail + fmt("; dataset %zu/%zu/%zu, split %zu/%zu/%zu in %.1fs", g.num_entities(),
                       g.num_relations(), g.num_edges(), real.partitions[0].size(),
                       real.partitions[1].size(), real.partitions[2].size(), t)};
}

const std::string kBrandedPhoneJson =
    R"({"pattern":"3in","nodes":[{"id":0,"kind":"target"},{"id":1,"kind":"variable"},)"
    R"({"id":2,"kind":"variable"},{"id":3,"kind":"anchor","entity":0},)"
    R"({"id":4,"kind":"variable"},{"id":5,"kind":"anchor","entity":1},)"
    R"({"id":6,"kind":"variable"},{"id":7,"kind":"variable"},)"
    R"({"id":8,"kind":"anchor","entity":2}],"edges":[)"
    R"({"child":1,"parent":0,"label":"intersection"},)"
    R"({"child":2,"parent":1,"label":"intersection"},)"
    R"({"child":3,"parent":2,"label":"projection","relation":0},)"
    R"({"child":4,"parent":1,"label":"intersection"},)"
    R"({"child":5,"parent":4,"label":"projection","relation":1},)"
    R"({"child":6,"parent":0,"label":"intersection"},)"
    R"({"child":7,"parent":6,"label":"negation"},)"
    R"({"child":8,"parent":7,"label":"projection","relation":2}]})";

Outcome tokenizer_round_trip() {
  const auto start = Clock::now();
  Rng rng(2);
  const auto g = oracle::random_graph(rng, 500, 20, 6000);
  const Vocabulary vocab(g.labels());
  std::size_t passed = 0, total = 0;
  for (std::size_t i = 0; i < 10'000; ++i) {
    const Pattern p = kAllPatterns[i % kAllPatterns.size()];
    const auto h = ground_type(g, p, rng).hypothesis;
    const auto tokens = to_tokens(hypothesis_to_actions(h), vocab);
    const auto back = tokens_to_hypothesis(tokens, vocab);
    ++total;
    if (back.ok() && oracle::label_isomorphic(*back.hypothesis, h) &&
        back.hypothesis->pattern == p) {
      ++passed;
    }
  }

  const GraphLabels labels({"Apple", "2010", "Phone"}, {"Brand", "Release", "Type"});
  const Vocabulary small(labels);
  const std::vector<std::string> seq = {"[I]", "[I]", "[Brand]", "[Apple]", "[Release]",
                                        "[2010]", "[N]", "[Type]", "[Phone]"};
  const auto parsed = tokens_to_hypothesis(seq, small);
  const bool example = parsed.ok() && to_canonical_json(*parsed.hypothesis) == kBrandedPhoneJson;
  const double t = seconds_since(start);
  const bool ok = passed == total && example && t < 60.0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%zu/%zu isomorphic over 13 patterns; branded-phone sequence JSON %s; %.1fs", passed,
              total, example ? "byte-equal" : "DIFFERS", t)};
}

Outcome executor_oracle() {
  const auto start = Clock::now();
  Rng rng(3);
  std::size_t agree = 0, total = 0, nonempty = 0;
  for (Pattern p : kAllPatterns) {
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 5 + rng.below(46), m = 1 + rng.below(4);
      const auto g = oracle::random_graph(rng, n, m, n + rng.below(3 * n));
      HypothesisTerm t;
      bool grounded = false;
      if (i % 2 == 0) {
        try {
          t = to_term(ground_type(g, p, rng).hypothesis);
          grounded = true;
        } catch (const Error&) {
        }
      }
      if (!grounded) t = oracle::random_fill(pattern_template(p), rng, n, m);
      const auto h = make_hypothesis(t);
      const auto fast = conclusion(h, g);
      const auto brute = brute_force_conclusion(h, g, 200'000);
      ++total;
      nonempty += !fast.empty();
      if (fast == brute && brute == oracle::Satisfaction(g).answers(t)) ++agree;
    }
  }
  const double t = seconds_since(start);
  const bool ok = agree == total && t < 300.0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%zu/%zu equal (%zu nonempty), graphs <= 50 entities; %.1fs", agree, total, nonempty,
              t)};
}

GraphSplit toy_split() {
  Rng rng(4);
  const auto g = oracle::random_graph(rng, 80, 5, 700);
  return split_edges(g, {}, 4);
}

Outcome sampler_soundness() {
  const auto start = Clock::now();
  Rng rng(5);
  const auto g = oracle::random_graph(rng, 400, 12, 4000);
  std::size_t sound = 0, total = 0;
  for (std::size_t i = 0; i < 10'000; ++i) {
    const Pattern p = kAllPatterns[i % kAllPatterns.size()];
    const auto s = sample_pair(g, p, rng);
    ++total;
    const bool seeded = std::binary_search(s.observation.begin(), s.observation.end(), s.seed);
    if (seeded && !s.observation.empty() && s.observation.size() <= 32 &&
        s.observation == conclusion(s.hypothesis, g)) {
      ++sound;
    }
  }

  const auto split = toy_split();
  const auto data = sample_split_datasets(split, kAllPatterns, {20, 20, 20}, 6, 4);
  std::size_t grown = 0, checked = 0;
  for (std::size_t part = 1; part < 3; ++part) {
    const auto& before_graph = split.graph(static_cast<SplitPart>(part - 1));
    const auto& after_graph = split.graph(static_cast<SplitPart>(part));
    for (const auto& s : data.samples[part]) {
      ++checked;
      const auto before = conclusion(s.hypothesis, before_graph);
      const auto after = conclusion(s.hypothesis, after_graph);
      if (after == s.observation && after.size() > before.size() &&
          std::includes(after.begin(), after.end(), before.begin(), before.end())) {
        ++grown;
      }
    }
  }
  const double t = seconds_since(start);
  const bool ok = sound == total && grown == checked && checked > 0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%zu/%zu sound; growth %zu/%zu on toy split (%zu short-pattern warnings); %.1fs",
              sound, total, grown, checked, data.warnings.size(), t)};
}

Outcome smatch_checks() {
  const auto start = Clock::now();
  Rng rng(7);
  const auto g = oracle::random_graph(rng, 300, 10, 3000);
  std::size_t self = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto h = ground_type(g, kAllPatterns[i % kAllPatterns.size()], rng).hypothesis;
    self += smatch_score(h, h) == 1.0;
  }
  const double two_1p =
      smatch_score(make_hypothesis(project(0, anchor(0))), make_hypothesis(project(1, anchor(1))));

  SmatchOptions options;
  options.seed = 42;
  std::size_t optimal = 0, compared = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto a = to_amr_view(make_hypothesis(oracle::random_fill(
        pattern_template(kAllPatterns[rng.below(13)]), rng, 3, 2)));
    const auto b = to_amr_view(make_hypothesis(oracle::random_fill(
        pattern_template(kAllPatterns[rng.below(13)]), rng, 3, 2)));
    if (a.num_variables > 3 || b.num_variables > 3) continue;
    ++compared;
    optimal += smatch(a, b, options).matched == oracle::exhaustive_best(a, b);
  }
  const double t = seconds_since(start);
  const bool ok = self == 1000 && two_1p == 0.5 && optimal == compared && compared > 0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("self 1.0 on %zu/1000; two distinct 1p = %.3f; hill-climb optimal %zu/%zu; %.1fs",
              self, two_1p, optimal, compared, t)};
}

Outcome one_hop_optimality() {
  const auto start = Clock::now();
  Rng rng(8);
  std::size_t ok_count = 0, total = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 4 + rng.below(30);
    const auto g = oracle::random_graph(rng, n, 1 + rng.below(5), n + rng.below(4 * n));
    std::vector<EntityId> ids;
    for (std::size_t k = 0, m = 1 + rng.below(6); k < m; ++k) {
      ids.push_back(static_cast<EntityId>(rng.below(n)));
    }
    const auto obs = make_entity_set(ids);
    const auto found = one_hop_search(obs, g);
    const oracle::Satisfaction fol(g);
    double best = -1;
    for (const auto& e : g.edges()) {
      if (std::binary_search(obs.begin(), obs.end(), e.tail)) {
        best = std::max(best, jaccard(fol.answers(project(e.relation, anchor(e.head))), obs));
      }
    }
    ++total;
    if (best < 0 ? !found.has_value()
                 : found && jaccard(conclusion(found->hypothesis, g), obs) >= best) {
      ++ok_count;
    }
  }
  std::string detail = fmt("no better candidate on %zu/%zu toy instances; %.1fs", ok_count, total,
                           seconds_since(start));

  // Optional full-data comparison; reported but never decides the status.
  if (const char* path = std::getenv("KGABDUCT_FB15K237"); path && *path) {
    const auto g = load_triples(path, TripleFormat::kLabelTsv);
    const auto split = split_edges(g, {}, 0);
    const std::array<Pattern, 1> only = {Pattern::k1p};
    const auto data = sample_split_datasets(split, only, {0, 0, 2000}, 0, 8);
    std::vector<PairRecord> records;
    for (const auto& s : data.samples[2]) {
      records.push_back({Pattern::k1p, s.hypothesis, s.observation, std::nullopt});
    }
    const auto report = evaluate_search(split.train, split.test, records, 8);
    detail += fmt("; full-data 1p test Jaccard %.3f (reference 0.980, non-blocking)",
                  report.mean_jaccard);
  } else {
    detail += "; full-data 1p run skipped (non-blocking)";
  }
  return {ok_count == total ? Status::kPass : Status::kFail, detail};
}

Outcome env_purity() {
  const auto start = Clock::now();
  Rng rng(9);
  auto g = std::make_shared<const KnowledgeGraph>(oracle::random_graph(rng, 200, 8, 1500));
  const RewardEnvironment env(g);
  const auto& vocab = env.vocabulary();

  std::vector<RewardRequest> requests;
  std::vector<bool> meant_valid;
  for (std::int64_t i = 0; i < 1000; ++i) {
    const auto s = sample_pair(*g, kAllPatterns[rng.below(13)], rng);
    auto tokens = to_tokens(hypothesis_to_actions(s.hypothesis), vocab);
    std::vector<EntityId> obs(s.observation.begin(), s.observation.end());
    obs.push_back(static_cast<EntityId>(rng.below(200)));
    bool valid = true;
    switch (i % 5) {
      case 1: tokens.pop_back(); valid = false; break;
      case 2: tokens.push_back(tokens.back()); valid = false; break;
      case 3:
        for (auto& tok : tokens) tok = vocab.token(static_cast<TokenId>(rng.below(vocab.size())));
        valid = tokens_to_hypothesis(tokens, vocab).ok();
        break;
      case 4:
        if (i % 10 == 4) {
          obs.clear();
          valid = false;
        }
        break;
      default: break;
    }
    requests.push_back({i, obs, tokens});
    meant_valid.push_back(valid);
  }

  std::size_t faithful = 0;
  const auto first = env.score_batch(requests, 4);
  const auto second = env.score_batch(requests, 1);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = first[i];
    bool ok = to_json(r) == to_json(second[i]) && to_json(r) == to_json(env.score(requests[i]));
    if (meant_valid[i]) {
      const auto parsed = tokens_to_hypothesis(requests[i].actions, vocab);
      const auto answers = conclusion(*parsed.hypothesis, *g);
      ok = ok && r.valid && r.reward == jaccard(answers, make_entity_set(requests[i].observation)) &&
           r.conclusion_size == answers.size();
    } else {
      ok = ok && !r.valid && r.reward == 0.0 && r.error.has_value();
    }
    faithful += ok;
  }
  const double t = seconds_since(start);
  return {faithful == requests.size() ? Status::kPass : Status::kFail,
          fmt("%zu/%zu responses identical across repeats and equal to direct computation; %.1fs",
              faithful, requests.size(), t)};
}

const char* label(Status s) {
  switch (s) {
    case Status::kPass: return "PASS";
    case Status::kFail: return "FAIL";
    case Status::kBlocked: return "BLOCKED";
  }
  return "?";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"dataset counts and 8:1:1 split", dataset_counts},
      {"tokenizer round trip", tokenizer_round_trip},
      {"executor equals brute force", executor_oracle},
      {"sampler soundness and growth", sampler_soundness},
      {"smatch", smatch_checks},
      {"one-hop search optimality", one_hop_optimality},
      {"reward environment purity", env_purity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {Status::kFail, std::string("threw: ") + e.what()};
    }
    failures += out.status == Status::kFail;
    std::printf("criterion %zu %-7s %s: %s\n", i + 1, label(out.status), criteria[i].first,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
