#include "kgabduct/smatch.hpp"

#include <algorithm>
#include <set>

#include "kgabduct/error.hpp"
#include "kgabduct/rng.hpp"

namespace kgabduct {

namespace {

using Op = HypothesisTerm::Op;

class ViewBuilder {
 public:
  AmrView build(const HypothesisTerm& root) {
    view_.num_variables = 1;
    view_.triples.push_back({AmrTripleKind::kInstance, "instance", 0, 0});
    visit(root, 0, "");
    std::sort(view_.triples.begin(), view_.triples.end());
    view_.triples.erase(std::unique(view_.triples.begin(), view_.triples.end()),
                        view_.triples.end());
    return std::move(view_);
  }

 private:
  void visit(const HypothesisTerm& t, std::uint32_t var, const std::string& marker) {
    switch (t.op) {
      case Op::kAnchor:
        throw Error(ErrorKind::kInvalidArgument, "anchor cannot be the target");
      case Op::kProject: {
        const auto& child = t.children.front();
        const std::string label = marker + std::to_string(t.id);
        if (child.op == Op::kAnchor) {
          view_.triples.push_back({AmrTripleKind::kAttribute, label, var, child.id});
          return;
        }
        const auto fresh = static_cast<std::uint32_t>(view_.num_variables++);
        view_.triples.push_back({AmrTripleKind::kInstance, "instance", fresh, 0});
        view_.triples.push_back({AmrTripleKind::kRelation, label, var, fresh});
        visit(child, fresh, "");
        return;
      }
      case Op::kIntersect:
        for (const auto& c : t.children) visit(c, var, marker);
        return;
      case Op::kUnite:
        for (const auto& c : t.children) visit(c, var, "or:" + marker);
        return;
      case Op::kNegate:
        visit(t.children.front(), var, "not:" + marker);
        return;
    }
  }

  AmrView view_;
};

class MappingSearch {
 public:
  MappingSearch(const AmrView& pred, const AmrView& gold)
      : pred_(pred), gold_(gold), gold_set_(gold.triples.begin(), gold.triples.end()) {}

  std::size_t score(const std::vector<int>& m) const {
    std::size_t count = 0;
    for (const auto& t : pred_.triples) {
      const int src = m[t.source];
      if (src < 0) continue;
      AmrTriple image = t;
      image.source = static_cast<std::uint32_t>(src);
      if (t.kind == AmrTripleKind::kRelation) {
        const int dst = m[t.target];
        if (dst < 0) continue;
        image.target = static_cast<std::uint32_t>(dst);
      }
      count += gold_set_.count(image);
    }
    return count;
  }

  // Maps each pred variable to a free gold variable sharing an attribute
  // triple, if any.
  std::vector<int> attribute_start() const {
    std::vector<int> m(pred_.num_variables, -1);
    std::vector<bool> used(gold_.num_variables, false);
    for (const auto& t : pred_.triples) {
      if (t.kind != AmrTripleKind::kAttribute || m[t.source] >= 0) continue;
      for (const auto& g : gold_.triples) {
        if (g.kind == AmrTripleKind::kAttribute && g.label == t.label && g.target == t.target &&
            !used[g.source]) {
          m[t.source] = static_cast<int>(g.source);
          used[g.source] = true;
          break;
        }
      }
    }
    fill_randomly(m, used, nullptr);
    return m;
  }

  std::vector<int> random_start(Rng& rng) const {
    std::vector<int> m(pred_.num_variables, -1);
    std::vector<bool> used(gold_.num_variables, false);
    fill_randomly(m, used, &rng);
    return m;
  }

  // Steepest ascent over reassignments (to a free gold variable or to
  // nothing) and swaps.
  std::size_t climb(std::vector<int>& m) const {
    std::size_t best = score(m);
    while (true) {
      std::vector<int> best_move;
      std::size_t best_gain = best;
      std::vector<bool> used(gold_.num_variables, false);
      for (int g : m) {
        if (g >= 0) used[static_cast<std::size_t>(g)] = true;
      }
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (int g = -1; g < static_cast<int>(gold_.num_variables); ++g) {
          if (g == m[i] || (g >= 0 && used[static_cast<std::size_t>(g)])) continue;
          std::vector<int> candidate = m;
          candidate[i] = g;
          if (auto s = score(candidate); s > best_gain) {
            best_gain = s;
            best_move = std::move(candidate);
          }
        }
        for (std::size_t j = i + 1; j < m.size(); ++j) {
          if (m[i] == m[j]) continue;
          std::vector<int> candidate = m;
          std::swap(candidate[i], candidate[j]);
          if (auto s = score(candidate); s > best_gain) {
            best_gain = s;
            best_move = std::move(candidate);
          }
        }
      }
      if (best_move.empty()) return best;
      m = std::move(best_move);
      best = best_gain;
    }
  }

 private:
  void fill_randomly(std::vector<int>& m, std::vector<bool>& used, Rng* rng) const {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] >= 0) continue;
      std::vector<int> free;
      for (std::size_t g = 0; g < used.size(); ++g) {
        if (!used[g]) free.push_back(static_cast<int>(g));
      }
      if (free.empty()) return;
      const int pick = rng ? free[rng->below(free.size())] : free.front();
      m[i] = pick;
      used[static_cast<std::size_t>(pick)] = true;
    }
  }

  const AmrView& pred_;
  const AmrView& gold_;
  std::set<AmrTriple> gold_set_;
};

}  // namespace

AmrView to_amr_view(const HypothesisGraph& h) {
  if (auto violations = validate(h); !violations.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "invalid hypothesis: " + violations.front().message);
  }
  return ViewBuilder().build(to_term(h));
}

std::size_t matched_triples(const AmrView& pred, const AmrView& gold,
                            const std::vector<int>& mapping) {
  if (mapping.size() != pred.num_variables) {
    throw Error(ErrorKind::kInvalidArgument, "mapping size differs from variable count");
  }
  return MappingSearch(pred, gold).score(mapping);
}

SmatchResult smatch(const AmrView& pred, const AmrView& gold, const SmatchOptions& options) {
  MappingSearch search(pred, gold);
  Rng rng(options.seed);

  std::vector<int> best = search.attribute_start();
  std::size_t best_score = search.climb(best);
  for (std::size_t r = 0; r < options.random_restarts; ++r) {
    std::vector<int> m = search.random_start(rng);
    const std::size_t s = search.climb(m);
    if (s > best_score) {
      best_score = s;
      best = std::move(m);
    }
  }

  SmatchResult out;
  out.matched = best_score;
  out.pred_triples = pred.triples.size();
  out.gold_triples = gold.triples.size();
  out.mapping = std::move(best);
  if (out.pred_triples) out.precision = double(out.matched) / double(out.pred_triples);
  if (out.gold_triples) out.recall = double(out.matched) / double(out.gold_triples);
  if (out.pred_triples + out.gold_triples) {
    out.f1 = 2.0 * double(out.matched) / double(out.pred_triples + out.gold_triples);
  }
  return out;
}

SmatchResult smatch(const HypothesisGraph& pred, const HypothesisGraph& gold,
                    const SmatchOptions& options) {
  return smatch(to_amr_view(pred), to_amr_view(gold), options);
}

double smatch_score(const HypothesisGraph& pred, const HypothesisGraph& gold,
                    const SmatchOptions& options) {
  return smatch(pred, gold, options).f1;
}

}  // namespace kgabduct
