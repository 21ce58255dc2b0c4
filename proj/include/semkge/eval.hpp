#pragma once
// Link-prediction ranking (MRR, Hits@K, filtered or raw) and multi-label
// entity-typing classification (per-class and per-depth-level P/R/F1) over a
// frozen embedding table.
//
// Ranking is purely order-based: rank = 1 + |strictly higher| + floor(|equal
// ties| / 2), computed over all entities minus the filtered-out known-true
// candidates (the query's own answer is never filtered). Candidate scoring
// reuses the exact per-coordinate expressions of score(), so a naive
// reference loop over score() reproduces these ranks bit for bit.
//
// Entity typing trains one-vs-rest logistic probes with plain gradient
// descent on the frozen entity vectors (features standardized per split),
// picking the L2 strength from a fixed 3-value grid on the validation split.
// The probe is deliberately linear: it measures what the embedding encodes,
// not classifier capacity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "semkge/error.hpp"
#include "semkge/models.hpp"
#include "semkge/ontology.hpp"
#include "semkge/rng.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

// --- link prediction -----------------------------------------------------------

struct LpQuery {
  bool predict_tail = true;
  EntityId known = 0;   // head for tail queries, tail for head queries
  RelationId rel = 0;
  EntityId answer = 0;
};

// Known-true answers per (entity, relation) over train + valid + test.
class FilterIndex {
 public:
  explicit FilterIndex(const TripleStore& store) {
    for (const Triple& t : store.triples()) {
      tails_[key(t.head, t.relation)].push_back(t.tail);
      heads_[key(t.tail, t.relation)].push_back(t.head);
    }
    for (auto& [k, v] : tails_) dedupe(v);
    for (auto& [k, v] : heads_) dedupe(v);
  }

  std::span<const EntityId> known_answers(const LpQuery& q) const {
    const auto& index = q.predict_tail ? tails_ : heads_;
    const auto it = index.find(key(q.known, q.rel));
    if (it == index.end()) return {};
    return it->second;
  }

 private:
  static std::uint64_t key(EntityId e, RelationId r) {
    return (static_cast<std::uint64_t>(e) << 32) | r;
  }
  static void dedupe(std::vector<EntityId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
};

// Mean-rank tie policy over a full candidate score vector. `excluded` marks
// filtered-out candidates; the answer itself is always ranked.
inline std::uint64_t rank_from_scores(std::span<const double> scores, EntityId answer,
                                      std::span<const std::uint8_t> excluded) {
  const double target = scores[answer];
  std::uint64_t higher = 0, ties = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (e == answer || (!excluded.empty() && excluded[e])) continue;
    if (scores[e] > target) ++higher;
    else if (scores[e] == target) ++ties;
  }
  return 1 + higher + ties / 2;
}

// Scores every entity as the open slot of the query. Same arithmetic as
// score(), row swapped per candidate.
inline void score_candidates(const ModelKind& model, const EmbeddingTable& table, const LpQuery& q,
                             std::span<double> out) {
  detail::check_dtype(model, table);
  const std::size_t dim = table.dim();
  const double* known = table.entity_row(q.known);
  const double* rel = table.relation_row(q.rel);
  for (EntityId e = 0; e < table.num_entities(); ++e) {
    const double* cand = table.entity_row(e);
    out[e] = q.predict_tail ? score_rows(model, known, rel, cand, dim)
                            : score_rows(model, cand, rel, known, dim);
  }
}

// Rank of the true entity for one query; pass filter = nullptr for the raw
// setting. `scores` and `excluded` are caller-provided scratch of size |E|.
inline std::uint64_t rank_query(const ModelKind& model, const EmbeddingTable& table,
                                const LpQuery& q, const FilterIndex* filter,
                                std::vector<double>& scores, std::vector<std::uint8_t>& excluded) {
  scores.resize(table.num_entities());
  score_candidates(model, table, q, scores);
  if (!filter) {
    return rank_from_scores(scores, q.answer, {});
  }
  excluded.assign(table.num_entities(), 0);
  for (EntityId e : filter->known_answers(q)) excluded[e] = 1;
  excluded[q.answer] = 0;
  return rank_from_scores(scores, q.answer, excluded);
}

inline std::uint64_t rank_query(const ModelKind& model, const EmbeddingTable& table,
                                const LpQuery& q, const FilterIndex* filter) {
  std::vector<double> scores;
  std::vector<std::uint8_t> excluded;
  return rank_query(model, table, q, filter, scores, excluded);
}

struct EvalReport {
  double mrr = 0.0;
  std::map<std::uint32_t, double> hits_at;  // K in {1, 3, 10}
  std::uint64_t query_count = 0;
  bool filtered = true;

  struct RelationRow {
    RelationId relation;
    std::uint64_t queries = 0;
    double mrr = 0.0;
    double hits10 = 0.0;
  };
  std::vector<RelationRow> per_relation;  // by relation id
};

// Both head and tail queries for every test triple (tail first), fixed query
// order regardless of thread count.
inline EvalReport eval_lp(const ModelKind& model, const EmbeddingTable& table,
                          const TripleStore& store, bool filtered, unsigned threads = 0) {
  if (store.test().size() == 0) fail(Errc::invalid_argument, "test split is empty");
  if (table.num_entities() != store.num_entities() ||
      table.num_relations() != store.num_relations())
    fail(Errc::dim_mismatch, "embedding table does not match the dataset dictionaries");

  const std::size_t n_test = store.test().size();
  const Triple* test = store.triples().data() + store.test().begin;
  std::unique_ptr<FilterIndex> filter;
  if (filtered) filter = std::make_unique<FilterIndex>(store);

  std::vector<std::uint64_t> ranks(2 * n_test, 0);
  if (threads == 0) threads = std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_test)));

  auto run_chunk = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scores;
    std::vector<std::uint8_t> excluded;
    for (std::size_t i = lo; i < hi; ++i) {
      const Triple& t = test[i];
      const LpQuery tail_q{true, t.head, t.relation, t.tail};
      const LpQuery head_q{false, t.tail, t.relation, t.head};
      ranks[2 * i] = rank_query(model, table, tail_q, filter.get(), scores, excluded);
      ranks[2 * i + 1] = rank_query(model, table, head_q, filter.get(), scores, excluded);
    }
  };
  if (threads == 1) {
    run_chunk(0, n_test);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_test + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(n_test, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_chunk, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.filtered = filtered;
  report.query_count = ranks.size();
  const std::uint32_t ks[] = {1, 3, 10};
  std::map<std::uint32_t, std::uint64_t> hit_counts{{1, 0}, {3, 0}, {10, 0}};
  double mrr_sum = 0.0;
  std::unordered_map<RelationId, std::pair<std::uint64_t, std::pair<double, std::uint64_t>>> rel;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::uint64_t r = ranks[i];
    mrr_sum += 1.0 / static_cast<double>(r);
    for (std::uint32_t k : ks)
      if (r <= k) ++hit_counts[k];
    auto& row = rel[test[i / 2].relation];
    row.first += 1;
    row.second.first += 1.0 / static_cast<double>(r);
    if (r <= 10) row.second.second += 1;
  }
  const double n_q = static_cast<double>(ranks.size());
  report.mrr = mrr_sum / n_q;
  for (std::uint32_t k : ks) report.hits_at[k] = static_cast<double>(hit_counts[k]) / n_q;
  for (auto& [r, row] : rel) {
    report.per_relation.push_back({r, row.first,
                                   row.second.first / static_cast<double>(row.first),
                                   static_cast<double>(row.second.second) / row.first});
  }
  std::sort(report.per_relation.begin(), report.per_relation.end(),
            [](const auto& a, const auto& b) { return a.relation < b.relation; });
  return report;
}

// --- entity typing -------------------------------------------------------------

struct TypingReport {
  struct ClassRow {
    ClassId id;
    std::uint32_t depth = 0;
    std::uint64_t positives = 0;  // closure positives among labeled entities
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
  };
  struct LevelRow {
    std::uint32_t depth = 0;
    std::uint64_t classes = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;  // macro averages
  };
  std::vector<ClassRow> per_class;
  std::vector<LevelRow> per_level;
  double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
  std::vector<ClassId> skipped;  // < 10 positives
  std::uint64_t labeled_entities = 0;
};

namespace detail {

struct TypingSplit {
  std::vector<EntityId> train, valid, test;
};

// 80/10/10 over labeled entities, approximately stratified: classes are
// processed rarest first and each distributes its still-unassigned positives
// to fill that class's test and valid quotas before train.
inline TypingSplit split_entities(const ClassHierarchy& h, const ClassStats& stats,
                                  std::span<const std::vector<ClassId>> closure_of,
                                  std::span<const EntityId> labeled, std::uint64_t seed) {
  enum : std::uint8_t { kNone, kTrain, kValid, kTest };
  std::vector<std::uint8_t> bucket(h.num_entities(), kNone);

  std::vector<ClassId> class_order;
  for (ClassId c = 0; c < h.num_classes(); ++c)
    if (stats.closure_count[c] > 0) class_order.push_back(c);
  std::sort(class_order.begin(), class_order.end(), [&](ClassId a, ClassId b) {
    if (stats.closure_count[a] != stats.closure_count[b])
      return stats.closure_count[a] < stats.closure_count[b];
    return a < b;
  });

  std::vector<std::vector<EntityId>> members(h.num_classes());
  for (EntityId e : labeled)
    for (ClassId c : closure_of[e]) members[c].push_back(e);

  for (ClassId c : class_order) {
    const auto& all = members[c];
    const std::size_t total = all.size();
    const std::size_t want_test = total / 10;
    const std::size_t want_valid = total / 10;
    std::size_t have_test = 0, have_valid = 0;
    std::vector<EntityId> free;
    for (EntityId e : all) {
      switch (bucket[e]) {
        case kTest: ++have_test; break;
        case kValid: ++have_valid; break;
        case kNone: free.push_back(e); break;
        default: break;
      }
    }
    Rng rng(seed, 0x7970ull ^ c);  // per-class stream
    shuffle(free, rng);
    for (EntityId e : free) {
      if (have_test < want_test) {
        bucket[e] = kTest;
        ++have_test;
      } else if (have_valid < want_valid) {
        bucket[e] = kValid;
        ++have_valid;
      } else {
        bucket[e] = kTrain;
      }
    }
  }

  TypingSplit split;
  for (EntityId e : labeled) {
    switch (bucket[e]) {
      case kTrain: split.train.push_back(e); break;
      case kValid: split.valid.push_back(e); break;
      case kTest: split.test.push_back(e); break;
      default: break;
    }
  }
  return split;
}

// Plain full-batch gradient descent on the logistic loss; features are the
// caller's standardized rows plus an implicit bias.
class LogisticProbe {
 public:
  LogisticProbe(std::size_t dim, double l2) : weights_(dim, 0.0), bias_(0.0), l2_(l2) {}

  void fit(std::span<const double> features, std::span<const std::uint8_t> labels, std::size_t n,
           std::size_t dim, int iterations, double lr) {
    std::vector<double> grad(dim);
    for (int it = 0; it < iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_bias = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* x = features.data() + i * dim;
        double z = bias_;
        for (std::size_t j = 0; j < dim; ++j) z += weights_[j] * x[j];
        const double err = sigmoid(z) - static_cast<double>(labels[i]);
        for (std::size_t j = 0; j < dim; ++j) grad[j] += err * x[j];
        grad_bias += err;
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < dim; ++j)
        weights_[j] -= lr * (grad[j] * inv_n + l2_ * weights_[j]);
      bias_ -= lr * grad_bias * inv_n;
    }
  }

  bool predict(const double* x, std::size_t dim) const {
    double z = bias_;
    for (std::size_t j = 0; j < dim; ++j) z += weights_[j] * x[j];
    return z >= 0.0;  // sigmoid(z) >= 0.5
  }

 private:
  std::vector<double> weights_;
  double bias_;
  double l2_;
};

}  // namespace detail

// One-vs-rest probes per class with >= 10 positives; positives are closure
// memberships (an entity asserted Writer counts for Person too). Metrics are
// computed on the held-out test entities.
inline TypingReport eval_typing(const EmbeddingTable& table, const ClassHierarchy& hierarchy,
                                const ClassStats& stats, std::uint64_t split_seed) {
  if (table.num_entities() < hierarchy.num_entities())
    fail(Errc::dim_mismatch, "embedding table smaller than the typed entity set");
  const std::size_t width = table.row_width();

  // per-entity type closure and the labeled subset
  std::vector<std::vector<ClassId>> closure_of(hierarchy.num_entities());
  std::vector<EntityId> labeled;
  {
    std::vector<std::uint32_t> stamp(hierarchy.num_classes(), 0);
    std::uint32_t now = 0;
    std::vector<ClassId> stack;
    for (EntityId e = 0; e < hierarchy.num_entities(); ++e) {
      const auto types = hierarchy.types_of(e);
      if (types.empty()) continue;
      labeled.push_back(e);
      ++now;
      stack.assign(types.begin(), types.end());
      while (!stack.empty()) {
        const ClassId c = stack.back();
        stack.pop_back();
        if (stamp[c] == now) continue;
        stamp[c] = now;
        closure_of[e].push_back(c);
        for (ClassId p : hierarchy.parents(c)) stack.push_back(p);
      }
      std::sort(closure_of[e].begin(), closure_of[e].end());
    }
  }
  if (labeled.empty()) fail(Errc::invalid_argument, "no entity has a type assertion");

  TypingReport report;
  report.labeled_entities = labeled.size();

  detail::TypingSplit split =
      detail::split_entities(hierarchy, stats, closure_of, labeled, split_seed);

  // standardize features on the training entities
  std::vector<double> mean(width, 0.0), scale(width, 1.0);
  for (EntityId e : split.train) {
    const double* row = table.entity_row(e);
    for (std::size_t j = 0; j < width; ++j) mean[j] += row[j];
  }
  for (std::size_t j = 0; j < width; ++j) mean[j] /= static_cast<double>(split.train.size());
  for (EntityId e : split.train) {
    const double* row = table.entity_row(e);
    for (std::size_t j = 0; j < width; ++j) {
      const double d = row[j] - mean[j];
      scale[j] += d * d;  // +1 prior keeps constants harmless
    }
  }
  for (std::size_t j = 0; j < width; ++j)
    scale[j] = 1.0 / std::sqrt(scale[j] / static_cast<double>(split.train.size()));

  auto standardized = [&](std::span<const EntityId> entities) {
    std::vector<double> out(entities.size() * width);
    for (std::size_t i = 0; i < entities.size(); ++i) {
      const double* row = table.entity_row(entities[i]);
      for (std::size_t j = 0; j < width; ++j) out[i * width + j] = (row[j] - mean[j]) * scale[j];
    }
    return out;
  };
  const std::vector<double> x_train = standardized(split.train);
  const std::vector<double> x_valid = standardized(split.valid);
  const std::vector<double> x_test = standardized(split.test);

  auto labels_for = [&](ClassId c, std::span<const EntityId> entities) {
    std::vector<std::uint8_t> y(entities.size(), 0);
    for (std::size_t i = 0; i < entities.size(); ++i) {
      const auto& cl = closure_of[entities[i]];
      y[i] = std::binary_search(cl.begin(), cl.end(), c) ? 1 : 0;
    }
    return y;
  };

  constexpr double kL2Grid[3] = {1e-4, 1e-2, 1.0};
  constexpr int kIterations = 200;
  constexpr double kLearningRate = 0.5;

  std::uint64_t micro_tp = 0, micro_fp = 0, micro_fn = 0;
  for (ClassId c = 0; c < hierarchy.num_classes(); ++c) {
    if (stats.closure_count[c] == 0) continue;
    if (stats.closure_count[c] < 10) {
      report.skipped.push_back(c);
      continue;
    }
    const std::vector<std::uint8_t> y_train = labels_for(c, split.train);
    const std::vector<std::uint8_t> y_valid = labels_for(c, split.valid);
    const std::vector<std::uint8_t> y_test = labels_for(c, split.test);

    auto f1_of = [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
      const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
      const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
      return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    };

    detail::LogisticProbe best(width, kL2Grid[0]);
    double best_f1 = -1.0;
    for (double l2 : kL2Grid) {
      detail::LogisticProbe probe(width, l2);
      probe.fit(x_train, y_train, split.train.size(), width, kIterations, kLearningRate);
      std::uint64_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < split.valid.size(); ++i) {
        const bool pred = probe.predict(x_valid.data() + i * width, width);
        if (pred && y_valid[i]) ++tp;
        else if (pred) ++fp;
        else if (y_valid[i]) ++fn;
      }
      const double f1 = f1_of(tp, fp, fn);
      if (f1 > best_f1) {
        best_f1 = f1;
        best = std::move(probe);
      }
    }

    TypingReport::ClassRow row;
    row.id = c;
    row.depth = stats.depth[c];
    row.positives = stats.closure_count[c];
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      const bool pred = best.predict(x_test.data() + i * width, width);
      if (pred && y_test[i]) ++row.tp;
      else if (pred) ++row.fp;
      else if (y_test[i]) ++row.fn;
    }
    row.precision = row.tp + row.fp == 0 ? 0.0 : static_cast<double>(row.tp) / (row.tp + row.fp);
    row.recall = row.tp + row.fn == 0 ? 0.0 : static_cast<double>(row.tp) / (row.tp + row.fn);
    row.f1 = row.precision + row.recall == 0.0
                 ? 0.0
                 : 2.0 * row.precision * row.recall / (row.precision + row.recall);
    micro_tp += row.tp;
    micro_fp += row.fp;
    micro_fn += row.fn;
    report.per_class.push_back(row);
  }

  // per-depth-level macro averages
  std::map<std::uint32_t, std::vector<const TypingReport::ClassRow*>> by_level;
  for (const auto& row : report.per_class) by_level[row.depth].push_back(&row);
  for (const auto& [depth, rows] : by_level) {
    TypingReport::LevelRow lr;
    lr.depth = depth;
    lr.classes = rows.size();
    for (const auto* r : rows) {
      lr.precision += r->precision;
      lr.recall += r->recall;
      lr.f1 += r->f1;
    }
    lr.precision /= static_cast<double>(rows.size());
    lr.recall /= static_cast<double>(rows.size());
    lr.f1 /= static_cast<double>(rows.size());
    report.per_level.push_back(lr);
  }

  report.micro_precision =
      micro_tp + micro_fp == 0 ? 0.0 : static_cast<double>(micro_tp) / (micro_tp + micro_fp);
  report.micro_recall =
      micro_tp + micro_fn == 0 ? 0.0 : static_cast<double>(micro_tp) / (micro_tp + micro_fn);
  report.micro_f1 = report.micro_precision + report.micro_recall == 0.0
                        ? 0.0
                        : 2.0 * report.micro_precision * report.micro_recall /
                              (report.micro_precision + report.micro_recall);
  return report;
}

}  // namespace semkge
