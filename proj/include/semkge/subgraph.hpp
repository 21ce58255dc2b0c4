#pragma once
// Budget-constrained subgraph selection over the training split: pick
// floor(p * |train|) triples for a target class, against a seeded random
// baseline. The semantic strategy ranks every training triple once by
//   priority 0: head or tail carries the target class in its type closure
//   priority 1: within `hops` BFS hops of any priority-0 entity (undirected)
//   priority 2: everything else, by descending head-entity degree
// with triple index as the final key, and takes the first floor(p * |train|)
// entries. Because the ranking is a fixed total order, selections are nested
// across increasing budgets. No randomness is involved.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "semkge/error.hpp"
#include "semkge/ontology.hpp"
#include "semkge/rng.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

struct SelectionBudget {
  double p = 1.0;                 // fraction of the training split, (0, 1]
  ClassId target_class = kNoClass;
  std::uint32_t hops = 0;
};

namespace detail {

inline std::size_t budget_size(double p, std::size_t n_train) {
  if (!(p > 0.0) || p > 1.0) fail(Errc::invalid_argument, "p must be in (0, 1]");
  return static_cast<std::size_t>(p * static_cast<double>(n_train));
}

}  // namespace detail

// floor(p * |train|) training-triple indices, uniform without replacement,
// seeded; returned sorted ascending.
inline std::vector<std::uint32_t> select_random(const TripleStore& store, double p,
                                                std::uint64_t seed) {
  const std::size_t n = store.train().size();
  const std::size_t m = detail::budget_size(p, n);
  std::vector<std::uint32_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0u);
  Rng rng(seed);
  // partial Fisher-Yates: the first m slots end up uniform without replacement
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.next_below(n - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(m);
  std::sort(indices.begin(), indices.end());
  return indices;
}

inline std::vector<std::uint32_t> select_semantic(const TripleStore& store,
                                                  const ClassHierarchy& hierarchy,
                                                  const SelectionBudget& budget) {
  const std::size_t n = store.train().size();
  const std::size_t m = detail::budget_size(budget.p, n);
  if (m == 0) fail(Errc::empty_budget, "budget selects zero triples");
  hierarchy.check_class(budget.target_class);

  // Entities whose type closure contains the target class: a type c hits iff
  // c is the target or a (transitive) subclass of it, so walk the children
  // relation down from the target once.
  std::vector<std::uint8_t> is_target(store.num_entities(), 0);
  {
    std::vector<std::vector<ClassId>> children(hierarchy.num_classes());
    for (ClassId c = 0; c < hierarchy.num_classes(); ++c)
      for (ClassId p : hierarchy.parents(c)) children[p].push_back(c);
    std::vector<std::uint8_t> class_hits(hierarchy.num_classes(), 0);
    std::vector<ClassId> stack{budget.target_class};
    class_hits[budget.target_class] = 1;
    while (!stack.empty()) {
      const ClassId c = stack.back();
      stack.pop_back();
      for (ClassId child : children[c]) {
        if (!class_hits[child]) {
          class_hits[child] = 1;
          stack.push_back(child);
        }
      }
    }
    for (EntityId e = 0; e < store.num_entities(); ++e) {
      for (ClassId c : hierarchy.types_of(e)) {
        if (class_hits[c]) {
          is_target[e] = 1;
          break;
        }
      }
    }
  }
  if (std::find(is_target.begin(), is_target.end(), std::uint8_t(1)) == is_target.end())
    fail(Errc::invalid_argument, "target class has no entities");

  const Triple* train = store.triples().data() + store.train().begin;

  // undirected adjacency over training triples (CSR over entities)
  std::vector<std::uint32_t> degree(store.num_entities(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++degree[train[i].head];
    ++degree[train[i].tail];
  }
  std::vector<std::size_t> offsets(store.num_entities() + 1, 0);
  for (std::size_t e = 0; e < store.num_entities(); ++e) offsets[e + 1] = offsets[e] + degree[e];
  std::vector<EntityId> adjacency(offsets.back());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      adjacency[cursor[train[i].head]++] = train[i].tail;
      adjacency[cursor[train[i].tail]++] = train[i].head;
    }
  }

  // priority-0 triples and their entities
  constexpr std::uint32_t kUnreached = 0xffffffffu;
  std::vector<std::uint32_t> dist(store.num_entities(), kUnreached);
  std::vector<std::uint8_t> priority(n, 2);
  std::vector<EntityId> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_target[train[i].head] || is_target[train[i].tail]) {
      priority[i] = 0;
      for (EntityId e : {train[i].head, train[i].tail}) {
        if (dist[e] == kUnreached) {
          dist[e] = 0;
          frontier.push_back(e);
        }
      }
    }
  }

  // BFS out to `hops` from the priority-0 entities
  std::uint32_t level = 0;
  while (!frontier.empty() && level < budget.hops) {
    std::vector<EntityId> next;
    for (EntityId e : frontier) {
      for (std::size_t a = offsets[e]; a < offsets[e + 1]; ++a) {
        const EntityId nb = adjacency[a];
        if (dist[nb] == kUnreached) {
          dist[nb] = level + 1;
          next.push_back(nb);
        }
      }
    }
    frontier = std::move(next);
    ++level;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (priority[i] != 0) {
      const std::uint32_t d =
          std::min(dist[train[i].head], dist[train[i].tail]);
      if (d <= budget.hops) priority[i] = 1;
    }
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (priority[a] != priority[b]) return priority[a] < priority[b];
    if (priority[a] == 2 && degree[train[a].head] != degree[train[b].head])
      return degree[train[a].head] > degree[train[b].head];
    return a < b;
  });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace semkge
