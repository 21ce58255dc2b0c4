#pragma once
// Partition plans over the training split. Semantic plans group triples by
// the lowest (most specific) class of the head entity and then coalesce
// whole classes greedily until the requested partition count is reached;
// random plans assign triples uniformly with the pinned generator. Plans are
// immutable once built and shared read-only by training workers.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "semkge/error.hpp"
#include "semkge/ontology.hpp"
#include "semkge/rng.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

enum class PartitionStrategy { semantic, random };

inline const char* strategy_name(PartitionStrategy s) {
  return s == PartitionStrategy::semantic ? "semantic" : "random";
}

struct PartitionMeta {
  std::string label;            // dominant member class, or "⊥" for untyped heads
  std::uint64_t size = 0;       // triple count
  std::vector<ClassId> classes; // member classes after coalescing (sorted)
};

struct PartitionPlan {
  PartitionStrategy strategy = PartitionStrategy::random;
  std::uint32_t num_partitions = 0;
  std::vector<std::uint32_t> assignment;  // train-triple index -> partition id
  std::vector<PartitionMeta> meta;        // one entry per partition id
};

// Exactly-once coverage, dense ids, no empty partition.
inline void validate_plan(const PartitionPlan& plan, const TripleStore& store) {
  if (plan.assignment.size() != store.train().size())
    fail(Errc::invalid_argument, "plan does not cover the training split");
  if (plan.num_partitions == 0) fail(Errc::invalid_argument, "plan has no partitions");
  std::vector<std::uint64_t> seen(plan.num_partitions, 0);
  for (std::uint32_t p : plan.assignment) {
    if (p >= plan.num_partitions) fail(Errc::invalid_argument, "partition id out of range");
    ++seen[p];
  }
  for (std::uint32_t p = 0; p < plan.num_partitions; ++p) {
    if (seen[p] == 0)
      fail(Errc::invalid_argument, "partition " + std::to_string(p) + " is empty");
    if (plan.meta.size() == plan.num_partitions && plan.meta[p].size != seen[p])
      fail(Errc::invalid_argument, "partition meta size mismatch at " + std::to_string(p));
  }
}

namespace detail {

// Group key used for deterministic ordering; the untyped catch-all sorts last.
inline constexpr std::uint64_t kBottomKey = 0xffffffffull;

struct ClassGroup {
  std::uint64_t key;              // smallest member class id, or kBottomKey
  std::uint64_t size = 0;
  std::vector<ClassId> classes;   // empty for the pure catch-all group
  std::vector<std::pair<ClassId, std::uint64_t>> contributions;  // class -> triple count
};

}  // namespace detail

// Assigns every training triple to the partition of lowest_class(head entity);
// entities without assertions land in the catch-all group. Groups are then
// merged greedily, smallest into the currently smallest remaining, until
// exactly target_k partitions are left. Final partitions are ordered by size
// descending (ties by smallest member class id).
inline PartitionPlan partition_semantic(const TripleStore& store, const ClassHierarchy& hierarchy,
                                        const ClassStats& stats, std::uint32_t target_k,
                                        bool by_tail = false) {
  if (target_k < 1) fail(Errc::invalid_argument, "target_k must be >= 1");
  const std::size_t n_train = store.train().size();
  const std::vector<ClassId> lowest = lowest_classes(hierarchy, stats);

  // class of each training triple (kNoClass = catch-all)
  std::vector<ClassId> triple_class(n_train, kNoClass);
  for (std::size_t i = 0; i < n_train; ++i) {
    const Triple& t = store.triples()[store.train().begin + i];
    const EntityId anchor = by_tail ? t.tail : t.head;
    triple_class[i] = anchor < lowest.size() ? lowest[anchor] : kNoClass;
  }

  // occupied classes -> dense group index
  std::vector<std::uint64_t> class_count(hierarchy.num_classes() + 1, 0);
  for (ClassId c : triple_class) ++class_count[c == kNoClass ? hierarchy.num_classes() : c];
  std::vector<detail::ClassGroup> groups;
  std::vector<std::uint32_t> group_of_class(hierarchy.num_classes() + 1, 0);
  for (std::size_t c = 0; c <= hierarchy.num_classes(); ++c) {
    if (class_count[c] == 0) continue;
    detail::ClassGroup g;
    const bool bottom = c == hierarchy.num_classes();
    g.key = bottom ? detail::kBottomKey : c;
    g.size = class_count[c];
    if (!bottom) g.classes.push_back(static_cast<ClassId>(c));
    g.contributions.push_back({bottom ? kNoClass : static_cast<ClassId>(c), class_count[c]});
    group_of_class[c] = static_cast<std::uint32_t>(groups.size());
    groups.push_back(std::move(g));
  }

  if (target_k > groups.size()) {
    fail(Errc::too_many_partitions, "requested " + std::to_string(target_k) +
                                        " partitions but only " + std::to_string(groups.size()) +
                                        " occupied classes are available");
  }

  // Greedy coalescing over (size, key) order.
  std::vector<std::uint32_t> alive(groups.size());
  std::iota(alive.begin(), alive.end(), 0u);
  std::vector<std::uint32_t> redirect(groups.size());
  std::iota(redirect.begin(), redirect.end(), 0u);
  auto order = [&](std::uint32_t a, std::uint32_t b) {
    if (groups[a].size != groups[b].size) return groups[a].size < groups[b].size;
    return groups[a].key < groups[b].key;
  };
  while (alive.size() > target_k) {
    std::sort(alive.begin(), alive.end(), order);
    const std::uint32_t smallest = alive[0];
    const std::uint32_t absorber = alive[1];
    groups[absorber].size += groups[smallest].size;
    groups[absorber].classes.insert(groups[absorber].classes.end(),
                                    groups[smallest].classes.begin(),
                                    groups[smallest].classes.end());
    groups[absorber].contributions.insert(groups[absorber].contributions.end(),
                                          groups[smallest].contributions.begin(),
                                          groups[smallest].contributions.end());
    groups[absorber].key = std::min(groups[absorber].key, groups[smallest].key);
    redirect[smallest] = absorber;
    alive.erase(alive.begin());
  }
  auto resolve = [&](std::uint32_t g) {
    while (redirect[g] != g) g = redirect[g];
    return g;
  };

  // Final partition ids: size descending, ties by key ascending.
  std::sort(alive.begin(), alive.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (groups[a].size != groups[b].size) return groups[a].size > groups[b].size;
    return groups[a].key < groups[b].key;
  });
  std::vector<std::uint32_t> partition_of_group(groups.size(), 0);
  for (std::uint32_t p = 0; p < alive.size(); ++p) partition_of_group[alive[p]] = p;

  PartitionPlan plan;
  plan.strategy = PartitionStrategy::semantic;
  plan.num_partitions = static_cast<std::uint32_t>(alive.size());
  plan.assignment.resize(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    const std::size_t c = triple_class[i] == kNoClass ? hierarchy.num_classes() : triple_class[i];
    plan.assignment[i] = partition_of_group[resolve(group_of_class[c])];
  }
  plan.meta.resize(plan.num_partitions);
  for (std::uint32_t p = 0; p < plan.num_partitions; ++p) {
    detail::ClassGroup& g = groups[alive[p]];
    PartitionMeta& m = plan.meta[p];
    m.size = g.size;
    std::sort(g.classes.begin(), g.classes.end());
    m.classes = g.classes;
    // dominant contributor names the partition
    auto best = std::max_element(g.contributions.begin(), g.contributions.end(),
                                 [](const auto& a, const auto& b) {
                                   if (a.second != b.second) return a.second < b.second;
                                   return a.first > b.first;
                                 });
    m.label = best->first == kNoClass ? "⊥" : hierarchy.classes().at(best->first);
  }
  validate_plan(plan, store);
  return plan;
}

// Uniform seeded assignment; identical seed gives an identical plan.
inline PartitionPlan partition_random(const TripleStore& store, std::uint32_t k,
                                      std::uint64_t seed) {
  const std::size_t n_train = store.train().size();
  if (k < 1 || k > n_train)
    fail(Errc::invalid_argument, "k must be in [1, |train|], got " + std::to_string(k));
  PartitionPlan plan;
  plan.strategy = PartitionStrategy::random;
  plan.num_partitions = k;
  plan.assignment.resize(n_train);
  Rng rng(seed);
  std::vector<std::uint64_t> sizes(k, 0);
  for (std::size_t i = 0; i < n_train; ++i) {
    const std::uint32_t p = static_cast<std::uint32_t>(rng.next_below(k));
    plan.assignment[i] = p;
    ++sizes[p];
  }
  // Uniform draws can leave a partition empty when k is close to |train|;
  // repair deterministically by stealing the lowest-index triple of the
  // currently largest partition.
  for (std::uint32_t p = 0; p < k; ++p) {
    if (sizes[p] != 0) continue;
    const std::uint32_t donor = static_cast<std::uint32_t>(std::distance(
        sizes.begin(), std::max_element(sizes.begin(), sizes.end())));
    for (std::size_t i = 0; i < n_train; ++i) {
      if (plan.assignment[i] == donor) {
        plan.assignment[i] = p;
        --sizes[donor];
        ++sizes[p];
        break;
      }
    }
  }
  plan.meta.resize(k);
  for (std::uint32_t p = 0; p < k; ++p) {
    plan.meta[p].label = "random-" + std::to_string(p);
    plan.meta[p].size = sizes[p];
  }
  validate_plan(plan, store);
  return plan;
}

struct PlanStats {
  std::vector<std::uint64_t> sizes;
  double balance = 0.0;         // max size / mean size
  double entity_overlap = 0.0;  // fraction of train entities seen in > 1 partition
};

inline PlanStats plan_stats(const PartitionPlan& plan, const TripleStore& store) {
  validate_plan(plan, store);
  PlanStats s;
  s.sizes.assign(plan.num_partitions, 0);
  for (std::uint32_t p : plan.assignment) ++s.sizes[p];
  const double mean = static_cast<double>(plan.assignment.size()) / plan.num_partitions;
  s.balance = static_cast<double>(*std::max_element(s.sizes.begin(), s.sizes.end())) / mean;

  // first partition an entity appears in; kNoPart sentinel, then flag on second
  constexpr std::uint32_t kUnseen = 0xffffffffu;
  constexpr std::uint32_t kMulti = 0xfffffffeu;
  std::vector<std::uint32_t> first(store.num_entities(), kUnseen);
  std::uint64_t touched = 0, multi = 0;
  auto visit = [&](EntityId e, std::uint32_t p) {
    if (first[e] == kUnseen) {
      first[e] = p;
      ++touched;
    } else if (first[e] != kMulti && first[e] != p) {
      first[e] = kMulti;
      ++multi;
    }
  };
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    const Triple& t = store.triples()[store.train().begin + i];
    visit(t.head, plan.assignment[i]);
    visit(t.tail, plan.assignment[i]);
  }
  s.entity_overlap = touched == 0 ? 0.0 : static_cast<double>(multi) / touched;
  return s;
}

}  // namespace semkge
