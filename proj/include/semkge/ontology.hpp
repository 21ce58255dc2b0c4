#pragma once
// Class hierarchy reasoning over subClassOf edges: ancestor closure, class
// depth (longest path from a root, so deeper = more specific), closure-counted
// class frequencies, and most-specific ("lowest") class assignment per entity.
// The hierarchy is a DAG; multi-inheritance is allowed, cycles are rejected
// at build time. Immutable after build; concurrent reads are safe.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semkge/error.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

using ClassId = std::uint32_t;
inline constexpr ClassId kNoClass = 0xffffffffu;

class ClassHierarchy {
 public:
  const Dictionary& classes() const { return class_dict_; }
  std::size_t num_classes() const { return class_dict_.size(); }

  std::span<const ClassId> parents(ClassId c) const {
    check_class(c);
    return parents_[c];
  }

  // Direct assertions for one entity, sorted, duplicates removed.
  std::span<const ClassId> types_of(EntityId e) const {
    if (e >= entity_types_.size()) return {};
    return entity_types_[e];
  }

  std::size_t num_entities() const { return entity_types_.size(); }

  // Assertions whose entity string did not resolve through the entity
  // dictionary; counted and skipped at build time.
  std::size_t skipped_assertions() const { return skipped_assertions_; }

  void check_class(ClassId c) const {
    if (c >= parents_.size())
      fail(Errc::out_of_range, "class id " + std::to_string(c) + " out of range");
  }

  friend ClassHierarchy build_hierarchy(std::span<const std::pair<std::string, std::string>>,
                                        std::span<const std::pair<std::string, std::string>>,
                                        const Dictionary&);

 private:
  Dictionary class_dict_;
  std::vector<std::vector<ClassId>> parents_;       // direct superclasses
  std::vector<std::vector<ClassId>> entity_types_;  // per entity id
  std::size_t skipped_assertions_ = 0;
};

// Builds the hierarchy from (entity, class) assertions and (sub, super)
// edges. Class ids are assigned in first-appearance order scanning edges
// first, then assertions. Cycles among class edges are a hard error naming
// one member of the cycle.
inline ClassHierarchy build_hierarchy(
    std::span<const std::pair<std::string, std::string>> assertions,
    std::span<const std::pair<std::string, std::string>> edges, const Dictionary& entity_dict) {
  ClassHierarchy h;
  for (const auto& [sub, super] : edges) {
    if (sub == super) fail(Errc::self_subclass, "class is its own subclass: " + sub);
    const ClassId s = h.class_dict_.get_or_add(sub);
    const ClassId p = h.class_dict_.get_or_add(super);
    h.parents_.resize(h.class_dict_.size());
    h.parents_[s].push_back(p);
  }
  for (const auto& [entity, cls] : assertions) {
    h.class_dict_.get_or_add(cls);
  }
  h.parents_.resize(h.class_dict_.size());
  for (auto& ps : h.parents_) {
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  }

  // Cycle check: iterative three-color DFS over the parent relation.
  {
    const std::size_t n = h.parents_.size();
    std::vector<std::uint8_t> color(n, 0);  // 0 white, 1 on stack, 2 done
    for (ClassId start = 0; start < n; ++start) {
      if (color[start] != 0) continue;
      std::vector<std::pair<ClassId, std::size_t>> stack{{start, 0}};
      color[start] = 1;
      while (!stack.empty()) {
        auto& [c, next] = stack.back();
        if (next < h.parents_[c].size()) {
          const ClassId p = h.parents_[c][next++];
          if (color[p] == 1) {
            fail(Errc::cyclic_hierarchy,
                 "subclass hierarchy contains a cycle through " + h.class_dict_.at(p));
          }
          if (color[p] == 0) {
            color[p] = 1;
            stack.emplace_back(p, 0);
          }
        } else {
          color[c] = 2;
          stack.pop_back();
        }
      }
    }
  }

  h.entity_types_.resize(entity_dict.size());
  for (const auto& [entity, cls] : assertions) {
    const auto e = entity_dict.find(entity);
    if (!e) {
      ++h.skipped_assertions_;
      continue;
    }
    h.entity_types_[*e].push_back(*h.class_dict_.find(cls));
  }
  for (auto& ts : h.entity_types_) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }
  return h;
}

// Transitive closure over parents, excluding c itself; sorted ascending.
inline std::vector<ClassId> ancestors(const ClassHierarchy& h, ClassId c) {
  h.check_class(c);
  std::vector<ClassId> out;
  std::vector<std::uint8_t> seen(h.num_classes(), 0);
  std::vector<ClassId> stack(h.parents(c).begin(), h.parents(c).end());
  while (!stack.empty()) {
    const ClassId p = stack.back();
    stack.pop_back();
    if (seen[p]) continue;
    seen[p] = 1;
    out.push_back(p);
    for (ClassId q : h.parents(p)) stack.push_back(q);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Longest-path distance from any root (class with no parents); roots are 0.
inline std::vector<std::uint32_t> class_depths(const ClassHierarchy& h) {
  const std::size_t n = h.num_classes();
  std::vector<std::uint32_t> depth(n, 0);
  std::vector<std::uint32_t> pending(n, 0);
  for (ClassId c = 0; c < n; ++c) pending[c] = static_cast<std::uint32_t>(h.parents(c).size());
  // Kahn order over "child depends on parents"; children index is derived.
  std::vector<std::vector<ClassId>> children(n);
  for (ClassId c = 0; c < n; ++c)
    for (ClassId p : h.parents(c)) children[p].push_back(c);
  std::vector<ClassId> queue;
  for (ClassId c = 0; c < n; ++c)
    if (pending[c] == 0) queue.push_back(c);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const ClassId p = queue[i];
    for (ClassId c : children[p]) {
      depth[c] = std::max(depth[c], depth[p] + 1);
      if (--pending[c] == 0) queue.push_back(c);
    }
  }
  return depth;
}

inline std::uint32_t class_depth(const ClassHierarchy& h, ClassId c) {
  h.check_class(c);
  return class_depths(h)[c];
}

struct ClassStats {
  std::vector<std::uint32_t> depth;          // by class id
  std::vector<std::uint64_t> direct_count;   // entities directly asserted
  std::vector<std::uint64_t> closure_count;  // entities with the class in their type closure
};

// frequency(c) = |{e : c in types(e) or c is an ancestor of some t in types(e)}|
inline ClassStats class_frequencies(const ClassHierarchy& h) {
  const std::size_t n = h.num_classes();
  ClassStats stats;
  stats.depth = class_depths(h);
  stats.direct_count.assign(n, 0);
  stats.closure_count.assign(n, 0);

  std::vector<std::uint32_t> stamp(n, 0);
  std::uint32_t now = 0;
  std::vector<ClassId> stack;
  for (EntityId e = 0; e < h.num_entities(); ++e) {
    const auto types = h.types_of(e);
    if (types.empty()) continue;
    ++now;
    stack.assign(types.begin(), types.end());
    for (ClassId c : types) ++stats.direct_count[c];
    while (!stack.empty()) {
      const ClassId c = stack.back();
      stack.pop_back();
      if (stamp[c] == now) continue;
      stamp[c] = now;
      ++stats.closure_count[c];
      for (ClassId p : h.parents(c)) stack.push_back(p);
    }
  }
  return stats;
}

// Most specific directly asserted class of an entity: maximal depth, ties
// broken by smaller closure frequency, then lexicographically smaller class
// string. kNoClass for entities with no assertions. Depends only on the set
// of assertions, never on their input order.
inline ClassId lowest_class(const ClassHierarchy& h, const ClassStats& stats, EntityId e) {
  const auto types = h.types_of(e);
  if (types.empty()) return kNoClass;
  ClassId best = types.front();
  for (std::size_t i = 1; i < types.size(); ++i) {
    const ClassId c = types[i];
    if (stats.depth[c] != stats.depth[best]) {
      if (stats.depth[c] > stats.depth[best]) best = c;
      continue;
    }
    if (stats.closure_count[c] != stats.closure_count[best]) {
      if (stats.closure_count[c] < stats.closure_count[best]) best = c;
      continue;
    }
    if (h.classes().at(c) < h.classes().at(best)) best = c;
  }
  return best;
}

inline std::vector<ClassId> lowest_classes(const ClassHierarchy& h, const ClassStats& stats) {
  std::vector<ClassId> out(h.num_entities(), kNoClass);
  for (EntityId e = 0; e < h.num_entities(); ++e) out[e] = lowest_class(h, stats, e);
  return out;
}

// Rows for the analyze-classes report, sorted by closure count descending
// (ties by class string ascending).
struct ClassReportRow {
  ClassId id;
  std::uint32_t depth;
  std::uint64_t direct_count;
  std::uint64_t closure_count;
};

inline std::vector<ClassReportRow> class_report_rows(const ClassHierarchy& h,
                                                     const ClassStats& stats) {
  std::vector<ClassReportRow> rows;
  rows.reserve(h.num_classes());
  for (ClassId c = 0; c < h.num_classes(); ++c)
    rows.push_back({c, stats.depth[c], stats.direct_count[c], stats.closure_count[c]});
  std::sort(rows.begin(), rows.end(), [&](const ClassReportRow& a, const ClassReportRow& b) {
    if (a.closure_count != b.closure_count) return a.closure_count > b.closure_count;
    return h.classes().at(a.id) < h.classes().at(b.id);
  });
  return rows;
}

}  // namespace semkge
