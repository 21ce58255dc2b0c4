#pragma once
// Integer-encoded fact triples with bidirectional string<->id dictionaries.
// Ids are dense and assigned in first-appearance order over the concatenated
// train, valid, test inputs, so identical inputs always produce identical
// encodings. Immutable after construction; safe for concurrent reads.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "semkge/error.hpp"

namespace semkge {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend bool operator==(const Triple&, const Triple&) = default;
};

using RawTriple = std::array<std::string, 3>;  // head, relation, tail strings

class Dictionary {
 public:
  std::uint32_t get_or_add(const std::string& s) {
    auto [it, inserted] = index_.try_emplace(s, static_cast<std::uint32_t>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
  }

  std::optional<std::uint32_t> find(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& at(std::uint32_t id) const {
    if (id >= strings_.size()) {
      fail(Errc::out_of_range, "dictionary id " + std::to_string(id) + " out of range, size " +
                                   std::to_string(strings_.size()));
    }
    return strings_[id];
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(strings_.size()); }
  bool empty() const { return strings_.empty(); }
  const std::vector<std::string>& strings() const { return strings_; }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Half-open index range into TripleStore::triples().
struct Split {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

class TripleStore {
 public:
  static TripleStore from_splits(std::span<const RawTriple> train, std::span<const RawTriple> valid,
                                 std::span<const RawTriple> test) {
    TripleStore store;
    store.triples_.reserve(train.size() + valid.size() + test.size());
    store.train_ = store.append(train);
    store.valid_ = store.append(valid);
    store.test_ = store.append(test);
    return store;
  }

  const std::vector<Triple>& triples() const { return triples_; }
  const Dictionary& entities() const { return entities_; }
  const Dictionary& relations() const { return relations_; }

  Split train() const { return train_; }
  Split valid() const { return valid_; }
  Split test() const { return test_; }

  std::size_t size() const { return triples_.size(); }
  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

  // Exact inverse of encoding; out-of-range ids are a hard error.
  RawTriple decode(const Triple& t) const {
    return {entities_.at(t.head), relations_.at(t.relation), entities_.at(t.tail)};
  }

 private:
  Split append(std::span<const RawTriple> raw) {
    Split s{triples_.size(), triples_.size()};
    for (const RawTriple& r : raw) {
      triples_.push_back(Triple{entities_.get_or_add(r[0]), relations_.get_or_add(r[1]),
                                entities_.get_or_add(r[2])});
    }
    s.end = triples_.size();
    return s;
  }

  std::vector<Triple> triples_;
  Dictionary entities_;
  Dictionary relations_;
  Split train_, valid_, test_;
};

inline TripleStore encode_triples(std::span<const RawTriple> raw) {
  return TripleStore::from_splits(raw, {}, {});
}

}  // namespace semkge
