#pragma once
// Scoring functions and analytic gradients for TransE, DistMult and ComplEx.
// All three use the convention "higher score = more plausible": TransE scores
// gamma - ||h + r - t|| so the trainer and evaluator share one ranking code
// path. Complex vectors are stored as interleaved (re, im) pairs of doubles.
//
// The per-coordinate arithmetic here is pinned: evaluation fast paths score
// whole candidate columns with exactly these expressions, so single-triple
// scores and batched scores agree bit for bit. DistMult accumulates
// (h_i * t_i) * r_i, which also makes score(h,r,t) == score(t,r,h) exact.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "semkge/error.hpp"
#include "semkge/rng.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

enum class Dtype : std::uint8_t { real64 = 0, complex128 = 1 };

enum class Norm { l1, l2 };

struct ModelKind {
  enum class Family { transe, distmult, complex_bilinear } family = Family::transe;
  Norm norm = Norm::l2;   // TransE only
  double gamma = 1.0;     // TransE only, must be > 0

  static ModelKind transe(Norm n, double gamma) {
    if (!(gamma > 0)) fail(Errc::invalid_argument, "TransE gamma must be > 0");
    return ModelKind{Family::transe, n, gamma};
  }
  static ModelKind distmult() { return ModelKind{Family::distmult, Norm::l2, 0.0}; }
  static ModelKind complex() { return ModelKind{Family::complex_bilinear, Norm::l2, 0.0}; }

  Dtype dtype() const {
    return family == Family::complex_bilinear ? Dtype::complex128 : Dtype::real64;
  }

  std::string name() const {
    switch (family) {
      case Family::transe: return norm == Norm::l1 ? "transe-l1" : "transe-l2";
      case Family::distmult: return "distmult";
      case Family::complex_bilinear: return "complex";
    }
    return "?";
  }
};

// Dense |E| x d and |R| x d matrices. For complex tables each logical
// dimension occupies two doubles, so rows hold 2*d values.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t num_entities, std::size_t num_relations, std::size_t dim, Dtype dtype)
      : num_entities_(num_entities),
        num_relations_(num_relations),
        dim_(dim),
        dtype_(dtype),
        entity_data_(num_entities * row_width(), 0.0),
        relation_data_(num_relations * row_width(), 0.0) {}

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t dim() const { return dim_; }
  Dtype dtype() const { return dtype_; }
  std::size_t row_width() const { return dtype_ == Dtype::complex128 ? 2 * dim_ : dim_; }

  double* entity_row(EntityId e) { return entity_data_.data() + std::size_t(e) * row_width(); }
  const double* entity_row(EntityId e) const {
    return entity_data_.data() + std::size_t(e) * row_width();
  }
  double* relation_row(RelationId r) { return relation_data_.data() + std::size_t(r) * row_width(); }
  const double* relation_row(RelationId r) const {
    return relation_data_.data() + std::size_t(r) * row_width();
  }

  std::span<double> entity_data() { return entity_data_; }
  std::span<const double> entity_data() const { return entity_data_; }
  std::span<double> relation_data() { return relation_data_; }
  std::span<const double> relation_data() const { return relation_data_; }

  bool all_finite() const {
    for (double v : entity_data_)
      if (!std::isfinite(v)) return false;
    for (double v : relation_data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double mean_entity_sq_norm() const {
    if (num_entities_ == 0) return 0.0;
    double total = 0.0;
    for (double v : entity_data_) total += v * v;
    return total / static_cast<double>(num_entities_);
  }

 private:
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::size_t dim_ = 0;
  Dtype dtype_ = Dtype::real64;
  std::vector<double> entity_data_;
  std::vector<double> relation_data_;
};

namespace detail {

inline void l2_normalize(double* row, std::size_t n) {
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) sq += row[i] * row[i];
  if (sq == 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < n; ++i) row[i] *= inv;
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// log(1 + e^x), stable for large |x|
inline double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

inline void check_ids(const EmbeddingTable& table, const Triple& t) {
  if (t.head >= table.num_entities() || t.tail >= table.num_entities())
    fail(Errc::out_of_range, "entity id out of range in triple");
  if (t.relation >= table.num_relations())
    fail(Errc::out_of_range, "relation id out of range in triple");
}

inline void check_dtype(const ModelKind& model, const EmbeddingTable& table) {
  if (model.dtype() != table.dtype())
    fail(Errc::dtype_mismatch, "model " + model.name() + " does not match table dtype");
}

}  // namespace detail

// --- row-level scoring kernels ----------------------------------------------

inline double transe_score(const double* h, const double* r, const double* t, std::size_t d,
                           Norm norm, double gamma) {
  double acc = 0.0;
  if (norm == Norm::l1) {
    for (std::size_t i = 0; i < d; ++i) acc += std::fabs((h[i] + r[i]) - t[i]);
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      const double x = (h[i] + r[i]) - t[i];
      acc += x * x;
    }
    acc = std::sqrt(acc);
  }
  return gamma - acc;
}

inline double distmult_score(const double* h, const double* r, const double* t, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) acc += (h[i] * t[i]) * r[i];
  return acc;
}

// Re(sum_i h_i * r_i * conj(t_i)) over interleaved (re, im) rows of logical
// dimension d. Groups (h * r) first; the evaluator reuses this expression.
inline double complex_score(const double* h, const double* r, const double* t, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double hr = h[2 * i], hi = h[2 * i + 1];
    const double rr = r[2 * i], ri = r[2 * i + 1];
    const double pr = hr * rr - hi * ri;
    const double pi = hr * ri + hi * rr;
    acc += pr * t[2 * i] + pi * t[2 * i + 1];
  }
  return acc;
}

inline double score_rows(const ModelKind& model, const double* h, const double* r, const double* t,
                         std::size_t dim) {
  switch (model.family) {
    case ModelKind::Family::transe: return transe_score(h, r, t, dim, model.norm, model.gamma);
    case ModelKind::Family::distmult: return distmult_score(h, r, t, dim);
    case ModelKind::Family::complex_bilinear: return complex_score(h, r, t, dim);
  }
  return 0.0;
}

inline double score(const ModelKind& model, const EmbeddingTable& table, const Triple& t) {
  detail::check_dtype(model, table);
  detail::check_ids(table, t);
  return score_rows(model, table.entity_row(t.head), table.relation_row(t.relation),
                    table.entity_row(t.tail), table.dim());
}

// --- analytic gradients ------------------------------------------------------

// d(score)/d(row) for each of the three rows of a triple; vectors sized
// row_width. For TransE-L1 the subgradient uses sign(0) = 0, and at exactly
// zero L2 distance all gradients are zero.
struct TripleGrad {
  std::vector<double> head;
  std::vector<double> rel;
  std::vector<double> tail;

  void resize(std::size_t row_width) {
    head.assign(row_width, 0.0);
    rel.assign(row_width, 0.0);
    tail.assign(row_width, 0.0);
  }
};

inline double score_and_grad(const ModelKind& model, const EmbeddingTable& table, const Triple& t,
                             TripleGrad& out) {
  detail::check_dtype(model, table);
  detail::check_ids(table, t);
  const std::size_t d = table.dim();
  const double* h = table.entity_row(t.head);
  const double* r = table.relation_row(t.relation);
  const double* tl = table.entity_row(t.tail);
  out.resize(table.row_width());

  switch (model.family) {
    case ModelKind::Family::transe: {
      if (model.norm == Norm::l1) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double x = (h[i] + r[i]) - tl[i];
          acc += std::fabs(x);
          const double s = detail::sign(x);
          out.head[i] = -s;
          out.rel[i] = -s;
          out.tail[i] = s;
        }
        return model.gamma - acc;
      }
      double sq = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double x = (h[i] + r[i]) - tl[i];
        sq += x * x;
      }
      const double nrm = std::sqrt(sq);
      if (nrm > 0.0) {
        const double inv = 1.0 / nrm;
        for (std::size_t i = 0; i < d; ++i) {
          const double x = ((h[i] + r[i]) - tl[i]) * inv;
          out.head[i] = -x;
          out.rel[i] = -x;
          out.tail[i] = x;
        }
      }
      return model.gamma - nrm;
    }
    case ModelKind::Family::distmult: {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        acc += (h[i] * tl[i]) * r[i];
        out.head[i] = r[i] * tl[i];
        out.rel[i] = h[i] * tl[i];
        out.tail[i] = h[i] * r[i];
      }
      return acc;
    }
    case ModelKind::Family::complex_bilinear: {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double hr = h[2 * i], hi = h[2 * i + 1];
        const double rr = r[2 * i], ri = r[2 * i + 1];
        const double tr = tl[2 * i], ti = tl[2 * i + 1];
        const double pr = hr * rr - hi * ri;
        const double pi = hr * ri + hi * rr;
        acc += pr * tr + pi * ti;
        out.head[2 * i] = rr * tr + ri * ti;
        out.head[2 * i + 1] = rr * ti - ri * tr;
        out.rel[2 * i] = hr * tr + hi * ti;
        out.rel[2 * i + 1] = hr * ti - hi * tr;
        out.tail[2 * i] = pr;
        out.tail[2 * i + 1] = pi;
      }
      return acc;
    }
  }
  return 0.0;
}

inline TripleGrad grad(const ModelKind& model, const EmbeddingTable& table, const Triple& t) {
  TripleGrad g;
  score_and_grad(model, table, t, g);
  return g;
}

// Uniform init in [-6/sqrt(d), +6/sqrt(d)] per coordinate, seeded. TransE
// relation rows are L2-normalized once here.
inline EmbeddingTable init_table(const ModelKind& model, std::size_t num_entities,
                                 std::size_t num_relations, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) fail(Errc::invalid_argument, "embedding dim must be >= 1");
  EmbeddingTable table(num_entities, num_relations, dim, model.dtype());
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(seed);
  for (double& v : table.entity_data()) v = rng.next_uniform(-bound, bound);
  for (double& v : table.relation_data()) v = rng.next_uniform(-bound, bound);
  if (model.family == ModelKind::Family::transe) {
    for (RelationId r = 0; r < num_relations; ++r)
      detail::l2_normalize(table.relation_row(r), table.row_width());
  }
  return table;
}

}  // namespace semkge
