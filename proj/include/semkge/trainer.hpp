#pragma once
// Parallel negative-sampling SGD over a partition plan. Workers own disjoint
// partition subsets (round-robin by size, largest first) and apply sparse
// row updates to one shared embedding table without synchronization; lost
// updates between workers are tolerated (the partition structure keeps most
// row sets disjoint). With W=1 the whole run is bit-deterministic given
// (seed, config, plan), and that path is what the tests pin down.
//
// Per-epoch schedule of worker w (replicated exactly by the sequential
// reference loop in the tests):
//   rng_w = Rng(seed, w + 1)
//   shuffle slot indices 0..n-1 over the worker's triple list with rng_w
//   for each positive in shuffled order:
//     draw k_neg negatives from rng_w (slot first, then replacement)
//     margin loss:  per negative, recompute score/grad of the positive,
//                   skip the pair when the hinge is inactive, otherwise apply
//                   the combined pair gradient row by row in the order
//                   head, relation, tail, replacement
//     logistic:     apply the positive term (rows head, relation, tail),
//                   then each negative term (same row order on the corrupted
//                   triple)
//   every row application adds lambda * row to the gradient, then takes one
//   SGD or AdaGrad step; AdaGrad accumulates g^2 per coordinate and divides
//   by sqrt(G + eps).

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "semkge/error.hpp"
#include "semkge/io.hpp"
#include "semkge/models.hpp"
#include "semkge/partition.hpp"
#include "semkge/rng.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

enum class OptimizerKind { sgd, adagrad };
enum class LossKind { margin_ranking, logistic };
enum class NegScope { global, partition_local };

struct TrainConfig {
  ModelKind model;
  std::uint32_t dim = 100;
  std::uint32_t epochs = 100;
  std::uint64_t max_steps = 0;  // 0 = bounded by epochs only; one step = one positive
  std::uint32_t batch_size = 128;
  std::uint32_t k_neg = 1;
  double lr = 0.01;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double adagrad_eps = 1e-8;
  LossKind loss = LossKind::margin_ranking;
  double margin = 1.0;  // gamma' of the margin-ranking loss
  std::uint32_t workers = 1;
  std::uint64_t seed = 0;
  double lambda = 0.0;  // L2 coefficient folded into every row update
  NegScope scope = NegScope::global;

  void validate() const {
    if (dim < 1) fail(Errc::invalid_argument, "dim must be >= 1");
    if (batch_size < 1) fail(Errc::invalid_argument, "batch_size must be >= 1");
    if (k_neg < 1) fail(Errc::invalid_argument, "k_neg must be >= 1");
    if (!(lr > 0)) fail(Errc::invalid_argument, "lr must be > 0");
    if (workers < 1) fail(Errc::invalid_argument, "workers must be >= 1");
    if (lambda < 0) fail(Errc::invalid_argument, "lambda must be >= 0");
    if (loss == LossKind::margin_ranking && !(margin > 0))
      fail(Errc::invalid_argument, "margin must be > 0");
  }
};

struct NegativeSample {
  Triple base;
  bool corrupt_tail = true;
  EntityId replacement = 0;

  Triple corrupted() const {
    Triple t = base;
    (corrupt_tail ? t.tail : t.head) = replacement;
    return t;
  }
};

// Draws k corruptions of t: slot uniform (0 = head, 1 = tail), replacement
// uniform over the scope excluding the original entity. Collisions are
// resampled up to 100 times, then resolved by drawing one of the n-1
// non-original values directly. An empty `roster` means global scope over
// num_entities; otherwise it must be sorted and contain the original entity.
inline void sample_negatives(const Triple& t, std::uint32_t k_neg, std::size_t num_entities,
                             std::span<const EntityId> roster, Rng& rng,
                             std::vector<NegativeSample>& out) {
  const std::size_t n = roster.empty() ? num_entities : roster.size();
  if (n < 2) fail(Errc::degenerate_scope, "negative sampling scope has fewer than 2 entities");
  out.clear();
  out.reserve(k_neg);
  for (std::uint32_t j = 0; j < k_neg; ++j) {
    NegativeSample ns;
    ns.base = t;
    ns.corrupt_tail = rng.next_below(2) == 1;
    const EntityId original = ns.corrupt_tail ? t.tail : t.head;
    auto pick = [&](std::uint64_t v) {
      return roster.empty() ? static_cast<EntityId>(v) : roster[v];
    };
    bool found = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const EntityId cand = pick(rng.next_below(n));
      if (cand != original) {
        ns.replacement = cand;
        found = true;
        break;
      }
    }
    if (!found) {
      // arithmetic skip over the original's position
      std::uint64_t pos = original;
      if (!roster.empty()) {
        pos = static_cast<std::uint64_t>(
            std::lower_bound(roster.begin(), roster.end(), original) - roster.begin());
      }
      std::uint64_t v = rng.next_below(n - 1);
      if (v >= pos) ++v;
      ns.replacement = pick(v);
    }
    out.push_back(ns);
  }
}

inline std::vector<NegativeSample> sample_negatives(const Triple& t, std::uint32_t k_neg,
                                                    std::size_t num_entities,
                                                    std::span<const EntityId> roster, Rng& rng) {
  std::vector<NegativeSample> out;
  sample_negatives(t, k_neg, num_entities, roster, rng, out);
  return out;
}

struct EpochStats {
  std::uint32_t epoch = 0;
  double mean_loss = 0.0;
  double mean_entity_sq_norm = 0.0;
  std::uint64_t wall_ms = 0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;

  void write_jsonl(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io, "cannot create " + path.string());
    for (const EpochStats& e : epochs) {
      nlohmann::json obj{{"epoch", e.epoch},
                         {"mean_loss", e.mean_loss},
                         {"mean_entity_sq_norm", e.mean_entity_sq_norm},
                         {"wall_ms", e.wall_ms}};
      out << obj.dump() << '\n';
    }
  }
};

class Trainer {
 public:
  Trainer(const TripleStore& store, const PartitionPlan& plan, const TrainConfig& cfg)
      : store_(store), plan_(plan), cfg_(cfg) {
    cfg_.validate();
    validate_plan(plan_, store_);
    if (cfg_.workers > plan_.num_partitions) {
      fail(Errc::invalid_argument,
           "workers (" + std::to_string(cfg_.workers) + ") exceed partitions (" +
               std::to_string(plan_.num_partitions) + "); every worker needs a partition");
    }
    table_ = init_table(cfg_.model, store_.num_entities(), store_.num_relations(), cfg_.dim,
                        cfg_.seed);
    if (cfg_.optimizer == OptimizerKind::adagrad) {
      adagrad_entity_.assign(table_.entity_data().size(), 0.0);
      adagrad_relation_.assign(table_.relation_data().size(), 0.0);
    }
    build_workers();
  }

  static Trainer resume(const std::filesystem::path& dir, const TripleStore& store,
                        const PartitionPlan& plan);

  // hand-written because of the atomic step counter
  Trainer(Trainer&& o) noexcept
      : store_(o.store_),
        plan_(o.plan_),
        cfg_(std::move(o.cfg_)),
        table_(std::move(o.table_)),
        adagrad_entity_(std::move(o.adagrad_entity_)),
        adagrad_relation_(std::move(o.adagrad_relation_)),
        workers_(std::move(o.workers_)),
        rosters_(std::move(o.rosters_)),
        log_(std::move(o.log_)),
        step_(o.step_.load()),
        epoch_(o.epoch_) {}

  const EmbeddingTable& table() const { return table_; }
  const TrainLog& log() const { return log_; }
  const TrainConfig& config() const { return cfg_; }
  std::uint64_t step() const { return step_.load(); }
  std::uint32_t epoch() const { return epoch_; }

  // Runs until the epoch budget (and max_steps, when set) is exhausted.
  void run() { run_until_step(cfg_.max_steps); }

  // Stops once `stop_step` positives have been processed (0 = no step bound).
  // Exact for W=1; with W>1 every worker stops within its own schedule and
  // exactly stop_step positives are processed in total.
  void run_until_step(std::uint64_t stop_step) {
    while (epoch_ < cfg_.epochs) {
      if (stop_step != 0 && step_.load() >= stop_step) return;
      run_one_epoch(stop_step);
    }
  }

  void save_checkpoint(const std::filesystem::path& dir) const;

 private:
  struct WorkerState {
    std::array<std::uint64_t, 4> rng_state{};
    std::array<std::uint64_t, 4> epoch_start_state{};
    std::uint64_t pos_in_epoch = 0;  // next slot to process; == size() when done
    std::vector<std::uint32_t> base_order;    // owned partitions' train indices
    std::vector<std::uint32_t> partition_of;  // partition id per base_order entry
    double loss_sum = 0.0;
    std::uint64_t loss_count = 0;
  };

  struct Scratch {
    TripleGrad grad_pos, grad_neg;
    std::vector<double> g_head, g_rel, g_tail;
    std::vector<NegativeSample> negs;
    std::vector<std::uint32_t> slots;
  };

  Trainer(const TripleStore& store, const PartitionPlan& plan) : store_(store), plan_(plan) {}

  void build_workers() {
    // partitions sorted by (size desc, id asc), dealt round-robin
    std::vector<std::uint32_t> parts(plan_.num_partitions);
    std::iota(parts.begin(), parts.end(), 0u);
    std::vector<std::uint64_t> sizes(plan_.num_partitions, 0);
    for (std::uint32_t p : plan_.assignment) ++sizes[p];
    std::sort(parts.begin(), parts.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
      return a < b;
    });

    std::vector<std::vector<std::uint32_t>> triples_of(plan_.num_partitions);
    for (std::uint32_t i = 0; i < plan_.assignment.size(); ++i)
      triples_of[plan_.assignment[i]].push_back(i);

    workers_.assign(cfg_.workers, WorkerState{});
    for (std::uint32_t slot = 0; slot < parts.size(); ++slot) {
      const std::uint32_t w = slot % cfg_.workers;
      const std::uint32_t p = parts[slot];
      for (std::uint32_t i : triples_of[p]) {
        workers_[w].base_order.push_back(i);
        workers_[w].partition_of.push_back(p);
      }
    }
    for (std::uint32_t w = 0; w < cfg_.workers; ++w) {
      Rng rng(cfg_.seed, w + 1);
      workers_[w].rng_state = rng.state();
      workers_[w].epoch_start_state = rng.state();
    }

    if (cfg_.scope == NegScope::partition_local) {
      rosters_.assign(plan_.num_partitions, {});
      for (std::uint32_t i = 0; i < plan_.assignment.size(); ++i) {
        const Triple& t = store_.triples()[store_.train().begin + i];
        rosters_[plan_.assignment[i]].push_back(t.head);
        rosters_[plan_.assignment[i]].push_back(t.tail);
      }
      for (auto& r : rosters_) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
      }
    }
  }

  void run_one_epoch(std::uint64_t stop_step) {
    const auto start = std::chrono::steady_clock::now();
    std::exception_ptr first_error;
    if (cfg_.workers == 1) {
      worker_epoch(0, stop_step);
    } else {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(cfg_.workers);
      for (std::uint32_t w = 0; w < cfg_.workers; ++w) {
        threads.emplace_back([this, w, stop_step, &errors] {
          try {
            worker_epoch(w, stop_step);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors)
        if (e && !first_error) first_error = e;
    }
    if (first_error) std::rethrow_exception(first_error);

    const bool epoch_done =
        std::all_of(workers_.begin(), workers_.end(), [](const WorkerState& w) {
          return w.pos_in_epoch == w.base_order.size();
        });
    if (!epoch_done) return;  // paused by stop_step; checkpoint and resume later

    double loss_sum = 0.0;
    std::uint64_t count = 0;
    for (WorkerState& w : workers_) {
      loss_sum += w.loss_sum;
      count += w.loss_count;
      w.loss_sum = 0.0;
      w.loss_count = 0;
      w.pos_in_epoch = 0;
      w.epoch_start_state = w.rng_state;
    }
    EpochStats stats;
    stats.epoch = epoch_;
    stats.mean_loss = count == 0 ? 0.0 : loss_sum / static_cast<double>(count);
    stats.mean_entity_sq_norm = table_.mean_entity_sq_norm();
    stats.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              start)
            .count());
    log_.epochs.push_back(stats);
    ++epoch_;
  }

  // One epoch (or the remainder of one) for worker w.
  void worker_epoch(std::uint32_t w, std::uint64_t stop_step) {
    WorkerState& ws = workers_[w];
    const std::size_t n = ws.base_order.size();
    if (ws.pos_in_epoch >= n) {
      ws.pos_in_epoch = n;  // nothing left this epoch (also covers n == 0)
      return;
    }
    Rng rng(0);
    rng.set_state(ws.epoch_start_state);
    Scratch scratch;
    scratch.slots.resize(n);
    std::iota(scratch.slots.begin(), scratch.slots.end(), 0u);
    shuffle(scratch.slots, rng);
    if (ws.pos_in_epoch > 0) rng.set_state(ws.rng_state);  // resuming mid-epoch

    for (std::uint64_t k = ws.pos_in_epoch; k < n; ++k) {
      if (stop_step != 0) {
        const std::uint64_t id = step_.fetch_add(1);
        if (id >= stop_step) {
          step_.fetch_sub(1);
          ws.pos_in_epoch = k;
          ws.rng_state = rng.state();
          return;
        }
      } else {
        step_.fetch_add(1);
      }
      const std::uint32_t slot = scratch.slots[k];
      const Triple& pos = store_.triples()[store_.train().begin + ws.base_order[slot]];
      std::span<const EntityId> roster;
      if (cfg_.scope == NegScope::partition_local) roster = rosters_[ws.partition_of[slot]];
      sample_negatives(pos, cfg_.k_neg, store_.num_entities(), roster, rng, scratch.negs);

      const double loss = cfg_.loss == LossKind::margin_ranking
                              ? apply_margin(pos, scratch)
                              : apply_logistic(pos, scratch);
      if (!std::isfinite(loss)) {
        fail(Errc::diverged, "loss became non-finite at step " + std::to_string(step_.load()));
      }
      ws.loss_sum += loss;
      ws.loss_count += 1;
    }
    ws.pos_in_epoch = n;
    ws.rng_state = rng.state();
  }

  enum class RowKind { entity, relation };

  void apply_update(RowKind kind, std::uint32_t id, std::span<const double> g) {
    const std::size_t width = table_.row_width();
    double* row = kind == RowKind::entity ? table_.entity_row(id) : table_.relation_row(id);
    double* accum = nullptr;
    if (cfg_.optimizer == OptimizerKind::adagrad) {
      accum = (kind == RowKind::entity ? adagrad_entity_.data() : adagrad_relation_.data()) +
              std::size_t(id) * width;
    }
    const double lr = cfg_.lr;
    const double lambda = cfg_.lambda;
    for (std::size_t i = 0; i < width; ++i) {
      const double gi = g[i] + lambda * row[i];
      if (accum) {
        accum[i] += gi * gi;
        row[i] -= lr * gi / std::sqrt(accum[i] + cfg_.adagrad_eps);
      } else {
        row[i] -= lr * gi;
      }
    }
  }

  // Sum over negatives of max(0, margin + score(neg) - score(pos)); inactive
  // pairs leave the table untouched.
  double apply_margin(const Triple& pos, Scratch& s) {
    const std::size_t width = table_.row_width();
    s.g_head.resize(width);
    s.g_rel.resize(width);
    s.g_tail.resize(width);
    double total = 0.0;
    for (const NegativeSample& ns : s.negs) {
      const double s_pos = score_and_grad(cfg_.model, table_, pos, s.grad_pos);
      const Triple neg = ns.corrupted();
      const double s_neg = score(cfg_.model, table_, neg);
      const double hinge = cfg_.margin + s_neg - s_pos;
      if (hinge <= 0.0) continue;
      total += hinge;
      score_and_grad(cfg_.model, table_, neg, s.grad_neg);
      // d(hinge)/d(row); uncorrupted slots combine both contributions
      if (ns.corrupt_tail) {
        for (std::size_t i = 0; i < width; ++i) {
          s.g_head[i] = s.grad_neg.head[i] - s.grad_pos.head[i];
          s.g_rel[i] = s.grad_neg.rel[i] - s.grad_pos.rel[i];
          s.g_tail[i] = -s.grad_pos.tail[i];
        }
        apply_update(RowKind::entity, pos.head, s.g_head);
        apply_update(RowKind::relation, pos.relation, s.g_rel);
        apply_update(RowKind::entity, pos.tail, s.g_tail);
        apply_update(RowKind::entity, ns.replacement, s.grad_neg.tail);
      } else {
        for (std::size_t i = 0; i < width; ++i) {
          s.g_head[i] = -s.grad_pos.head[i];
          s.g_rel[i] = s.grad_neg.rel[i] - s.grad_pos.rel[i];
          s.g_tail[i] = s.grad_neg.tail[i] - s.grad_pos.tail[i];
        }
        apply_update(RowKind::entity, pos.head, s.g_head);
        apply_update(RowKind::relation, pos.relation, s.g_rel);
        apply_update(RowKind::entity, pos.tail, s.g_tail);
        apply_update(RowKind::entity, ns.replacement, s.grad_neg.head);
      }
    }
    return total;
  }

  // softplus(-score(pos)) + sum softplus(score(neg))
  double apply_logistic(const Triple& pos, Scratch& s) {
    const std::size_t width = table_.row_width();
    s.g_head.resize(width);
    double total = 0.0;
    std::vector<double>& g = s.g_head;

    const double s_pos = score_and_grad(cfg_.model, table_, pos, s.grad_pos);
    total += detail::softplus(-s_pos);
    const double c_pos = -detail::sigmoid(-s_pos);
    for (std::size_t i = 0; i < width; ++i) g[i] = c_pos * s.grad_pos.head[i];
    apply_update(RowKind::entity, pos.head, g);
    for (std::size_t i = 0; i < width; ++i) g[i] = c_pos * s.grad_pos.rel[i];
    apply_update(RowKind::relation, pos.relation, g);
    for (std::size_t i = 0; i < width; ++i) g[i] = c_pos * s.grad_pos.tail[i];
    apply_update(RowKind::entity, pos.tail, g);

    for (const NegativeSample& ns : s.negs) {
      const Triple neg = ns.corrupted();
      const double s_neg = score_and_grad(cfg_.model, table_, neg, s.grad_neg);
      total += detail::softplus(s_neg);
      const double c_neg = detail::sigmoid(s_neg);
      for (std::size_t i = 0; i < width; ++i) g[i] = c_neg * s.grad_neg.head[i];
      apply_update(RowKind::entity, neg.head, g);
      for (std::size_t i = 0; i < width; ++i) g[i] = c_neg * s.grad_neg.rel[i];
      apply_update(RowKind::relation, neg.relation, g);
      for (std::size_t i = 0; i < width; ++i) g[i] = c_neg * s.grad_neg.tail[i];
      apply_update(RowKind::entity, neg.tail, g);
    }
    return total;
  }

  const TripleStore& store_;
  const PartitionPlan& plan_;
  TrainConfig cfg_;
  EmbeddingTable table_;
  std::vector<double> adagrad_entity_;
  std::vector<double> adagrad_relation_;
  std::vector<WorkerState> workers_;
  std::vector<std::vector<EntityId>> rosters_;
  TrainLog log_;
  std::atomic<std::uint64_t> step_{0};
  std::uint32_t epoch_ = 0;

  friend struct TrainerCheckpointAccess;
};

// --- checkpoint / resume -------------------------------------------------------

namespace detail {

inline nlohmann::json config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{
      {"model", cfg.model.name()},
      {"gamma", cfg.model.gamma},
      {"dim", cfg.dim},
      {"epochs", cfg.epochs},
      {"max_steps", cfg.max_steps},
      {"batch_size", cfg.batch_size},
      {"k_neg", cfg.k_neg},
      {"lr", cfg.lr},
      {"optimizer", cfg.optimizer == OptimizerKind::adagrad ? "adagrad" : "sgd"},
      {"adagrad_eps", cfg.adagrad_eps},
      {"loss", cfg.loss == LossKind::logistic ? "logistic" : "margin"},
      {"margin", cfg.margin},
      {"workers", cfg.workers},
      {"seed", cfg.seed},
      {"lambda", cfg.lambda},
      {"neg_scope", cfg.scope == NegScope::partition_local ? "local" : "global"},
  };
}

inline ModelKind model_from_name(const std::string& name, double gamma) {
  if (name == "transe-l1") return ModelKind::transe(Norm::l1, gamma);
  if (name == "transe-l2") return ModelKind::transe(Norm::l2, gamma);
  if (name == "distmult") return ModelKind::distmult();
  if (name == "complex") return ModelKind::complex();
  fail(Errc::invalid_argument, "unknown model name: " + name);
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.model = model_from_name(j.at("model").get<std::string>(), j.at("gamma").get<double>());
  cfg.dim = j.at("dim").get<std::uint32_t>();
  cfg.epochs = j.at("epochs").get<std::uint32_t>();
  cfg.max_steps = j.at("max_steps").get<std::uint64_t>();
  cfg.batch_size = j.at("batch_size").get<std::uint32_t>();
  cfg.k_neg = j.at("k_neg").get<std::uint32_t>();
  cfg.lr = j.at("lr").get<double>();
  cfg.optimizer = j.at("optimizer").get<std::string>() == "adagrad" ? OptimizerKind::adagrad
                                                                    : OptimizerKind::sgd;
  cfg.adagrad_eps = j.at("adagrad_eps").get<double>();
  cfg.loss = j.at("loss").get<std::string>() == "logistic" ? LossKind::logistic
                                                           : LossKind::margin_ranking;
  cfg.margin = j.at("margin").get<double>();
  cfg.workers = j.at("workers").get<std::uint32_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.lambda = j.at("lambda").get<double>();
  cfg.scope = j.at("neg_scope").get<std::string>() == "local" ? NegScope::partition_local
                                                              : NegScope::global;
  return cfg;
}

}  // namespace detail

struct TrainerCheckpointAccess {
  static void save(const Trainer& t, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    if (!t.table_.all_finite())
      fail(Errc::diverged, "refusing to checkpoint a table with non-finite values");
    write_matrix(dir / "entity_embeddings.bin", t.table_.num_entities(), t.table_.dim(),
                 t.table_.dtype(), t.table_.entity_data());
    write_matrix(dir / "relation_embeddings.bin", t.table_.num_relations(), t.table_.dim(),
                 t.table_.dtype(), t.table_.relation_data());
    if (t.cfg_.optimizer == OptimizerKind::adagrad) {
      write_matrix(dir / "adagrad_entities.bin", t.table_.num_entities(), t.table_.row_width(),
                   Dtype::real64, t.adagrad_entity_);
      write_matrix(dir / "adagrad_relations.bin", t.table_.num_relations(), t.table_.row_width(),
                   Dtype::real64, t.adagrad_relation_);
    }

    nlohmann::json state;
    state["format"] = "semkge-checkpoint-v1";
    state["version"] = kVersion;
    state["step"] = t.step_.load();
    state["epoch"] = t.epoch_;
    state["config"] = detail::config_to_json(t.cfg_);
    nlohmann::json workers = nlohmann::json::array();
    for (const auto& w : t.workers_) {
      workers.push_back(nlohmann::json{{"rng", w.rng_state},
                                       {"epoch_start_rng", w.epoch_start_state},
                                       {"pos_in_epoch", w.pos_in_epoch},
                                       {"loss_sum", w.loss_sum},
                                       {"loss_count", w.loss_count}});
    }
    state["workers"] = std::move(workers);
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : t.log_.epochs) {
      log.push_back(nlohmann::json{{"epoch", e.epoch},
                                   {"mean_loss", e.mean_loss},
                                   {"mean_entity_sq_norm", e.mean_entity_sq_norm},
                                   {"wall_ms", e.wall_ms}});
    }
    state["log"] = std::move(log);

    std::ofstream out(dir / "state.json", std::ios::binary);
    if (!out) fail(Errc::io, "cannot create " + (dir / "state.json").string());
    out << state.dump(2) << '\n';
    if (!out) fail(Errc::io, "write failed: " + (dir / "state.json").string());
  }

  static Trainer load(const std::filesystem::path& dir, const TripleStore& store,
                      const PartitionPlan& plan) {
    namespace fs = std::filesystem;
    const fs::path state_path = dir / "state.json";
    std::ifstream in(state_path);
    if (!in) fail(Errc::bad_checkpoint, "missing checkpoint state: " + state_path.string());
    nlohmann::json state = nlohmann::json::parse(in, nullptr, false);
    if (state.is_discarded() || state.value("format", "") != "semkge-checkpoint-v1")
      fail(Errc::bad_checkpoint, "unrecognized checkpoint state: " + state_path.string());

    TrainConfig cfg = detail::config_from_json(state.at("config"));
    Trainer t(store, plan);
    t.cfg_ = cfg;
    t.cfg_.validate();
    validate_plan(plan, store);
    if (cfg.workers > plan.num_partitions)
      fail(Errc::invalid_argument, "checkpoint workers exceed plan partitions");

    MatrixFile ent = read_matrix(dir / "entity_embeddings.bin");
    MatrixFile rel = read_matrix(dir / "relation_embeddings.bin");
    if (ent.cols != cfg.dim || rel.cols != cfg.dim || ent.dtype != cfg.model.dtype())
      fail(Errc::dim_mismatch, "checkpoint table does not match the configured model/dim");
    if (ent.rows != store.num_entities() || rel.rows != store.num_relations())
      fail(Errc::dim_mismatch, "checkpoint table does not match the dataset dictionaries");
    t.table_ = EmbeddingTable(ent.rows, rel.rows, ent.cols, ent.dtype);
    std::copy(ent.data.begin(), ent.data.end(), t.table_.entity_data().begin());
    std::copy(rel.data.begin(), rel.data.end(), t.table_.relation_data().begin());

    if (cfg.optimizer == OptimizerKind::adagrad) {
      MatrixFile ga = read_matrix(dir / "adagrad_entities.bin");
      MatrixFile gr = read_matrix(dir / "adagrad_relations.bin");
      if (ga.data.size() != t.table_.entity_data().size() ||
          gr.data.size() != t.table_.relation_data().size())
        fail(Errc::dim_mismatch, "checkpoint optimizer state does not match the table");
      t.adagrad_entity_ = std::move(ga.data);
      t.adagrad_relation_ = std::move(gr.data);
    }

    t.build_workers();
    const nlohmann::json& workers = state.at("workers");
    if (workers.size() != t.workers_.size())
      fail(Errc::bad_checkpoint, "checkpoint worker count does not match the config");
    for (std::size_t w = 0; w < t.workers_.size(); ++w) {
      const nlohmann::json& jw = workers[w];
      t.workers_[w].rng_state = jw.at("rng").get<std::array<std::uint64_t, 4>>();
      t.workers_[w].epoch_start_state =
          jw.at("epoch_start_rng").get<std::array<std::uint64_t, 4>>();
      t.workers_[w].pos_in_epoch = jw.at("pos_in_epoch").get<std::uint64_t>();
      t.workers_[w].loss_sum = jw.at("loss_sum").get<double>();
      t.workers_[w].loss_count = jw.at("loss_count").get<std::uint64_t>();
      if (t.workers_[w].pos_in_epoch > t.workers_[w].base_order.size())
        fail(Errc::bad_checkpoint, "checkpoint position exceeds worker schedule");
    }
    t.step_.store(state.at("step").get<std::uint64_t>());
    t.epoch_ = state.at("epoch").get<std::uint32_t>();
    for (const auto& je : state.at("log")) {
      EpochStats e;
      e.epoch = je.at("epoch").get<std::uint32_t>();
      e.mean_loss = je.at("mean_loss").get<double>();
      e.mean_entity_sq_norm = je.at("mean_entity_sq_norm").get<double>();
      e.wall_ms = je.at("wall_ms").get<std::uint64_t>();
      t.log_.epochs.push_back(e);
    }
    return t;
  }
};

inline void Trainer::save_checkpoint(const std::filesystem::path& dir) const {
  TrainerCheckpointAccess::save(*this, dir);
}

inline Trainer Trainer::resume(const std::filesystem::path& dir, const TripleStore& store,
                               const PartitionPlan& plan) {
  return TrainerCheckpointAccess::load(dir, store, plan);
}

}  // namespace semkge
