#include <gtest/gtest.h>

#include <filesystem>

#include "semkge/config.hpp"
#include "semkge/trainer.hpp"
#include "testutil.hpp"

using namespace semkge;
namespace fs = std::filesystem;

namespace {

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.model = ModelKind::transe(Norm::l2, 1.0);
  cfg.dim = 8;
  cfg.epochs = 5;
  cfg.k_neg = 2;
  cfg.lr = 0.05;
  cfg.margin = 1.0;
  cfg.seed = 17;
  return cfg;
}

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("semkge-trainer-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

}  // namespace

TEST(SampleNegatives, TwoEntityScopeForcesTheOtherEntity) {
  Rng rng(1);
  // corrupt tail of (0, 0, 1) in a 2-entity scope: replacement must be 0
  for (int i = 0; i < 50; ++i) {
    const auto negs = sample_negatives({0, 0, 1}, 1, 2, {}, rng);
    ASSERT_EQ(negs.size(), 1u);
    const EntityId original = negs[0].corrupt_tail ? 1u : 0u;
    EXPECT_NE(negs[0].replacement, original);
    EXPECT_LT(negs[0].replacement, 2u);
    EXPECT_EQ(negs[0].corrupted().relation, 0u);
  }
}

TEST(SampleNegatives, DegenerateScopeRejected) {
  Rng rng(1);
  try {
    sample_negatives({0, 0, 0}, 1, 1, {}, rng);
    FAIL() << "expected degenerate_scope";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_scope);
  }
  const std::vector<EntityId> roster = {3};
  EXPECT_THROW(sample_negatives({3, 0, 3}, 1, 100, roster, rng), Error);
}

TEST(SampleNegatives, RosterScopeOnlyDrawsRosterEntities) {
  Rng rng(4);
  const std::vector<EntityId> roster = {2, 5, 9, 11};
  for (int i = 0; i < 200; ++i) {
    const auto negs = sample_negatives({2, 0, 5}, 3, 1000, roster, rng);
    for (const auto& ns : negs) {
      EXPECT_TRUE(std::count(roster.begin(), roster.end(), ns.replacement));
      EXPECT_NE(ns.replacement, ns.corrupt_tail ? 5u : 2u);
    }
  }
}

// Chi-squared uniformity of the replacement distribution at alpha = 0.01.
// Scope of 20 entities; per corrupted slot the replacement ranges over the 19
// non-original entities, so df = 18 and the critical value is 34.805.
TEST(SampleNegatives, ReplacementUniformityChiSquared) {
  Rng rng(2027);
  const Triple t{0, 0, 1};
  const std::size_t n_draws = 100000;
  std::vector<std::uint64_t> tail_hist(20, 0), head_hist(20, 0);
  std::uint64_t n_tail = 0;
  std::vector<NegativeSample> negs;
  for (std::size_t i = 0; i < n_draws; ++i) {
    sample_negatives(t, 1, 20, {}, rng, negs);
    if (negs[0].corrupt_tail) {
      ++n_tail;
      ++tail_hist[negs[0].replacement];
    } else {
      ++head_hist[negs[0].replacement];
    }
  }
  // slot is a fair coin: 4 sigma of Binomial(1e5, 0.5) is ~632
  EXPECT_NEAR(static_cast<double>(n_tail), 50000.0, 632.0);

  auto chi_squared = [](const std::vector<std::uint64_t>& hist, EntityId original,
                        std::uint64_t total) {
    const double expected = static_cast<double>(total) / 19.0;
    double chi = 0.0;
    for (EntityId e = 0; e < 20; ++e) {
      if (e == original) continue;
      const double d = static_cast<double>(hist[e]) - expected;
      chi += d * d / expected;
    }
    return chi;
  };
  EXPECT_EQ(tail_hist[1], 0u);
  EXPECT_EQ(head_hist[0], 0u);
  EXPECT_LT(chi_squared(tail_hist, 1, n_tail), 34.805);
  EXPECT_LT(chi_squared(head_hist, 0, n_draws - n_tail), 34.805);
}

TEST(Trainer, DegenerateParallelismMatchesReferenceLoop) {
  // W=1, k=1 partition: bit-identical to the sequential reference over 3
  // seeds, for both loss kinds and both optimizers.
  const TripleStore store = testutil::random_kg(100, 5, 1000, 1234);
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    for (const bool logistic : {false, true}) {
      TrainConfig cfg = toy_config();
      cfg.epochs = 3;
      cfg.seed = seed;
      if (logistic) {
        cfg.model = ModelKind::distmult();
        cfg.loss = LossKind::logistic;
        cfg.lambda = 1e-4;
        cfg.optimizer = OptimizerKind::adagrad;
        cfg.lr = 0.1;
      }
      const PartitionPlan plan = partition_random(store, 1, 0);
      Trainer trainer(store, plan, cfg);
      trainer.run();

      testutil::ReferenceTrainer reference(store, cfg);
      reference.run();

      EXPECT_TRUE(testutil::tables_equal(trainer.table(), reference.table()))
          << "seed " << seed << (logistic ? " logistic" : " margin");
      ASSERT_EQ(trainer.log().epochs.size(), reference.losses().size());
      for (std::size_t e = 0; e < reference.losses().size(); ++e)
        EXPECT_DOUBLE_EQ(trainer.log().epochs[e].mean_loss, reference.losses()[e]);
    }
  }
}

TEST(Trainer, SameSeedSameTable) {
  const TripleStore store = testutil::random_kg(40, 3, 200, 9);
  const PartitionPlan plan = partition_random(store, 2, 5);
  const TrainConfig cfg = toy_config();
  Trainer a(store, plan, cfg);
  a.run();
  Trainer b(store, plan, cfg);
  b.run();
  EXPECT_TRUE(testutil::tables_equal(a.table(), b.table()));
}

// A single positive+negatives step touches only the rows of the entities and
// relations involved.
TEST(Trainer, SparseUpdateTouchesOnlyInvolvedRows) {
  const TripleStore store = testutil::random_kg(60, 4, 300, 77);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg = toy_config();
  cfg.epochs = 1;
  cfg.max_steps = 1;  // exactly one positive
  cfg.seed = 21;
  Trainer trainer(store, plan, cfg);
  const EmbeddingTable before = trainer.table();
  trainer.run();
  const EmbeddingTable& after = trainer.table();

  // reconstruct which rows the first positive could touch by replaying the
  // schedule: slot shuffle, then negatives
  Rng rng(cfg.seed, 1);
  std::vector<std::uint32_t> slots(store.train().size());
  std::iota(slots.begin(), slots.end(), 0u);
  shuffle(slots, rng);
  const Triple pos = store.triples()[slots[0]];
  const auto negs = sample_negatives(pos, cfg.k_neg, store.num_entities(), {}, rng);
  std::set<EntityId> touched_entities{pos.head, pos.tail};
  for (const auto& ns : negs) touched_entities.insert(ns.replacement);

  for (EntityId e = 0; e < store.num_entities(); ++e) {
    bool changed = false;
    for (std::size_t j = 0; j < after.row_width(); ++j)
      changed |= after.entity_row(e)[j] != before.entity_row(e)[j];
    if (!touched_entities.count(e)) EXPECT_FALSE(changed) << "entity " << e;
  }
  for (RelationId r = 0; r < store.num_relations(); ++r) {
    bool changed = false;
    for (std::size_t j = 0; j < after.row_width(); ++j)
      changed |= after.relation_row(r)[j] != before.relation_row(r)[j];
    if (r != pos.relation) EXPECT_FALSE(changed) << "relation " << r;
  }
}

TEST(Trainer, ToyLossDecreasesMonotonically) {
  // enough negatives per positive to keep the per-epoch loss estimate tight;
  // the exact-structure toy then converges to zero hinge within the window
  const TripleStore store = testutil::chain_toy_kg();
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg = toy_config();
  cfg.epochs = 10;
  cfg.k_neg = 16;
  cfg.lr = 0.1;
  cfg.seed = 1;
  Trainer trainer(store, plan, cfg);
  trainer.run();
  const auto& epochs = trainer.log().epochs;
  ASSERT_EQ(epochs.size(), 10u);
  for (std::size_t e = 1; e < epochs.size(); ++e)
    EXPECT_LE(epochs[e].mean_loss, epochs[e - 1].mean_loss + 1e-12)
        << "loss went up at epoch " << e;
  EXPECT_LT(epochs.back().mean_loss, 1e-6);
}

TEST(Trainer, WorkersExceedPartitionsRejected) {
  const TripleStore store = testutil::random_kg(30, 2, 100, 3);
  const PartitionPlan plan = partition_random(store, 2, 1);
  TrainConfig cfg = toy_config();
  cfg.workers = 3;
  EXPECT_THROW(Trainer(store, plan, cfg), Error);
}

TEST(Trainer, MultiWorkerRunStaysFinite) {
  const TripleStore store = testutil::random_kg(80, 4, 600, 11);
  const PartitionPlan plan = partition_random(store, 4, 2);
  TrainConfig cfg = toy_config();
  cfg.workers = 4;
  cfg.epochs = 3;
  Trainer trainer(store, plan, cfg);
  trainer.run();
  EXPECT_TRUE(trainer.table().all_finite());
  EXPECT_EQ(trainer.log().epochs.size(), 3u);
  EXPECT_EQ(trainer.step(), 3u * store.train().size());
}

TEST(Trainer, PartitionLocalScopeUsesPartitionRoster) {
  // two far-apart entity blocks; partition-local negatives must stay in-block
  std::vector<RawTriple> train;
  for (int i = 0; i + 1 < 6; ++i)
    train.push_back({"a" + std::to_string(i), "r", "a" + std::to_string(i + 1)});
  for (int i = 0; i + 1 < 6; ++i)
    train.push_back({"b" + std::to_string(i), "r", "b" + std::to_string(i + 1)});
  const TripleStore store = TripleStore::from_splits(train, {}, {});
  // heads a* -> class A, b* -> class B
  std::vector<std::pair<std::string, std::string>> assertions;
  for (int i = 0; i < 6; ++i) {
    assertions.emplace_back("a" + std::to_string(i), "A");
    assertions.emplace_back("b" + std::to_string(i), "B");
  }
  const ClassHierarchy h = build_hierarchy(assertions, {}, store.entities());
  const ClassStats stats = class_frequencies(h);
  const PartitionPlan plan = partition_semantic(store, h, stats, 2);

  TrainConfig cfg = toy_config();
  cfg.scope = NegScope::partition_local;
  cfg.epochs = 2;
  Trainer trainer(store, plan, cfg);
  trainer.run();  // degenerate-scope would throw if rosters leaked across blocks
  EXPECT_TRUE(trainer.table().all_finite());
}

TEST(Trainer, BoundedNormsWithRegularization) {
  const TripleStore store = testutil::random_kg(50, 3, 400, 15);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg;
  cfg.model = ModelKind::distmult();
  cfg.loss = LossKind::logistic;
  cfg.dim = 8;
  cfg.epochs = 8;
  cfg.lr = 0.1;
  cfg.lambda = 0.01;
  cfg.seed = 5;
  Trainer trainer(store, plan, cfg);
  trainer.run();
  for (const auto& e : trainer.log().epochs)
    EXPECT_LT(e.mean_entity_sq_norm, 100.0) << "norm blow-up at epoch " << e.epoch;
}

TEST(Trainer, DivergenceAbortsWithStep) {
  const TripleStore store = testutil::random_kg(30, 2, 200, 7);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg;
  cfg.model = ModelKind::distmult();
  cfg.loss = LossKind::logistic;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.lr = 1e6;  // guaranteed blow-up
  cfg.seed = 2;
  Trainer trainer(store, plan, cfg);
  try {
    trainer.run();
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::diverged);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Checkpoint, ResumeReproducesUninterruptedRun) {
  const TripleStore store = testutil::random_kg(50, 3, 400, 20);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg = toy_config();
  cfg.epochs = 6;
  cfg.optimizer = OptimizerKind::adagrad;
  cfg.lr = 0.1;

  Trainer uninterrupted(store, plan, cfg);
  uninterrupted.run();

  TempDir tmp;
  {
    Trainer first_half(store, plan, cfg);
    first_half.run_until_step(3 * store.train().size());  // stop at an epoch boundary
    first_half.save_checkpoint(tmp.dir());
  }
  Trainer resumed = Trainer::resume(tmp.dir(), store, plan);
  EXPECT_EQ(resumed.epoch(), 3u);
  resumed.run();
  EXPECT_TRUE(testutil::tables_equal(uninterrupted.table(), resumed.table()));
  ASSERT_EQ(resumed.log().epochs.size(), uninterrupted.log().epochs.size());
  for (std::size_t e = 0; e < resumed.log().epochs.size(); ++e)
    EXPECT_DOUBLE_EQ(resumed.log().epochs[e].mean_loss,
                     uninterrupted.log().epochs[e].mean_loss);
}

TEST(Checkpoint, MidEpochResumeIsExact) {
  const TripleStore store = testutil::random_kg(40, 3, 200, 30);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg = toy_config();
  cfg.epochs = 4;

  Trainer uninterrupted(store, plan, cfg);
  uninterrupted.run();

  TempDir tmp;
  {
    Trainer partial(store, plan, cfg);
    partial.run_until_step(300);  // mid-epoch: 200 per epoch, stops inside epoch 2
    EXPECT_EQ(partial.step(), 300u);
    partial.save_checkpoint(tmp.dir());
  }
  Trainer resumed = Trainer::resume(tmp.dir(), store, plan);
  EXPECT_EQ(resumed.step(), 300u);
  resumed.run();
  EXPECT_EQ(resumed.step(), 4u * 200u);
  EXPECT_TRUE(testutil::tables_equal(uninterrupted.table(), resumed.table()));
}

TEST(Checkpoint, DimMismatchRejected) {
  const TripleStore store = testutil::random_kg(30, 2, 150, 40);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TrainConfig cfg = toy_config();
  cfg.epochs = 1;
  TempDir tmp;
  {
    Trainer t(store, plan, cfg);
    t.run();
    t.save_checkpoint(tmp.dir());
  }
  // a store with a different entity count no longer matches the table
  const TripleStore other = testutil::random_kg(31, 2, 150, 41);
  const PartitionPlan other_plan = partition_random(other, 1, 0);
  try {
    Trainer::resume(tmp.dir(), other, other_plan);
    FAIL() << "expected dim_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dim_mismatch);
  }
}

TEST(Checkpoint, MissingStateRejected) {
  const TripleStore store = testutil::random_kg(10, 2, 50, 1);
  const PartitionPlan plan = partition_random(store, 1, 0);
  TempDir tmp;
  EXPECT_THROW(Trainer::resume(tmp.dir(), store, plan), Error);
}

TEST(TrainConfigKv, ParseAndDefaults) {
  TempDir tmp;
  const fs::path p = tmp.dir() / "c.conf";
  {
    std::ofstream out(p);
    out << "# comment\nmodel = distmult\ndim= 32\nlr =0.25\nepochs=7\n";
  }
  const TrainConfig cfg = train_config_from_kv(KvConfig::parse_file(p));
  EXPECT_EQ(cfg.model.family, ModelKind::Family::distmult);
  EXPECT_EQ(cfg.dim, 32u);
  EXPECT_DOUBLE_EQ(cfg.lr, 0.25);
  EXPECT_EQ(cfg.epochs, 7u);
  EXPECT_EQ(cfg.loss, LossKind::logistic);  // default pairing for non-TransE

  KvConfig kv;
  kv.set("model", "transe");
  EXPECT_EQ(train_config_from_kv(kv).loss, LossKind::margin_ranking);
  kv.set("optimizer", "bogus");
  EXPECT_THROW(train_config_from_kv(kv), Error);
}
