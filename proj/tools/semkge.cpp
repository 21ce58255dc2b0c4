// semkge: partitioned parallel training of knowledge-graph embeddings with
// ontology-class (semantic) partitioning, plus link-prediction and
// entity-typing evaluation.
//
// Subcommands: analyze-classes, partition, select-subgraph, train, eval-lp,
// eval-et, pipeline. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numerical divergence.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semkge/semkge.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> g_argv;  // raw invocation, recorded in manifests

struct CommonOpts {
  std::string data_dir;
  std::string dataset;
  std::string out_dir;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_dataset = true) {
  cmd->add_option("--data-dir", opts.data_dir, "dataset root (env SEMKGE_DATA_DIR)")
      ->envname("SEMKGE_DATA_DIR");
  auto* ds = cmd->add_option("--dataset", opts.dataset, "dataset directory name under data-dir");
  if (need_dataset) ds->required();
  cmd->add_option("--out", opts.out_dir, "run output directory (default runs/<time>-seed<seed>)");
  cmd->add_option("--seed", opts.seed, "seed for every randomized stage");
}

fs::path resolve_out_dir(const CommonOpts& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return fs::path("runs") / (std::string(buf) + "-seed" + std::to_string(opts.seed));
}

fs::path dataset_dir(const CommonOpts& opts) {
  const fs::path root = opts.data_dir.empty() ? fs::path("data") : fs::path(opts.data_dir);
  return root / opts.dataset;
}

semkge::DatasetLayout load_layout(const CommonOpts& opts, semkge::RunManifest& manifest) {
  semkge::DatasetLayout layout = semkge::DatasetLayout::at(dataset_dir(opts));
  manifest.add_input(layout.train);
  manifest.add_input(layout.valid);
  manifest.add_input(layout.test);
  manifest.add_input(layout.types);
  manifest.add_input(layout.hierarchy);
  return layout;
}

struct HierarchyBundle {
  semkge::ClassHierarchy hierarchy;
  semkge::ClassStats stats;
};

HierarchyBundle load_hierarchy(const semkge::DatasetLayout& layout,
                               const semkge::TripleStore& store) {
  if (!layout.has_types())
    semkge::fail(semkge::Errc::io, "dataset has no types.txt (required for semantic operations)");
  const auto assertions = semkge::parse_type_file(layout.types);
  std::vector<std::pair<std::string, std::string>> edges;
  if (layout.has_hierarchy()) edges = semkge::parse_hierarchy_file(layout.hierarchy);
  HierarchyBundle bundle{semkge::build_hierarchy(assertions, edges, store.entities()), {}};
  bundle.stats = semkge::class_frequencies(bundle.hierarchy);
  if (bundle.hierarchy.skipped_assertions() > 0) {
    std::cerr << "note: skipped " << bundle.hierarchy.skipped_assertions()
              << " type assertions for entities absent from the dataset\n";
  }
  return bundle;
}

// --- subcommand payloads -------------------------------------------------------

struct PartitionOpts {
  std::string strategy = "semantic";
  std::uint32_t k = 8;
  bool by_tail = false;
};

semkge::PartitionPlan build_plan(const PartitionOpts& popts, const CommonOpts& opts,
                                 const semkge::TripleStore& store,
                                 const semkge::DatasetLayout& layout) {
  if (popts.strategy == "random") return semkge::partition_random(store, popts.k, opts.seed);
  if (popts.strategy != "semantic")
    semkge::fail(semkge::Errc::invalid_argument, "strategy must be semantic or random");
  HierarchyBundle bundle = load_hierarchy(layout, store);
  return semkge::partition_semantic(store, bundle.hierarchy, bundle.stats, popts.k,
                                    popts.by_tail);
}

void print_plan_stats(const semkge::PartitionPlan& plan, const semkge::TripleStore& store) {
  const semkge::PlanStats stats = semkge::plan_stats(plan, store);
  std::printf("partitions: %u  strategy: %s\n", plan.num_partitions,
              semkge::strategy_name(plan.strategy));
  std::printf("balance (max/mean): %.4f  entity overlap: %.4f\n", stats.balance,
              stats.entity_overlap);
  const std::size_t show = std::min<std::size_t>(plan.num_partitions, 12);
  for (std::size_t p = 0; p < show; ++p) {
    std::printf("  %4zu  %-28s %10llu triples  %zu classes\n", p, plan.meta[p].label.c_str(),
                static_cast<unsigned long long>(plan.meta[p].size), plan.meta[p].classes.size());
  }
  if (show < plan.num_partitions)
    std::printf("  ... %u more partitions\n", plan.num_partitions - static_cast<unsigned>(show));
}

int cmd_analyze_classes(const CommonOpts& opts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "analyze-classes";
  manifest.started_utc = semkge::RunManifest::now_utc();
  manifest.seeds["seed"] = opts.seed;
  const fs::path out = resolve_out_dir(opts);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);
  HierarchyBundle bundle = load_hierarchy(layout, store);

  const auto rows = semkge::class_report_rows(bundle.hierarchy, bundle.stats);
  fs::create_directories(out);
  {
    std::ofstream tsv(out / "classes.tsv", std::ios::binary);
    for (const auto& row : rows) {
      tsv << bundle.hierarchy.classes().at(row.id) << '\t' << row.depth << '\t'
          << row.direct_count << '\t' << row.closure_count << '\n';
    }
  }
  std::printf("%zu classes over %zu entities (report: %s)\n", rows.size(),
              store.num_entities(), (out / "classes.tsv").c_str());
  std::printf("%-32s %6s %10s %10s\n", "class", "depth", "direct", "closure");
  for (std::size_t i = 0; i < std::min<std::size_t>(rows.size(), 20); ++i) {
    std::printf("%-32s %6u %10llu %10llu\n",
                bundle.hierarchy.classes().at(rows[i].id).c_str(), rows[i].depth,
                static_cast<unsigned long long>(rows[i].direct_count),
                static_cast<unsigned long long>(rows[i].closure_count));
  }
  manifest.config = json{{"dataset", opts.dataset}};
  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  return 0;
}

int cmd_partition(const CommonOpts& opts, const PartitionOpts& popts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "partition";
  manifest.started_utc = semkge::RunManifest::now_utc();
  manifest.seeds["seed"] = opts.seed;
  const fs::path out = resolve_out_dir(opts);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);

  semkge::PartitionPlan plan;
  {
    semkge::StageTimer timer(manifest, "partition");
    plan = build_plan(popts, opts, store, layout);
  }
  fs::create_directories(out);
  const semkge::ClassHierarchy* hier = nullptr;
  std::optional<HierarchyBundle> bundle;
  if (plan.strategy == semkge::PartitionStrategy::semantic) {
    bundle = load_hierarchy(layout, store);  // for class names in the meta file
    hier = &bundle->hierarchy;
  }
  semkge::write_plan(plan, hier, out / "plan.tsv", out / "plan_meta.jsonl");
  print_plan_stats(plan, store);

  manifest.config = json{{"dataset", opts.dataset},
                         {"strategy", popts.strategy},
                         {"k", popts.k},
                         {"by_tail", popts.by_tail}};
  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  return 0;
}

struct SubgraphOpts {
  double p = 1.0;
  std::string target_class;
  std::uint32_t hops = 0;
  std::string strategy = "semantic";
};

int cmd_select_subgraph(const CommonOpts& opts, const SubgraphOpts& sopts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "select-subgraph";
  manifest.started_utc = semkge::RunManifest::now_utc();
  manifest.seeds["seed"] = opts.seed;
  const fs::path out = resolve_out_dir(opts);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);

  std::vector<std::uint32_t> selected;
  {
    semkge::StageTimer timer(manifest, "select");
    if (sopts.strategy == "random") {
      selected = semkge::select_random(store, sopts.p, opts.seed);
    } else if (sopts.strategy == "semantic") {
      HierarchyBundle bundle = load_hierarchy(layout, store);
      const auto cls = bundle.hierarchy.classes().find(sopts.target_class);
      if (!cls)
        semkge::fail(semkge::Errc::invalid_argument,
                     "unknown class: " + sopts.target_class);
      selected = semkge::select_semantic(store, bundle.hierarchy,
                                         semkge::SelectionBudget{sopts.p, *cls, sopts.hops});
    } else {
      semkge::fail(semkge::Errc::invalid_argument, "strategy must be semantic or random");
    }
  }
  fs::create_directories(out);
  {
    std::ofstream txt(out / "selected.txt", std::ios::binary);
    for (std::uint32_t i : selected) txt << i << '\n';
  }
  std::printf("selected %zu of %zu training triples -> %s\n", selected.size(),
              store.train().size(), (out / "selected.txt").c_str());

  manifest.config = json{{"dataset", opts.dataset},
                         {"strategy", sopts.strategy},
                         {"p", sopts.p},
                         {"class", sopts.target_class},
                         {"hops", sopts.hops}};
  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  return 0;
}

struct TrainOpts {
  std::string config_path;
  std::string model;  // preset lookup: <dataset>.<model>.conf
  std::string plan_dir;
  std::string resume_dir;
  PartitionOpts partition;  // used when no plan_dir given
  std::vector<std::string> overrides;  // key=value pairs from --set
};

semkge::TrainConfig resolve_train_config(const CommonOpts& opts, const TrainOpts& topts,
                                         semkge::RunManifest& manifest) {
  semkge::KvConfig kv;
  if (!topts.config_path.empty()) {
    kv = semkge::KvConfig::parse_file(topts.config_path);
    manifest.add_input(topts.config_path);
  } else if (!topts.model.empty()) {
    const fs::path preset = semkge::preset_path(opts.dataset, topts.model);
    if (fs::exists(preset)) {
      kv = semkge::KvConfig::parse_file(preset);
      manifest.add_input(preset);
    } else {
      kv.set("model", topts.model);
    }
  }
  for (const std::string& kvpair : topts.overrides) {
    const auto eq = kvpair.find('=');
    if (eq == std::string::npos)
      semkge::fail(semkge::Errc::invalid_argument, "--set expects key=value, got " + kvpair);
    kv.set(kvpair.substr(0, eq), kvpair.substr(eq + 1));
  }
  if (!kv.has("seed")) kv.set("seed", std::to_string(opts.seed));
  return semkge::train_config_from_kv(kv);
}

int cmd_train(const CommonOpts& opts, const TrainOpts& topts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "train";
  manifest.started_utc = semkge::RunManifest::now_utc();
  const fs::path out =
      topts.resume_dir.empty() ? resolve_out_dir(opts) : fs::path(topts.resume_dir);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);

  semkge::PartitionPlan plan;
  if (!topts.resume_dir.empty()) {
    plan = semkge::read_plan(out / "plan.tsv", out / "plan_meta.jsonl");
  } else if (!topts.plan_dir.empty()) {
    plan = semkge::read_plan(fs::path(topts.plan_dir) / "plan.tsv",
                             fs::path(topts.plan_dir) / "plan_meta.jsonl");
    manifest.add_input(fs::path(topts.plan_dir) / "plan.tsv");
  } else {
    semkge::StageTimer timer(manifest, "partition");
    plan = build_plan(topts.partition, opts, store, layout);
  }

  std::optional<semkge::Trainer> trainer;
  if (!topts.resume_dir.empty()) {
    trainer.emplace(semkge::Trainer::resume(out, store, plan));
    std::printf("resuming at epoch %u, step %llu\n", trainer->epoch(),
                static_cast<unsigned long long>(trainer->step()));
  } else {
    const semkge::TrainConfig cfg = resolve_train_config(opts, topts, manifest);
    trainer.emplace(store, plan, cfg);
  }
  manifest.seeds["seed"] = trainer->config().seed;
  manifest.config = semkge::detail::config_to_json(trainer->config());

  {
    semkge::StageTimer timer(manifest, "train");
    trainer->run();
  }
  for (const auto& e : trainer->log().epochs) {
    std::printf("epoch %4u  mean_loss %.6f  wall %llu ms\n", e.epoch, e.mean_loss,
                static_cast<unsigned long long>(e.wall_ms));
  }

  fs::create_directories(out);
  if (topts.resume_dir.empty() && topts.plan_dir.empty()) {
    const semkge::ClassHierarchy* hier = nullptr;
    std::optional<HierarchyBundle> bundle;
    if (plan.strategy == semkge::PartitionStrategy::semantic) {
      bundle = load_hierarchy(layout, store);
      hier = &bundle->hierarchy;
    }
    semkge::write_plan(plan, hier, out / "plan.tsv", out / "plan_meta.jsonl");
  } else if (!topts.plan_dir.empty()) {
    fs::copy_file(fs::path(topts.plan_dir) / "plan.tsv", out / "plan.tsv",
                  fs::copy_options::overwrite_existing);
    fs::copy_file(fs::path(topts.plan_dir) / "plan_meta.jsonl", out / "plan_meta.jsonl",
                  fs::copy_options::overwrite_existing);
  }
  semkge::write_embeddings(trainer->table(), store.entities(), store.relations(), out);
  trainer->save_checkpoint(out);
  trainer->log().write_jsonl(out / "trainlog.jsonl");
  std::printf("table written to %s\n", out.c_str());

  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  return 0;
}

struct EvalOpts {
  std::string table_dir;
  bool raw = false;
  unsigned threads = 0;
  std::uint64_t split_seed = 0;
};

int cmd_eval_lp(const CommonOpts& opts, const EvalOpts& eopts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "eval-lp";
  manifest.started_utc = semkge::RunManifest::now_utc();
  manifest.seeds["seed"] = opts.seed;
  const fs::path out = resolve_out_dir(opts);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);

  const semkge::EmbeddingTable table = semkge::read_embeddings(eopts.table_dir);
  manifest.add_input(fs::path(eopts.table_dir) / "entity_embeddings.bin");

  // model kind from the checkpoint state when present, else TransE-L2 default
  semkge::ModelKind model = semkge::ModelKind::transe(semkge::Norm::l2, 1.0);
  const fs::path state_path = fs::path(eopts.table_dir) / "state.json";
  if (fs::exists(state_path)) {
    std::ifstream in(state_path);
    const json state = json::parse(in, nullptr, false);
    if (!state.is_discarded() && state.contains("config")) {
      model = semkge::detail::model_from_name(
          state["config"]["model"].get<std::string>(),
          state["config"].value("gamma", 1.0));
    }
  }

  semkge::EvalReport report;
  {
    semkge::StageTimer timer(manifest, "eval_lp");
    report = semkge::eval_lp(model, table, store, !eopts.raw, eopts.threads);
  }

  std::printf("%-10s %10s %10s %10s %10s %10s\n", "setting", "queries", "MRR", "Hits@1",
              "Hits@3", "Hits@10");
  std::printf("%-10s %10llu %10.4f %10.4f %10.4f %10.4f\n",
              report.filtered ? "filtered" : "raw",
              static_cast<unsigned long long>(report.query_count), report.mrr,
              report.hits_at.at(1), report.hits_at.at(3), report.hits_at.at(10));

  json j;
  j["setting"] = report.filtered ? "filtered" : "raw";
  j["model"] = model.name();
  j["mrr"] = report.mrr;
  j["hits"] = {{"1", report.hits_at.at(1)}, {"3", report.hits_at.at(3)},
               {"10", report.hits_at.at(10)}};
  j["queries"] = report.query_count;
  json rels = json::array();
  for (const auto& row : report.per_relation) {
    rels.push_back(json{{"relation", store.relations().at(row.relation)},
                        {"queries", row.queries},
                        {"mrr", row.mrr},
                        {"hits10", row.hits10}});
  }
  j["per_relation"] = std::move(rels);
  fs::create_directories(out);
  std::ofstream(out / "report_lp.json") << j.dump(2) << '\n';

  manifest.config = json{{"dataset", opts.dataset}, {"table", eopts.table_dir},
                         {"setting", report.filtered ? "filtered" : "raw"}};
  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  return 0;
}

int cmd_eval_et(const CommonOpts& opts, const EvalOpts& eopts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "eval-et";
  manifest.started_utc = semkge::RunManifest::now_utc();
  manifest.seeds["split_seed"] = eopts.split_seed;
  const fs::path out = resolve_out_dir(opts);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);
  HierarchyBundle bundle = load_hierarchy(layout, store);

  const semkge::EmbeddingTable table = semkge::read_embeddings(eopts.table_dir);
  manifest.add_input(fs::path(eopts.table_dir) / "entity_embeddings.bin");

  semkge::TypingReport report;
  {
    semkge::StageTimer timer(manifest, "eval_et");
    report = semkge::eval_typing(table, bundle.hierarchy, bundle.stats, eopts.split_seed);
  }

  std::printf("labeled entities: %llu   classes evaluated: %zu   skipped (<10 positives): %zu\n",
              static_cast<unsigned long long>(report.labeled_entities),
              report.per_class.size(), report.skipped.size());
  std::printf("%-8s %8s %10s %10s %10s\n", "level", "classes", "P", "R", "F1");
  for (const auto& lvl : report.per_level) {
    std::printf("%-8u %8llu %10.4f %10.4f %10.4f\n", lvl.depth,
                static_cast<unsigned long long>(lvl.classes), lvl.precision, lvl.recall,
                lvl.f1);
  }
  std::printf("%-8s %8s %10.4f %10.4f %10.4f\n", "micro", "-", report.micro_precision,
              report.micro_recall, report.micro_f1);

  json j;
  j["micro"] = {{"precision", report.micro_precision},
                {"recall", report.micro_recall},
                {"f1", report.micro_f1}};
  json levels = json::array();
  for (const auto& lvl : report.per_level) {
    levels.push_back(json{{"depth", lvl.depth},
                          {"classes", lvl.classes},
                          {"precision", lvl.precision},
                          {"recall", lvl.recall},
                          {"f1", lvl.f1}});
  }
  j["levels"] = std::move(levels);
  json classes = json::array();
  for (const auto& row : report.per_class) {
    classes.push_back(json{{"class", bundle.hierarchy.classes().at(row.id)},
                           {"depth", row.depth},
                           {"positives", row.positives},
                           {"tp", row.tp},
                           {"fp", row.fp},
                           {"fn", row.fn},
                           {"precision", row.precision},
                           {"recall", row.recall},
                           {"f1", row.f1}});
  }
  j["classes"] = std::move(classes);
  json skipped = json::array();
  for (semkge::ClassId c : report.skipped) skipped.push_back(bundle.hierarchy.classes().at(c));
  j["skipped"] = std::move(skipped);
  fs::create_directories(out);
  std::ofstream(out / "report_et.json") << j.dump(2) << '\n';

  manifest.config = json{{"dataset", opts.dataset}, {"table", eopts.table_dir}};
  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  return 0;
}

int cmd_pipeline(const CommonOpts& opts, const TrainOpts& topts, const EvalOpts& eopts) {
  semkge::RunManifest manifest;
  manifest.argv = g_argv;
  manifest.subcommand = "pipeline";
  manifest.started_utc = semkge::RunManifest::now_utc();
  manifest.seeds["seed"] = opts.seed;
  const fs::path out = resolve_out_dir(opts);

  const semkge::DatasetLayout layout = load_layout(opts, manifest);
  const semkge::TripleStore store = semkge::load_dataset(layout);

  semkge::PartitionPlan plan;
  {
    semkge::StageTimer timer(manifest, "partition");
    plan = build_plan(topts.partition, opts, store, layout);
  }
  fs::create_directories(out);
  {
    const semkge::ClassHierarchy* hier = nullptr;
    std::optional<HierarchyBundle> bundle;
    if (plan.strategy == semkge::PartitionStrategy::semantic) {
      bundle = load_hierarchy(layout, store);
      hier = &bundle->hierarchy;
    }
    semkge::write_plan(plan, hier, out / "plan.tsv", out / "plan_meta.jsonl");
  }
  print_plan_stats(plan, store);

  const semkge::TrainConfig cfg = resolve_train_config(opts, topts, manifest);
  manifest.config = semkge::detail::config_to_json(cfg);
  semkge::Trainer trainer(store, plan, cfg);
  {
    semkge::StageTimer timer(manifest, "train");
    trainer.run();
  }
  if (!trainer.log().epochs.empty()) {
    const auto& last = trainer.log().epochs.back();
    std::printf("trained %zu epochs, final mean_loss %.6f\n", trainer.log().epochs.size(),
                last.mean_loss);
  }
  semkge::write_embeddings(trainer.table(), store.entities(), store.relations(), out);
  trainer.save_checkpoint(out);
  trainer.log().write_jsonl(out / "trainlog.jsonl");

  if (store.test().size() > 0) {
    semkge::EvalReport report;
    {
      semkge::StageTimer timer(manifest, "eval_lp");
      report = semkge::eval_lp(cfg.model, trainer.table(), store, !eopts.raw, eopts.threads);
    }
    std::printf("filtered MRR %.4f  Hits@1 %.4f  Hits@3 %.4f  Hits@10 %.4f\n", report.mrr,
                report.hits_at.at(1), report.hits_at.at(3), report.hits_at.at(10));
    json j;
    j["setting"] = report.filtered ? "filtered" : "raw";
    j["model"] = cfg.model.name();
    j["mrr"] = report.mrr;
    j["hits"] = {{"1", report.hits_at.at(1)}, {"3", report.hits_at.at(3)},
                 {"10", report.hits_at.at(10)}};
    j["queries"] = report.query_count;
    std::ofstream(out / "report_lp.json") << j.dump(2) << '\n';
  }

  if (layout.has_types()) {
    HierarchyBundle bundle = load_hierarchy(layout, store);
    semkge::TypingReport report;
    {
      semkge::StageTimer timer(manifest, "eval_et");
      report = semkge::eval_typing(trainer.table(), bundle.hierarchy, bundle.stats,
                                   eopts.split_seed);
    }
    std::printf("entity typing micro-F1 %.4f over %zu classes\n", report.micro_f1,
                report.per_class.size());
    json j;
    j["micro"] = {{"precision", report.micro_precision},
                  {"recall", report.micro_recall},
                  {"f1", report.micro_f1}};
    std::ofstream(out / "report_et.json") << j.dump(2) << '\n';
  }

  manifest.finished_utc = semkge::RunManifest::now_utc();
  manifest.write(out);
  std::printf("run artifacts in %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic-partitioned knowledge graph embedding trainer"};
  app.require_subcommand(1);

  CommonOpts common;
  PartitionOpts partition_opts;
  SubgraphOpts subgraph_opts;
  TrainOpts train_opts;
  EvalOpts eval_opts;
  std::string workers_override;

  auto* analyze = app.add_subcommand("analyze-classes", "class frequency/depth report");
  add_common(analyze, common);

  auto* partition = app.add_subcommand("partition", "build a partition plan");
  add_common(partition, common);
  partition->add_option("--strategy", partition_opts.strategy, "semantic | random")
      ->check(CLI::IsMember({"semantic", "random"}));
  partition->add_option("--k", partition_opts.k, "number of partitions")->required();
  partition->add_flag("--by-tail", partition_opts.by_tail,
                      "ablation: partition by tail-entity class");

  auto* select = app.add_subcommand("select-subgraph", "budgeted subgraph selection");
  add_common(select, common);
  select->add_option("--p", subgraph_opts.p, "fraction of training triples, (0,1]")->required();
  select->add_option("--class", subgraph_opts.target_class, "target class name");
  select->add_option("--hops", subgraph_opts.hops, "BFS hops around target entities");
  select->add_option("--strategy", subgraph_opts.strategy, "semantic | random")
      ->check(CLI::IsMember({"semantic", "random"}));

  auto* train = app.add_subcommand("train", "train embeddings over a partition plan");
  add_common(train, common);
  train->add_option("--config", train_opts.config_path, "key=value config file");
  train->add_option("--model", train_opts.model, "model preset: transe | distmult | complex");
  train->add_option("--plan-dir", train_opts.plan_dir, "directory with plan.tsv/plan_meta.jsonl");
  train->add_option("--resume", train_opts.resume_dir, "resume from a checkpoint directory");
  train->add_option("--strategy", train_opts.partition.strategy,
                    "inline partitioning when no --plan-dir: semantic | random")
      ->check(CLI::IsMember({"semantic", "random"}));
  train->add_option("--k", train_opts.partition.k, "inline partition count");
  train->add_option("--workers", workers_override, "parallel training workers");
  train->add_option("--set", train_opts.overrides,
                    "override config keys, e.g. --set epochs=50 --set lr=0.05")
      ->take_all();

  auto* eval_lp = app.add_subcommand("eval-lp", "link prediction: MRR and Hits@K");
  add_common(eval_lp, common);
  eval_lp->add_option("--table", eval_opts.table_dir, "directory with trained embeddings")
      ->required();
  eval_lp->add_flag("--raw", eval_opts.raw, "raw setting (no filtering)");
  eval_lp->add_option("--threads", eval_opts.threads, "evaluation threads (0 = hardware)");

  auto* eval_et = app.add_subcommand("eval-et", "entity typing: per-class and per-level P/R/F1");
  add_common(eval_et, common);
  eval_et->add_option("--table", eval_opts.table_dir, "directory with trained embeddings")
      ->required();
  eval_et->add_option("--split-seed", eval_opts.split_seed, "entity split seed");

  auto* pipeline = app.add_subcommand("pipeline", "partition -> train -> eval in one run");
  add_common(pipeline, common);
  pipeline->add_option("--strategy", train_opts.partition.strategy, "semantic | random")
      ->check(CLI::IsMember({"semantic", "random"}));
  pipeline->add_option("--k", train_opts.partition.k, "number of partitions");
  pipeline->add_option("--model", train_opts.model,
                       "model preset: transe | distmult | complex");
  pipeline->add_option("--config", train_opts.config_path, "key=value config file");
  pipeline->add_option("--workers", workers_override, "parallel training workers");
  pipeline->add_option("--set", train_opts.overrides,
                       "override config keys, e.g. --set epochs=50")
      ->take_all();
  pipeline->add_flag("--raw", eval_opts.raw, "evaluate in the raw setting");
  pipeline->add_option("--threads", eval_opts.threads, "evaluation threads");
  pipeline->add_option("--split-seed", eval_opts.split_seed, "entity-typing split seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (int i = 0; i < argc; ++i) g_argv.push_back(argv[i]);
  if (!workers_override.empty()) train_opts.overrides.push_back("workers=" + workers_override);

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze_classes(common);
    if (app.got_subcommand(partition)) return cmd_partition(common, partition_opts);
    if (app.got_subcommand(select)) return cmd_select_subgraph(common, subgraph_opts);
    if (app.got_subcommand(train)) return cmd_train(common, train_opts);
    if (app.got_subcommand(eval_lp)) return cmd_eval_lp(common, eval_opts);
    if (app.got_subcommand(eval_et)) return cmd_eval_et(common, eval_opts);
    if (app.got_subcommand(pipeline)) return cmd_pipeline(common, train_opts, eval_opts);
  } catch (const semkge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == semkge::Errc::diverged ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
