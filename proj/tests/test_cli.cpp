// End-to-end checks of the command-line tool against the bundled toy dataset.
// The binary path and data locations come in through compile definitions.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(SEMKGE_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  std::string output;
  char buf[4096];
  while (fgets(buf, sizeof(buf), pipe)) output += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    base_ = fs::temp_directory_path() / ("semkge-cli-" + std::to_string(::getpid()) + "-" +
                                         ::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name());
    fs::create_directories(base_);
    data_flags_ = "--data-dir " + std::string(SEMKGE_TEST_DATA_DIR) + " --dataset toy";
  }
  void TearDown() override { fs::remove_all(base_); }

  fs::path out(const std::string& name) const { return base_ / name; }
  std::string data_flags_;
  fs::path base_;
};

}  // namespace

TEST_F(CliTest, UnknownFlagIsUsageError) {
  const RunResult r = run_cli("partition --definitely-not-a-flag");
  EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, MissingSubcommandIsUsageError) {
  const RunResult r = run_cli("");
  EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, AnalyzeClassesWritesReport) {
  const RunResult r =
      run_cli("analyze-classes " + data_flags_ + " --out " + out("a").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string tsv = slurp(out("a") / "classes.tsv");
  // sorted by closure count descending; Person (8 members via closure) tops it
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "Person\t0\t3\t8");
  EXPECT_TRUE(fs::exists(out("a") / "manifest.json"));
}

TEST_F(CliTest, PartitionIsByteDeterministic) {
  const std::string args = "partition " + data_flags_ + " --strategy random --k 4 --seed 7";
  const RunResult r1 = run_cli(args + " --out " + out("p1").string());
  const RunResult r2 = run_cli(args + " --out " + out("p2").string());
  ASSERT_EQ(r1.exit_code, 0) << r1.output;
  ASSERT_EQ(r2.exit_code, 0) << r2.output;
  EXPECT_EQ(slurp(out("p1") / "plan.tsv"), slurp(out("p2") / "plan.tsv"));
  EXPECT_EQ(slurp(out("p1") / "plan_meta.jsonl"), slurp(out("p2") / "plan_meta.jsonl"));
  EXPECT_NE(slurp(out("p1") / "plan.tsv"), "");
}

TEST_F(CliTest, SemanticPartitionMetaNamesClasses) {
  const RunResult r = run_cli("partition " + data_flags_ +
                              " --strategy semantic --k 3 --out " + out("ps").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::ifstream meta(out("ps") / "plan_meta.jsonl");
  std::string line;
  bool saw_writer = false;
  std::size_t objects = 0;
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    const json obj = json::parse(line);
    ++objects;
    EXPECT_TRUE(obj.contains("id"));
    EXPECT_TRUE(obj.contains("label"));
    EXPECT_TRUE(obj.contains("size"));
    EXPECT_TRUE(obj.contains("classes"));
    for (const auto& c : obj["classes"])
      if (c.get<std::string>() == "Writer") saw_writer = true;
  }
  EXPECT_EQ(objects, 3u);
  EXPECT_TRUE(saw_writer);
}

TEST_F(CliTest, SelectSubgraphWritesIndices) {
  const RunResult r =
      run_cli("select-subgraph " + data_flags_ +
              " --strategy semantic --class Person --p 0.5 --hops 1 --out " +
              out("sg").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::ifstream txt(out("sg") / "selected.txt");
  std::size_t count = 0;
  std::string line;
  while (std::getline(txt, line))
    if (!line.empty()) ++count;
  EXPECT_EQ(count, 12u);  // floor(0.5 * 24)
}

TEST_F(CliTest, TrainPipelineAndResume) {
  const std::string train_args = "train " + data_flags_ +
                                 " --strategy semantic --k 2 --seed 5 --set model=transe"
                                 " --set dim=8 --set epochs=4 --set lr=0.05 --set k_neg=2";
  const RunResult r = run_cli(train_args + " --out " + out("t1").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(out("t1") / "entity_embeddings.bin"));
  EXPECT_TRUE(fs::exists(out("t1") / "relation_embeddings.bin"));
  EXPECT_TRUE(fs::exists(out("t1") / "entity_dict.tsv"));
  EXPECT_TRUE(fs::exists(out("t1") / "state.json"));
  EXPECT_TRUE(fs::exists(out("t1") / "trainlog.jsonl"));
  EXPECT_TRUE(fs::exists(out("t1") / "manifest.json"));

  // manifest carries digests and the resolved config
  const json manifest = json::parse(slurp(out("t1") / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "train");
  EXPECT_EQ(manifest["config"]["dim"], 8);
  EXPECT_FALSE(manifest["inputs"].empty());

  // eval-lp over the trained table
  const RunResult e = run_cli("eval-lp " + data_flags_ + " --table " + out("t1").string() +
                              " --threads 1 --out " + out("e1").string());
  ASSERT_EQ(e.exit_code, 0) << e.output;
  const json report = json::parse(slurp(out("e1") / "report_lp.json"));
  EXPECT_EQ(report["setting"], "filtered");
  EXPECT_GT(report["mrr"].get<double>(), 0.0);
  EXPECT_EQ(report["queries"], 6);  // 3 test triples, tail + head

  // eval-et over the trained table
  const RunResult et = run_cli("eval-et " + data_flags_ + " --table " + out("t1").string() +
                               " --split-seed 3 --out " + out("et1").string());
  ASSERT_EQ(et.exit_code, 0) << et.output;
  const json et_report = json::parse(slurp(out("et1") / "report_et.json"));
  EXPECT_TRUE(et_report.contains("micro"));
  EXPECT_TRUE(et_report.contains("levels"));

  // resume on a finished run is a no-op that keeps the table intact
  const std::string before = slurp(out("t1") / "entity_embeddings.bin");
  const RunResult rr = run_cli("train " + data_flags_ + " --resume " + out("t1").string());
  ASSERT_EQ(rr.exit_code, 0) << rr.output;
  EXPECT_EQ(slurp(out("t1") / "entity_embeddings.bin"), before);
}

TEST_F(CliTest, DivergenceExitsWithCode3) {
  const RunResult r = run_cli("train " + data_flags_ +
                              " --strategy random --k 1 --seed 2 --set model=distmult"
                              " --set dim=8 --set epochs=50 --set lr=1e9 --out " +
                              out("dv").string());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.output.find("diverged"), std::string::npos);
}

TEST_F(CliTest, EvalWithoutTableIsDataError) {
  const RunResult r = run_cli("eval-lp " + data_flags_ + " --table " + out("missing").string() +
                              " --out " + out("e").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("error"), std::string::npos);
}

TEST_F(CliTest, PipelineProducesManifestAndReports) {
  const RunResult r = run_cli(
      "pipeline " + data_flags_ +
      " --strategy semantic --k 2 --workers 2 --seed 9 --set model=transe --set dim=8"
      " --set epochs=3 --set k_neg=1 --threads 1 --out " +
      out("pl").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(out("pl") / "plan.tsv"));
  EXPECT_TRUE(fs::exists(out("pl") / "entity_embeddings.bin"));
  EXPECT_TRUE(fs::exists(out("pl") / "report_lp.json"));
  EXPECT_TRUE(fs::exists(out("pl") / "report_et.json"));
  const json manifest = json::parse(slurp(out("pl") / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "pipeline");
  EXPECT_TRUE(manifest["timings_ms"].contains("partition"));
  EXPECT_TRUE(manifest["timings_ms"].contains("train"));
  EXPECT_TRUE(manifest["timings_ms"].contains("eval_lp"));
  EXPECT_EQ(manifest["config"]["workers"], 2);
}

TEST_F(CliTest, MalformedDatasetIsDataError) {
  const fs::path bad = base_ / "bad-data" / "broken";
  fs::create_directories(bad);
  std::ofstream(bad / "train.txt") << "only two\tfields\n";
  const RunResult r = run_cli("partition --data-dir " + (base_ / "bad-data").string() +
                              " --dataset broken --strategy random --k 1 --out " +
                              out("b").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find(":1:"), std::string::npos);  // line number in the message
}
