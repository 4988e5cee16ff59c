#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "manifest.hpp"
#include "rassoc/report_io.hpp"
#include "support.hpp"

using namespace rassoc;
using namespace rassoc::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::istringstream in;
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CsvTable load_csv(const fs::path& p) {
  std::ifstream is(p);
  return read_csv(is);
}

// Scratch directory with a dataset and trained I->OR / R->O checkpoints.
class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(RASSOC_TEST_CACHE_DIR) / ("cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto r = run_cli({"gen", "--seed", "3", "--n", "30", "--out-dir", (dir_ / "data").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    dataset_ = (dir_ / "data" / "dataset.jsonl").string();
    gen_ = (dir_ / "i-or.ckpt").string();
    eval_ = (dir_ / "r-o.ckpt").string();
    save_checkpoint(gen_, quick_model(Mode::i_or));
    save_checkpoint(eval_, quick_model(Mode::r_o));
  }

  fs::path dir_;
  std::string dataset_, gen_, eval_;
};

}  // namespace

TEST(CliExit, UsageErrorsReturnOne) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"sweep", "--dataset", "x"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"gen", "--sufficiency", "2", "--out-dir", "/tmp/x"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"attr", "--dataset", "x", "--target", "ftp:thing", "--out-dir", "/tmp/x"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({"--version"}).out, std::string(cli::kToolkitVersion) + "\n");
}

TEST_F(CliFixture, DataAndModelErrorsReturnTwo) {
  const std::string untrained = (dir_ / "untrained.ckpt").string();
  save_checkpoint(untrained, random_model(1));
  const std::string out = (dir_ / "o").string();
  EXPECT_EQ(run_cli({"attr", "--dataset", dataset_, "--checkpoint", untrained, "--out-dir", out}).code,
            cli::kExitData);
  EXPECT_EQ(run_cli({"attr", "--dataset", (dir_ / "missing.jsonl").string(), "--checkpoint", gen_,
                     "--out-dir", out}).code,
            cli::kExitData);
  // Evaluator of the wrong mode.
  EXPECT_EQ(run_cli({"sweep", "--dataset", dataset_, "--checkpoint", gen_, "--evaluator", gen_,
                     "--out-dir", out}).code,
            cli::kExitData);
  EXPECT_EQ(run_cli({"serve", "--checkpoint", (dir_ / "missing.ckpt").string()}).code, cli::kExitData);
}

TEST_F(CliFixture, AttrIsByteIdenticalAcrossRunsAndReruns) {
  const auto a = dir_ / "a";
  const auto b = dir_ / "b";
  const auto c = dir_ / "c";
  ASSERT_EQ(run_cli({"attr", "--dataset", dataset_, "--checkpoint", gen_, "--out-dir", a.string()}).code, 0);
  ASSERT_EQ(run_cli({"attr", "--dataset", dataset_, "--checkpoint", gen_, "--out-dir", b.string()}).code, 0);
  const auto r = run_cli({"rerun", "--manifest", (a / "manifest.json").string(), "--out-dir", c.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"attributions.jsonl", "association.csv", "hist_kendall_tau.csv", "hist_cosine.csv",
                        "hist_jsd.csv", "hist_topk.csv", "attr_summary.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(c / f)) << f;
  }
  const auto m = cli::load_manifest(a / "manifest.json");
  EXPECT_EQ(m.command, "attr");
  EXPECT_EQ(m.outputs.at("association.csv"), cli::file_digest(a / "association.csv"));
  EXPECT_EQ(m.inputs.at(dataset_), cli::file_digest(dataset_));
  EXPECT_EQ(load_csv(a / "association.csv").comments.front(), m.csv_comment());
}

TEST_F(CliFixture, AssociationCsvRoundTrips) {
  const auto a = dir_ / "a";
  ASSERT_EQ(run_cli({"attr", "--dataset", dataset_, "--checkpoint", gen_, "--out-dir", a.string()}).code, 0);
  const CsvTable t = load_csv(a / "association.csv");
  EXPECT_EQ(association_table(association_records(t)).rows, t.rows);
  for (const char* col : {"kendall_tau_raw", "cosine_abs", "jsd_label_uniform"}) EXPECT_NO_THROW(t.column(col));
}

TEST_F(CliFixture, SweepBuiltinMatchesSpawnedTarget) {
  const auto a = dir_ / "builtin";
  const auto b = dir_ / "spawn";
  const std::vector<std::string> common = {"--dataset", dataset_, "--evaluator", eval_, "--seed", "4",
                                           "--sigma2-grid", "0,10,50", "--theta-label", "0.2",
                                           "--theta-rationale", "10"};
  auto args = common;
  args.insert(args.begin(), "sweep");
  auto builtin = args;
  builtin.insert(builtin.end(), {"--checkpoint", gen_, "--out-dir", a.string()});
  auto spawned = args;
  spawned.insert(spawned.end(), {"--target", std::string("spawn:") + RASSOC_CLI_PATH + " serve --checkpoint " + gen_,
                                 "--out-dir", b.string()});
  const auto ra = run_cli(builtin);
  ASSERT_EQ(ra.code, 0) << ra.err;
  const auto rb = run_cli(spawned);
  ASSERT_EQ(rb.code, 0) << rb.err;
  const CsvTable ta = load_csv(a / "sweep.csv");
  const CsvTable tb = load_csv(b / "sweep.csv");
  EXPECT_EQ(ta.header, tb.header);
  EXPECT_EQ(ta.rows, tb.rows);
  EXPECT_EQ(ta.rows.size(), 3u);
  const auto rows = sweep_rows(ta);
  EXPECT_EQ(rows.front().flip_rate, 0.0);
  EXPECT_EQ(rows.front().stability, StabilityCase::case1);
  EXPECT_EQ(ra.out, rb.out);
}

TEST_F(CliFixture, SpawnFailureIsADataError) {
  const auto r = run_cli({"attr", "--dataset", dataset_, "--target", "spawn:true", "--timeout-ms", "500",
                          "--out-dir", (dir_ / "x").string()});
  EXPECT_EQ(r.code, cli::kExitData);
}

TEST_F(CliFixture, TablesWriteBothExperiments) {
  const auto a = dir_ / "t";
  const auto r = run_cli({"tables", "--dataset", dataset_, "--which", "both", "--epochs", "1", "--patience", "1",
                          "--warmup-steps", "0", "--min-lr-ratio", "1", "--out-dir", a.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const CsvTable informed = load_csv(a / "label_informedness.csv");
  const CsvTable gap = load_csv(a / "sufficiency_gap.csv");
  const std::vector<std::string> cols = {"config", "accuracy", "delta", "evaluated", "parse_failures"};
  EXPECT_EQ(informed.header, cols);
  EXPECT_EQ(gap.header, cols);
  EXPECT_EQ(informed.rows.size(), 3u);
  EXPECT_EQ(gap.rows.size(), 2u);
  const auto rep = experiment_report(gap, "sufficiency gap");
  ASSERT_TRUE(rep.rows[1].delta.has_value());
  EXPECT_DOUBLE_EQ(*rep.rows[1].delta, compute_gap(rep.rows[0].accuracy, rep.rows[1].accuracy));
  for (const char* m : {"i-or", "i-r", "r-o", "ir-o"}) {
    EXPECT_TRUE(fs::exists(a / ("model-" + std::string(m) + ".ckpt"))) << m;
  }
}

TEST_F(CliFixture, TrainWritesCheckpointAndCurve) {
  const auto a = dir_ / "tr";
  const auto r = run_cli({"train", "--dataset", dataset_, "--mode", "r-o", "--epochs", "2", "--patience", "2",
                          "--out-dir", a.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(load_checkpoint(a / "model-r-o.ckpt").trained);
  EXPECT_EQ(load_csv(a / "train_curve.csv").rows.size(), 2u);
}
