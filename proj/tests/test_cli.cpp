// End-to-end checks of the command line tool: spawns the real binary.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "readlevel/decode.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kCli = READLEVEL_CLI_PATH;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("rl_cli_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(kCli) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

}  // namespace

TEST(Cli, UnknownSubcommandExitsTwo) {
  const Sandbox box;
  EXPECT_EQ(run("frobnicate", box / "log.txt"), 2);
}

TEST(Cli, MissingRequiredOptionExitsTwo) {
  const Sandbox box;
  EXPECT_EQ(run("evaluate --gold only.tsv", box / "log.txt"), 2);
}

TEST(Cli, EvaluateSelfAgreementGivesPerfectQwk) {
  const Sandbox box;
  std::string gold, pred;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "DOC00" + std::to_string(10 + i) + "-S01";
    const int level = i % 19 + 1;
    gold += id + "\ttext\t" + std::to_string(level) + "\n";
    pred += id + "\t" + std::to_string(level) + "\n";
  }
  write_file(box / "gold.tsv", gold);
  write_file(box / "pred.tsv", pred);
  const int code = run("evaluate --gold " + (box / "gold.tsv").string() +
                           " --pred " + (box / "pred.tsv").string() +
                           " --json " + (box / "report.json").string(),
                       box / "log.txt");
  EXPECT_EQ(code, 0) << slurp(box / "log.txt");
  const json report = json::parse(slurp(box / "report.json"));
  EXPECT_DOUBLE_EQ(report.at("qwk").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(report.at("acc19").get<double>(), 1.0);
}

TEST(Cli, EvaluateMissingPredictionExitsOne) {
  const Sandbox box;
  write_file(box / "gold.tsv", "AAA0001-S01\tx\t5\nAAA0001-S02\ty\t6\n");
  write_file(box / "pred.tsv", "AAA0001-S01\t5\n");
  const int code = run("evaluate --gold " + (box / "gold.tsv").string() +
                           " --pred " + (box / "pred.tsv").string(),
                       box / "log.txt");
  EXPECT_EQ(code, 1);
  EXPECT_NE(slurp(box / "log.txt").find("AAA0001-S02"), std::string::npos);
}

TEST(Cli, WeightsMatchFormula) {
  const Sandbox box;
  std::string gold;
  int row = 0;
  for (int i = 0; i < 6; ++i) gold += "W000001-S0" + std::to_string(row++) + "\tx\t1\n";
  for (int i = 0; i < 4; ++i) gold += "W000002-S0" + std::to_string(row++) + "\tx\t2\n";
  for (int i = 0; i < 2; ++i) gold += "W000003-S0" + std::to_string(row++) + "\tx\t3\n";
  write_file(box / "gold.tsv", gold);
  const int code = run("weights --gold " + (box / "gold.tsv").string() +
                           " --out " + (box / "weights.json").string(),
                       box / "log.txt");
  ASSERT_EQ(code, 0) << slurp(box / "log.txt");
  const json w = json::parse(slurp(box / "weights.json"));
  EXPECT_EQ(w.at("n_samples").get<int>(), 12);
  EXPECT_NEAR(w.at("weights").at("1").get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(w.at("weights").at("3").get<double>(), 2.0, 1e-12);
}

TEST(Cli, ScaleAndRelabelRoundTrip) {
  const Sandbox box;
  // SAMER-scale source corpus
  write_file(box / "samer.tsv",
             "SAM0001-S01\talpha\t3\n"
             "SAM0001-S02\tbeta\t4\n"
             "SAM0002-S01\tgamma\t6\n");
  // scale it up to the 19-level range, snapping to integers
  int code = run("scale --in " + (box / "samer.tsv").string() +
                     " --from samer --to barec --round --out " +
                     (box / "scaled.tsv").string(),
                 box / "log.txt");
  ASSERT_EQ(code, 0) << slurp(box / "log.txt");
  EXPECT_EQ(slurp(box / "scaled.tsv"),
            "SAM0001-S01\talpha\t1\nSAM0001-S02\tbeta\t7\nSAM0002-S01\tgamma\t19\n");

  // scorer predictions on the 19-level scale covering every source item
  write_file(box / "pred.tsv",
             "SAM0001-S01\t1\nSAM0001-S02\t7\nSAM0002-S01\t19\n");
  code = run("relabel --source " + (box / "samer.tsv").string() + " --pred " +
                 (box / "pred.tsv").string() + " --out " +
                 (box / "merged.tsv").string(),
             box / "log.txt");
  ASSERT_EQ(code, 0) << slurp(box / "log.txt");
  EXPECT_EQ(slurp(box / "merged.tsv"),
            "SAM0001-S01\talpha\t1\nSAM0001-S02\tbeta\t7\nSAM0002-S01\tgamma\t19\n");
  EXPECT_NE(slurp(box / "log.txt").find("max deviation 0.0000"),
            std::string::npos);

  // gold-shaped files work as predictions too (only the label column counts)
  code = run("relabel --source " + (box / "samer.tsv").string() + " --pred " +
                 (box / "scaled.tsv").string() + " --out " +
                 (box / "merged_from_gold.tsv").string(),
             box / "log.txt");
  ASSERT_EQ(code, 0) << slurp(box / "log.txt");
  EXPECT_EQ(slurp(box / "merged_from_gold.tsv"), slurp(box / "merged.tsv"));

  // one uncovered id is a hard error
  write_file(box / "short.tsv", "SAM0001-S01\t1\nSAM0001-S02\t7\n");
  code = run("relabel --source " + (box / "samer.tsv").string() + " --pred " +
                 (box / "short.tsv").string() + " --out " +
                 (box / "merged2.tsv").string(),
             box / "log.txt");
  EXPECT_EQ(code, 1);
  EXPECT_NE(slurp(box / "log.txt").find("SAM0002-S01"), std::string::npos);
}

TEST(Cli, AggregateAppliesOverrideAndSkewReport) {
  const Sandbox box;
  // two documents of three sentences each
  write_file(box / "fused.tsv",
             "DOCAAAA-S01\t14.2\t14\n"
             "DOCAAAA-S02\t15.4\t15\n"
             "DOCAAAA-S03\t14.6\t15\n"
             "DOCBBBB-S01\t3.2\t3\n"
             "DOCBBBB-S02\t4.0\t4\n"
             "DOCBBBB-S03\t3.4\t3\n");
  // one model shouts 16 for the first document
  write_file(box / "model_a.tsv",
             "DOCAAAA-S01\t16\nDOCAAAA-S02\t16\nDOCAAAA-S03\t16\n"
             "DOCBBBB-S01\t3\nDOCBBBB-S02\t4\nDOCBBBB-S03\t3\n");
  const int code =
      run("aggregate --in " + (box / "fused.tsv").string() +
              " --strategy max --per-model " + (box / "model_a.tsv").string() +
              " --out " + (box / "docs.tsv").string() + " --skew-out " +
              (box / "skew.json").string(),
          box / "log.txt");
  ASSERT_EQ(code, 0) << slurp(box / "log.txt");
  EXPECT_EQ(slurp(box / "docs.tsv"), "DOCAAAA\t16\nDOCBBBB\t4\n");
  const json skew = json::parse(slurp(box / "skew.json"));
  EXPECT_EQ(skew.at("total").get<int>(), 2);
  EXPECT_EQ(skew.at("counts").at("16").get<int>(), 1);
}

TEST(Cli, FullToyPipelineRunsClean) {
  const Sandbox box;
  const std::string out = (box / "toy").string();
  int code = run("train-toy --out-dir " + out +
                     " --n 600 --dim 4 --seed 3 --epochs 3",
                 box / "toy.log");
  ASSERT_EQ(code, 0) << slurp(box / "toy.log");

  code = run("fuse --heads " + out + "/heads_ce.jsonl " + out +
                 "/heads_mse.jsonl " + out + "/heads_coral.jsonl" +
                 " --calibration " + out + "/calibration.json" +
                 " --use-raw --out " + (box / "fused.tsv").string(),
             box / "fuse.log");
  ASSERT_EQ(code, 0) << slurp(box / "fuse.log");

  code = run("aggregate --in " + (box / "fused.tsv").string() +
                 " --strategy mean-floor --out " + (box / "docs.tsv").string(),
             box / "agg.log");
  ASSERT_EQ(code, 0) << slurp(box / "agg.log");

  code = run("evaluate --gold " + out + "/gold_test.tsv --pred " +
                 (box / "fused.tsv").string() + " --json " +
                 (box / "report.json").string(),
             box / "eval.log");
  ASSERT_EQ(code, 0) << slurp(box / "eval.log");
  const json report = json::parse(slurp(box / "report.json"));
  EXPECT_GT(report.at("qwk").get<double>(), 0.5);

  // decode writes one row per (sentence, model)
  code = run("decode --heads " + out + "/heads_mse.jsonl --calibration " + out +
                 "/calibration.json --out " + (box / "decoded.tsv").string(),
             box / "decode.log");
  ASSERT_EQ(code, 0) << slurp(box / "decode.log");
  const auto decoded = readlevel::load_decoded(box / "decoded.tsv");
  EXPECT_FALSE(decoded.empty());
  for (const auto& d : decoded) EXPECT_EQ(d.model_id, "toy-mse");
}

TEST(Cli, CollapseMapsLoadFromDataDir) {
  const Sandbox box;
  write_file(box / "gold.tsv", "CLL0001-S01\tx\t2\nCLL0001-S02\ty\t18\n");
  write_file(box / "pred.tsv", "CLL0001-S01\t2\nCLL0001-S02\t18\n");
  const int code = run("evaluate --gold " + (box / "gold.tsv").string() +
                           " --pred " + (box / "pred.tsv").string() +
                           " --collapse " READLEVEL_DATA_DIR "/collapse",
                       box / "log.txt");
  EXPECT_EQ(code, 0) << slurp(box / "log.txt");
}
