// Drives the evid executable end to end through the shell.
#include "evid/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string kCli = EVID_CLI_PATH;

struct Result {
  int code;
  std::string err;
};

Result run(const std::string& args, const fs::path& scratch) {
  const fs::path err_file = scratch / "stderr.txt";
  const std::string cmd = "'" + kCli + "' " + args + " >/dev/null 2>'" + err_file.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, {}};
  std::ifstream in(err_file);
  std::stringstream buf;
  buf << in.rdbuf();
  r.err = buf.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("evid_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Every stage on a small corpus; returns relative path -> file contents.
  std::map<std::string, std::string> full_chain(const fs::path& dir) {
    const std::string d = dir.string();
    const std::pair<const char*, std::string> stages[] = {
        {"synth", "synth --seed 5 --out " + d + "/corpus --counts 6 6 --streams 8 --samples 120"},
        {"decompose", "decompose --seed 5 --events " + d + "/corpus --out " + d + "/decomp.json"},
        {"features", "features --seed 5 --decomp " + d + "/decomp.json --out-dir " + d + "/feats"},
        {"select", "select --seed 5 --train " + d + "/feats/features_train.csv --out " + d +
                       "/selection.csv --bootstraps 20"},
        {"train", "train --seed 5 --train " + d + "/feats/features_train.csv --selection " + d +
                      "/selection.csv --out " + d + "/model.txt --model svm"},
        {"eval", "eval --seed 5 --train " + d + "/feats/features_train.csv --test " + d +
                     "/feats/features_test.csv --selection " + d + "/selection.csv --out " + d +
                     "/eval.json --model both --bootstraps 5"},
        {"kfold", "kfold --seed 5 --features " + d + "/feats/features_all.csv --out " + d + "/kfold.csv --folds-out " +
                      d + "/kfold_rows.csv --folds 3"},
        {"baseline", "baseline --seed 5 --events " + d + "/corpus --out " + d + "/baseline.csv --folds-out " + d +
                         "/baseline_rows.csv --folds 3 --window 120"},
    };
    for (const auto& [name, args] : stages) {
      const Result r = run(args, root_);
      EXPECT_EQ(r.code, 0) << name << ": " << r.err;
    }
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    }
    return files;
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, ChainRerunIsByteIdentical) {
  const auto a = full_chain(root_ / "a");
  const auto b = full_chain(root_ / "b");
  ASSERT_EQ(a.size(), b.size());
  EXPECT_GE(a.size(), 12u + 4u);  // 12 event files plus manifest, config and stage outputs
  for (const auto& [name, content] : a) {
    ASSERT_TRUE(b.count(name)) << name;
    EXPECT_EQ(content, b.at(name)) << name << " differs between reruns";
  }
  EXPECT_NE(a.at("eval.json").find("svm_minus_lr_auc_mean"), std::string::npos);
}

TEST_F(CliTest, DifferentSeedChangesCorpus) {
  ASSERT_EQ(run("synth --seed 1 --out " + (root_ / "s1").string() + " --counts 1 1 --streams 2 --samples 10", root_).code, 0);
  ASSERT_EQ(run("synth --seed 2 --out " + (root_ / "s2").string() + " --counts 1 1 --streams 2 --samples 10", root_).code, 0);
  EXPECT_NE(slurp(root_ / "s1/events/evt-00000.csv"), slurp(root_ / "s2/events/evt-00000.csv"));
}

TEST_F(CliTest, NoiseFreeCorpusFitsExactly) {
  write_text(root_ / "cfg.json", R"({"synth": {"noise_free": true, "trend_free": true}})");
  const std::string cfg = "--config " + (root_ / "cfg.json").string();
  ASSERT_EQ(run("synth " + cfg + " --out " + (root_ / "c").string() + " --counts 2 2 --streams 6 --samples 200", root_).code, 0);
  const Result r = run("decompose " + cfg + " --events " + (root_ / "c").string() + " --out " +
                           (root_ / "d.json").string() + " --report " + (root_ / "diag.csv").string() +
                           " --detrend false --p 6",
                       root_);
  ASSERT_EQ(r.code, 0) << r.err;

  std::ifstream in(root_ / "diag.csv");
  std::string line;
  std::getline(in, line);  // magic
  std::getline(in, line);
  const auto header = evid::split_csv_line(line);
  std::size_t max_col = 0, curve_col = 0;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "max_E_i") max_col = j;
    if (header[j] == "E_p_1") curve_col = j;
  }
  ASSERT_GT(max_col, 0u);
  ASSERT_GT(curve_col, 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = evid::split_csv_line(line);
    EXPECT_LE(evid::parse_double(cells[max_col]), 1e-8) << line;
    for (std::size_t j = curve_col + 1; j < cells.size(); ++j) {
      EXPECT_LE(evid::parse_double(cells[j]), evid::parse_double(cells[j - 1]));
    }
    ++rows;
  }
  EXPECT_EQ(rows, 4 * 3);
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  write_text(root_ / "bad.json", "{\"pencil\": ");
  EXPECT_EQ(run("synth --config " + (root_ / "bad.json").string() + " --out " + (root_ / "x").string(), root_).code, 2);
  write_text(root_ / "typo.json", R"({"pencil": {"order": 6}})");
  const Result typo = run("synth --config " + (root_ / "typo.json").string() + " --out " + (root_ / "x").string(), root_);
  EXPECT_EQ(typo.code, 2);
  EXPECT_NE(typo.err.find("order"), std::string::npos);
  EXPECT_EQ(run("decompose --events " + (root_ / "missing").string() + " --out " + (root_ / "d.json").string(), root_).code, 2);
  EXPECT_EQ(run("select --train " + (root_ / "nope.csv").string() + " --out " + (root_ / "s.csv").string(), root_).code, 2);
  EXPECT_EQ(run("synth", root_).code, 2);
  EXPECT_EQ(run("frobnicate", root_).code, 2);
  EXPECT_FALSE(fs::exists(root_ / "x"));
}

TEST_F(CliTest, SchemaMismatchNamesTheColumn) {
  (void)full_chain(root_ / "a");
  std::string text = slurp(root_ / "a/feats/features_train.csv");
  const std::string sel = slurp(root_ / "a/selection.csv");
  // Rename the top-ranked column in the feature header.
  std::istringstream sel_in(sel);
  std::string line;
  std::getline(sel_in, line);
  std::getline(sel_in, line);
  std::getline(sel_in, line);
  const std::string name = evid::split_csv_line(line)[2];
  const auto pos = text.find("," + name + ",");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos + 1, name.size(), name + "_renamed");
  write_text(root_ / "renamed.csv", text);
  const Result r = run("train --train " + (root_ / "renamed.csv").string() + " --selection " +
                           (root_ / "a/selection.csv").string() + " --out " + (root_ / "m.txt").string(),
                       root_);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(root_ / "m.txt"));
}
