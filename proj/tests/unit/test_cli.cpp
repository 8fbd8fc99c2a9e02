#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "a2net/cli.hpp"
#include "test_util.hpp"

namespace a2net {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::vector<std::string> kTiny = {"--dim", "8", "--hidden", "6", "--dim-pos", "4", "--mask-dim", "4",
                                        "--max-offset", "3"};

std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

TEST(Cli, GradcheckPasses) {
  const auto r = run({"gradcheck", "--seed", "3", "--dim", "16", "--hidden", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LE(j["max_rel_error"].get<double>(), 1e-4);
}

TEST(Cli, SynthIsReproducible) {
  test::TempDir dir;
  const auto a = (dir / "a.jsonl").string();
  const auto b = (dir / "b.jsonl").string();
  ASSERT_EQ(run({"synth", "--num-docs", "20", "--seed", "5", "--out", a}).code, 0);
  ASSERT_EQ(run({"synth", "--num-docs", "20", "--seed", "5", "--out", b}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  const auto c = run({"synth", "--num-docs", "20", "--seed", "6"});
  EXPECT_NE(c.out, slurp(a));
}

TEST(Cli, TrainThenEvaluate) {
  test::TempDir dir;
  const auto corpus = (dir / "c.jsonl").string();
  ASSERT_EQ(run({"synth", "--num-docs", "12", "--seed", "1", "--out", corpus}).code, 0);
  const auto out_dir = (dir / "run").string();
  const auto t = run(with({"train", "--corpus", corpus, "--out", out_dir, "--epochs", "2", "--ita", "off"}, kTiny));
  ASSERT_EQ(t.code, 0) << t.err;
  const auto summary = nlohmann::json::parse(t.out);
  EXPECT_EQ(summary["epochs_run"], 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "checkpoint.a2ck"));
  std::istringstream log(slurp(dir / "run" / "train_log.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    EXPECT_TRUE(nlohmann::json::accept(line));
    ++lines;
  }
  EXPECT_EQ(lines, 2);
  EXPECT_NE(slurp(dir / "run" / "effective_config.txt").find("ita=off"), std::string::npos);

  const auto e = run({"eval", "--corpus", corpus, "--checkpoint", (dir / "run" / "checkpoint.a2ck").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto m = nlohmann::json::parse(e.out);
  for (const char* key : {"ee", "ce", "ecpe", "consistency_e", "consistency_c"}) EXPECT_TRUE(m.contains(key)) << key;
  for (const char* key : {"p", "r", "f1"}) EXPECT_TRUE(m["ecpe"].contains(key));
  EXPECT_NE(e.err.find("ECPE"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFileOverridesDefaults) {
  test::TempDir dir;
  const auto corpus = (dir / "c.jsonl").string();
  ASSERT_EQ(run({"synth", "--num-docs", "4", "--seed", "1", "--out", corpus}).code, 0);
  {
    std::ofstream cfg(dir / "cfg.txt");
    cfg << "# comment\nepochs = 1\nlambda1=0.7\nlambda2=0.9\n";
  }
  const auto t = run(with({"train", "--config", (dir / "cfg.txt").string(), "--corpus", corpus, "--out",
                           (dir / "r").string(), "--lambda2", "0.2"},
                          kTiny));
  ASSERT_EQ(t.code, 0) << t.err;
  const auto kv = read_key_value_file((dir / "r" / "effective_config.txt").string());
  EXPECT_EQ(kv.at("epochs"), "1");
  EXPECT_EQ(std::stod(kv.at("lambda1")), 0.7);
  EXPECT_EQ(std::stod(kv.at("lambda2")), 0.2);
  EXPECT_EQ(kv.at("batch"), "4");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"train", "--no-such-flag", "1"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"train"}).code, 2);

  test::TempDir dir;
  const auto corpus = (dir / "c.jsonl").string();
  ASSERT_EQ(run({"synth", "--num-docs", "3", "--seed", "1", "--out", corpus}).code, 0);
  const auto bad = run({"train", "--corpus", corpus, "--out", (dir / "r").string(), "--lambda1", "-1"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(nlohmann::json::parse(bad.err)["error"], "validation");
  const auto missing = run({"eval", "--corpus", (dir / "none.jsonl").string(), "--checkpoint", "x"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(nlohmann::json::parse(missing.err)["error"], "data");
  {
    std::ofstream(dir / "cfg.txt") << "bogus-key=1\n";
  }
  EXPECT_EQ(run({"train", "--config", (dir / "cfg.txt").string(), "--corpus", corpus}).code, 2);
}

TEST(Cli, FoldsManifest) {
  test::TempDir dir;
  const auto corpus = (dir / "c.jsonl").string();
  ASSERT_EQ(run({"synth", "--num-docs", "23", "--seed", "2", "--out", corpus}).code, 0);
  const auto r = run({"folds", "--corpus", corpus, "--folds", "5", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["folds"].size(), 5u);
  std::set<std::string> tested;
  for (const auto& f : j["folds"]) {
    EXPECT_EQ(f["train"].size() + f["test"].size(), 23u);
    for (const auto& id : f["test"]) EXPECT_TRUE(tested.insert(id.dump()).second);
  }
  EXPECT_EQ(tested.size(), 23u);
}

TEST(Cli, BinaryReportsUsageErrors) {
  const std::string cmd = std::string(A2NET_CLI_PATH) + " train --not-a-flag >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

}  // namespace
}  // namespace a2net
