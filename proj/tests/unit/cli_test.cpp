// Copyright 2026 The pitchaccent Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "pitchaccent/cli.hpp"

namespace pitchaccent {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"pitchaccent"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : storage) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pitchaccent_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string line_with(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line;
  }
  return {};
}

TEST(Cli, NoArgumentsIsUsageError) {
  const auto r = run_cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
}

TEST(Cli, UnknownSubcommandAndFlag) {
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"stats", "--no-such-flag"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("within"), std::string::npos);
}

TEST(Cli, MissingManifestIsRuntimeError) {
  const auto r = run_cli({"stats", "--manifest", "/nonexistent/m.tsv"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
}

TEST(Cli, InvalidValueIsRuntimeError) {
  const auto r = run_cli({"within", "--ngram", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ngram"), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  const auto r = run_cli({"gradcheck", "--seed", "7"});
  EXPECT_EQ(r.code, 0) << r.err;
  double err = 1.0;
  ASSERT_EQ(std::sscanf(r.out.c_str(), "max relative error: %lf", &err), 1) << r.out;
  EXPECT_LT(err, 1e-4);
}

TEST(Cli, SynthThenStatsAgree) {
  const auto dir = scratch("synth");
  const auto s = run_cli({"synth", "--out", dir.string(), "--words", "300", "--name", "toy", "--embedding-dim", "8"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(fs::exists(dir / "config.txt"));
  const std::string manifest = line_with(s.out, "manifest: ").substr(10);
  ASSERT_TRUE(fs::exists(manifest)) << s.out;
  EXPECT_TRUE(fs::exists(line_with(s.out, "ground truth: ").substr(14)));

  // Without NAME= the corpus takes the directory name.
  const auto unnamed = run_cli({"stats", "--manifest", manifest});
  ASSERT_EQ(unnamed.code, 0) << unnamed.err;
  EXPECT_FALSE(line_with(unnamed.out, "pitchaccent_cli_synth").empty()) << unnamed.out;
  const auto st = run_cli({"stats", "--manifest", "toy=" + manifest});
  ASSERT_EQ(st.code, 0) << st.err;
  const std::string row = line_with(st.out, "toy");
  ASSERT_FALSE(row.empty()) << st.out;
  EXPECT_EQ(row, line_with(s.out, "toy"));
  std::istringstream fields(row);
  std::string name;
  std::size_t words = 0;
  fields >> name >> words;
  EXPECT_EQ(words, 300u);
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "c.txt") << "words=120\nname=fromfile\nembedding-dim=4\n";
  const auto r = run_cli({"synth", "--config", (dir / "c.txt").string(), "--out", (dir / "run").string(),
                          "--name", "fromflag"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(line_with(r.out, "fromflag").empty()) << r.out;
  std::ifstream saved(dir / "run" / "config.txt");
  std::stringstream text;
  text << saved.rdbuf();
  EXPECT_NE(text.str().find("words=120\n"), std::string::npos);
  EXPECT_NE(text.str().find("name=fromflag\n"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, WithinRunWritesRunDirectory) {
  const auto dir = scratch("within");
  const auto s = run_cli({"synth", "--out", (dir / "data").string(), "--words", "400", "--name", "mini"});
  ASSERT_EQ(s.code, 0) << s.err;
  const std::string manifest = line_with(s.out, "manifest: ").substr(10);
  const auto r = run_cli({"within", "--manifest", "mini=" + manifest, "--out", (dir / "run").string(), "--folds", "2",
                          "--reps", "1", "--epochs", "1", "--dev-size", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"config.txt", "inputs.txt", "run_info.txt", "log.txt", "results.csv", "confusion.csv",
                        "summary.txt", "splits_mini.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  EXPECT_NE(r.out.find("mini"), std::string::npos);
  const auto rows = harness::read_results_csv(dir / "run" / "results.csv");
  EXPECT_EQ(rows.size(), 2u);
  fs::remove_all(dir);
}

TEST(Cli, BinaryExitCodes) {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(PITCHACCENT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(""), 2);
  EXPECT_EQ(status("gradcheck --seed 3"), 0);
  EXPECT_EQ(status("stats --manifest /nonexistent/m.tsv"), 1);
}

}  // namespace
}  // namespace pitchaccent
