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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pitchaccent/config.hpp"

namespace pitchaccent {
namespace {

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.batch_size, 32);
  EXPECT_EQ(c.folds, 10);
  EXPECT_EQ(c.dev_size, 1000);
}

TEST(Config, UnknownKeyThrows) {
  RunConfig c;
  EXPECT_THROW(set_config_value(c, "learning-rate", "0.1"), Error);
}

TEST(Config, TypedValuesAreChecked) {
  RunConfig c;
  EXPECT_THROW(set_config_value(c, "epochs", "ten"), Error);
  EXPECT_THROW(set_config_value(c, "epochs", "3x"), Error);
  EXPECT_THROW(set_config_value(c, "seed", "-1"), Error);
  EXPECT_THROW(set_config_value(c, "lr", ""), Error);
  EXPECT_THROW(set_config_value(c, "depthwise", "yes"), Error);
  set_config_value(c, "lr", "2.5e-4");
  EXPECT_DOUBLE_EQ(c.lr, 2.5e-4);
  set_config_value(c, "manifest", "a=x.tsv,b.tsv");
  ASSERT_EQ(c.manifest.size(), 2u);
  EXPECT_EQ(c.manifest[1], "b.tsv");
}

TEST(Config, FormatParseRoundTrip) {
  RunConfig a;
  a.command = "within";
  a.manifest = {"x=one.tsv", "two.tsv"};
  a.mode = "acoustic+embs";
  a.lr = 0.1 + 0.2;  // not representable in short form
  a.depthwise = true;
  a.seed = 18446744073709551615ull;
  a.source = {"x"};
  std::istringstream in(format_config(a));
  RunConfig b;
  parse_config_text(b, in);
  EXPECT_EQ(format_config(a), format_config(b));
  EXPECT_EQ(b.lr, a.lr);
  EXPECT_EQ(b.seed, a.seed);
}

TEST(Config, ParseSkipsCommentsAndReportsLine) {
  RunConfig c;
  std::istringstream ok("# comment\n\n  epochs = 7 \r\n");
  parse_config_text(c, ok);
  EXPECT_EQ(c.epochs, 7);
  std::istringstream bad("epochs=3\nnot a pair\n");
  try {
    parse_config_text(c, bad, "cfg");
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cfg: line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, LoadFileMissingThrows) {
  RunConfig c;
  EXPECT_THROW(load_config_file(c, "/nonexistent/cfg.txt"), Error);
}

TEST(Config, ValidateRejects) {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), Error);
  };
  bad([](RunConfig& c) { c.ngram = 2; });
  bad([](RunConfig& c) { c.folds = 1; });
  bad([](RunConfig& c) { c.lr = 0; });
  bad([](RunConfig& c) { c.l2_lexical = -1; });
  bad([](RunConfig& c) { c.precision = 16; });
  bad([](RunConfig& c) { c.fold = 10; });
  bad([](RunConfig& c) { c.jobs = 0; });
}

TEST(Hash, Sha1KnownVectors) {
  EXPECT_EQ(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(sha1_hex(""), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST(Hash, GitBlobIds) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello world\n"), "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST(Hash, ConfigHashIgnoresOutAndJobs) {
  RunConfig a;
  RunConfig b = a;
  b.out = "elsewhere";
  b.jobs = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Hash, InputHashIsOrderIndependent) {
  const auto dir = std::filesystem::temp_directory_path() / "pitchaccent_hash_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.txt") << "alpha";
  std::ofstream(dir / "b.txt") << "beta";
  const auto h1 = hash_inputs({dir / "a.txt", dir / "b.txt"});
  const auto h2 = hash_inputs({dir / "b.txt", dir / "a.txt", dir / "a.txt"});
  EXPECT_EQ(h1.combined, h2.combined);
  ASSERT_EQ(h1.files.size(), 2u);
  EXPECT_EQ(h1.files[0].second, git_blob_hash("alpha"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pitchaccent
