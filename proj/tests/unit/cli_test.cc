/*
 * Copyright 2026 The fdnc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

const char* kTiny = R"(
[experiment]
name = cli
seed = 5

[dataset]
kind = synthetic_images
train_samples = 40
test_samples = 20
height = 8
width = 8

[partition]
scheme = color_skew

[model]
layers = flatten dense:8 relu dense:6 relu dense:10 head

[federation]
rounds = 2
eta = 0.05
local_epochs = 1

[dnc]
prepass_rounds = 2
diagnostic_rounds = 1
feature_epochs = 1
finetune_epochs = 1
eta0 = 0.05
)";

fs::path work_dir() {
  auto dir = fs::path(testing::TempDir()) / "fdnc_cli";
  fs::create_directories(dir);
  return dir;
}

fs::path write(const std::string& name, const std::string& text) {
  auto p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args) {
  std::string cmd = std::string(FDNC_CLI_PATH) + " " + args + " > " + (work_dir() / "stdout.txt").string() + " 2> " +
                    (work_dir() / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string captured(const char* which) {
  std::ifstream in(work_dir() / which);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, TrainCompareInspect) {
  auto cfg = write("tiny.cfg", kTiny);
  auto a = work_dir() / "run_dnc", b = work_dir() / "run_fedavg", cmp = work_dir() / "cmp";
  fs::remove_all(a);
  fs::remove_all(b);
  ASSERT_EQ(run("train --config " + cfg.string() + " --out " + a.string()), 0) << captured("stderr.txt");
  ASSERT_EQ(run("train --config " + cfg.string() + " --algo fedavg --out " + b.string()), 0) << captured("stderr.txt");
  EXPECT_TRUE(fs::exists(a / "divergence.csv"));
  EXPECT_FALSE(fs::exists(b / "divergence.csv"));
  ASSERT_EQ(run("compare " + a.string() + " " + b.string() + " --out " + cmp.string()), 0) << captured("stderr.txt");
  EXPECT_TRUE(fs::exists(cmp / "comparison.txt"));
  EXPECT_TRUE(fs::exists(cmp / "comparison.svg"));
  ASSERT_EQ(run("inspect-checkpoint " + (a / "final.ckpt").string()), 0);
  EXPECT_NE(captured("stdout.txt").find("dense"), std::string::npos);
}

TEST(Cli, PartitionAndPrepass) {
  auto cfg = write("tiny.cfg", kTiny);
  auto out = work_dir() / "part";
  EXPECT_EQ(run("partition --config " + cfg.string() + " --out " + out.string()), 0) << captured("stderr.txt");
  EXPECT_TRUE(fs::exists(out / "partition.txt"));
  EXPECT_EQ(run("prepass --config " + cfg.string() + " --seed 9 --out " + out.string()), 0) << captured("stderr.txt");
  EXPECT_NE(captured("stdout.txt").find("split"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  auto bad = write("bad.cfg", std::string(kTiny) + "[bogus]\n");
  EXPECT_EQ(run("train --config " + bad.string()), 2);
  EXPECT_NE(captured("stderr.txt").find("bogus"), std::string::npos);
  auto k = write("k.cfg", std::string(kTiny) + "[manifest]\n");
  EXPECT_EQ(run("train --config " + k.string() + " --algo fedma"), 2);
  EXPECT_EQ(run("train"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, NumericErrorExitsThree) {
  std::string text = kTiny;
  text.replace(text.find("eta = 0.05"), 10, "eta = 1e30");
  auto cfg = write("nan.cfg", text);
  EXPECT_EQ(run("train --config " + cfg.string() + " --algo fedavg"), 3);
}

TEST(Cli, IoErrorsExitFour) {
  EXPECT_EQ(run("train --config /nonexistent/x.cfg"), 4);
  EXPECT_EQ(run("inspect-checkpoint /nonexistent/final.ckpt"), 4);
  auto junk = write("junk.ckpt", "not a checkpoint");
  EXPECT_EQ(run("inspect-checkpoint " + junk.string()), 4);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

}  // namespace
