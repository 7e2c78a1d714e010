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


// Command-line front end: partition, prepass, train, compare and
// inspect-checkpoint.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdnc/checkpoint.h"
#include "fdnc/config.h"
#include "fdnc/errors.h"
#include "fdnc/experiment.h"
#include "fdnc/report.h"

namespace {

using namespace fdnc;

struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out;
  std::string algo;
};

ExperimentConfig load(const Overrides& o) {
  ExperimentConfig c = parse_config(o.config);
  if (o.has_seed) c.seed = o.seed;
  if (!o.out.empty()) c.output = o.out;
  if (!o.algo.empty()) {
    if (o.algo == "fedavg") c.algorithm = Algorithm::kFedAvg;
    else if (o.algo == "fedprox") c.algorithm = Algorithm::kFedProx;
    else if (o.algo == "dnc") c.algorithm = Algorithm::kDnc;
    else throw ConfigError("--algo must be fedavg, fedprox or dnc, got '" + o.algo + "'");
  }
  validate(c);
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void print_rows(const std::vector<RoundMetrics>& rows) {
  std::printf("%6s %-9s %9s %11s %12s %14s\n", "round", "mode", "accuracy", "loss", "local_loss", "cum_scalars");
  for (const auto& m : rows) {
    std::printf("%6zu %-9s %9.4f %11.5f %12.5f %14zu\n", m.round, m.mode.c_str(), m.accuracy, m.loss,
                m.mean_local_loss, m.cumulative_scalars);
  }
}

void print_split(const RunResult& r) {
  if (!r.split) return;
  std::printf("split: %s\n", r.split->describe().c_str());
  if (!r.split->averaged_profile.empty()) {
    std::printf("averaged profile:");
    for (double v : r.split->averaged_profile) std::printf(" %.6g", v);
    std::printf("\n");
  }
}

int cmd_partition(const Overrides& o) {
  auto c = load(o);
  auto data = build_data(c);
  auto set = build_partitions(c, data.train);
  std::printf("scheme %s, %zu collaborators over %zu samples\n", set.scheme.c_str(), set.partitions.size(),
              set.dataset_size);
  for (const auto& p : set.partitions) {
    std::vector<std::size_t> counts(data.train.num_classes, 0);
    for (auto i : p.sample_indices) ++counts[static_cast<std::size_t>(data.train.labels[i])];
    std::printf("  collaborator %zu: %zu samples, %zu grayscale, classes", p.collaborator_id, p.sample_indices.size(),
                p.grayscale_count());
    for (auto n : counts) std::printf(" %zu", n);
    std::printf("\n");
  }
  if (!c.output.empty()) {
    std::filesystem::create_directories(c.output);
    save_partition_set(std::filesystem::path(c.output) / "partition.txt", set);
    std::printf("wrote %s\n", (std::filesystem::path(c.output) / "partition.txt").c_str());
  }
  return 0;
}

int cmd_prepass(const Overrides& o) {
  auto c = load(o);
  c.algorithm = Algorithm::kDnc;
  c.dnc.split = kAutoSplit;
  RunOptions opts;
  opts.prepass_only = true;
  auto r = run_experiment(c, opts);
  print_rows(r.metrics);
  for (const auto& p : r.profiles) {
    std::printf("profile round %zu:", p.round);
    for (const auto& e : p.entries) std::printf(" %s=%.6g", e.layer_name.c_str(), e.value);
    std::printf("\n");
  }
  print_split(r);
  return 0;
}

int cmd_train(const Overrides& o) {
  auto c = load(o);
  auto r = run_experiment(c);
  print_split(r);
  print_rows(r.metrics);
  if (!c.output.empty()) std::printf("outputs in %s\n", c.output.c_str());
  return 0;
}

// label and prepass_rows from a run directory's manifest.
ReportSeries load_run(const std::filesystem::path& dir) {
  const auto manifest = dir / "manifest.txt";
  ExperimentConfig c = parse_config(manifest);
  std::ifstream in(manifest);
  std::string line, label = to_string(c.algorithm);
  std::size_t prepass_rows = 0;
  bool in_manifest = false;
  while (std::getline(in, line)) {
    if (line == "[manifest]") in_manifest = true;
    if (!in_manifest) continue;
    if (line.rfind("label = ", 0) == 0) label = line.substr(8);
    if (line.rfind("prepass_rows = ", 0) == 0) prepass_rows = std::stoull(line.substr(15));
  }
  auto rows = read_metrics_csv(dir / "metrics.csv");
  if (prepass_rows > rows.size()) throw FormatError(dir.string() + ": manifest claims more pre-pass rows than exist");
  rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(prepass_rows));
  return {label, c.seed, std::move(rows)};
}

int cmd_compare(const std::vector<std::string>& runs, const std::string& out, const std::string& title) {
  std::vector<ReportSeries> series;
  for (const auto& dir : runs) series.push_back(load_run(dir));
  auto rep = compare_report(series, title);
  std::cout << rep.text();
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_text(std::filesystem::path(out) / "comparison.txt", rep.text());
    write_text(std::filesystem::path(out) / "comparison.svg", rep.svg);
    std::printf("wrote %s and comparison.svg\n", (std::filesystem::path(out) / "comparison.txt").c_str());
  }
  return 0;
}

double l2(const std::vector<float>& v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

int cmd_inspect(const std::string& path) {
  auto params = load_checkpoint(path);
  std::printf("%5s %-10s %-16s %-8s %14s %14s\n", "layer", "name", "weight", "bias", "weight_norm", "bias_norm");
  for (const auto& e : params.entries) {
    std::printf("%5zu %-10s %-16s %-8s %14.6g %14.6g\n", e.layer_index, e.layer_name.c_str(),
                shape_to_string(e.weight.shape).c_str(), shape_to_string(e.bias.shape).c_str(), l2(e.weight.data),
                l2(e.bias.data));
  }
  std::printf("%zu scalars\n", params.scalar_count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated divide-and-conquer simulator"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub, bool with_algo) {
    sub->add_option("--config", o.config, "experiment config file")->required();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { o.seed = s, o.has_seed = true; }, "override [experiment] seed");
    sub->add_option("--out", o.out, "override the output directory");
    if (with_algo) sub->add_option("--algo", o.algo, "override the algorithm: fedavg, fedprox or dnc");
  };
  auto* partition = app.add_subcommand("partition", "build and export a partition set");
  add_common(partition, false);
  auto* prepass = app.add_subcommand("prepass", "run the pre-pass, emit divergence profiles and the split decision");
  add_common(prepass, false);
  auto* train = app.add_subcommand("train", "run a full experiment");
  add_common(train, true);

  std::vector<std::string> runs;
  std::string compare_out, title = "accuracy";
  auto* compare = app.add_subcommand("compare", "compare finished runs");
  compare->add_option("runs", runs, "run output directories")->required()->expected(2, -1);
  compare->add_option("--out", compare_out, "directory for comparison.txt and comparison.svg");
  compare->add_option("--title", title, "chart title");

  std::string ckpt;
  auto* inspect = app.add_subcommand("inspect-checkpoint", "dump layer names, shapes and norms");
  inspect->add_option("checkpoint", ckpt, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*partition) return cmd_partition(o);
    if (*prepass) return cmd_prepass(o);
    if (*train) return cmd_train(o);
    if (*compare) return cmd_compare(runs, compare_out, title);
    if (*inspect) return cmd_inspect(ckpt);
  } catch (const fdnc::Error& e) {
    std::fprintf(stderr, "fdnc: %s: %s\n", fdnc::to_string(e.kind()), e.what());
    return fdnc::exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "fdnc: I/O error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fdnc: %s\n", e.what());
    return 2;
  }
  return 2;
}
