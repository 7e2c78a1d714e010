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


#include "fdnc/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fdnc/dataset.h"
#include "fdnc/errors.h"

namespace fdnc {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kFedAvg: return "fedavg";
    case Algorithm::kFedProx: return "fedprox";
    case Algorithm::kDnc: return "dnc";
  }
  return "?";
}

const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::kSyntheticImages: return "synthetic_images";
    case DatasetKind::kCifar10: return "cifar10";
    case DatasetKind::kRoleText: return "role_text";
  }
  return "?";
}

const char* to_string(PartitionScheme s) {
  switch (s) {
    case PartitionScheme::kIid: return "iid";
    case PartitionScheme::kColorSkew: return "color_skew";
    case PartitionScheme::kClassImbalance: return "class_imbalance";
    case PartitionScheme::kLabelExclusive: return "label_exclusive";
    case PartitionScheme::kByGroup: return "by_group";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct Key {
  std::string section;
  std::string name;
  std::string qualified() const { return section + "." + name; }
};

std::size_t parse_size(const Key& key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key.qualified() + ": expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t parse_u64(const Key& key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key.qualified() + ": expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

double parse_double(const Key& key, std::string_view v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out))
    throw ConfigError(key.qualified() + ": expected a finite number, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(const Key& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key.qualified() + ": expected true or false, got '" + std::string(v) + "'");
}

std::vector<std::string> parse_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    auto comma = v.find(',');
    auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename E, std::size_t N>
E parse_enum(const Key& key, std::string_view v, const std::pair<const char*, E> (&table)[N]) {
  for (const auto& [name, value] : table)
    if (v == name) return value;
  std::string allowed;
  for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : "|") + std::string(name);
  throw ConfigError(key.qualified() + ": expected one of " + allowed + ", got '" + std::string(v) + "'");
}

constexpr std::pair<const char*, Algorithm> kAlgorithms[] = {
    {"fedavg", Algorithm::kFedAvg}, {"fedprox", Algorithm::kFedProx}, {"dnc", Algorithm::kDnc}};
constexpr std::pair<const char*, DatasetKind> kDatasetKinds[] = {
    {"synthetic_images", DatasetKind::kSyntheticImages},
    {"cifar10", DatasetKind::kCifar10},
    {"role_text", DatasetKind::kRoleText}};
constexpr std::pair<const char*, PartitionScheme> kSchemes[] = {
    {"iid", PartitionScheme::kIid},
    {"color_skew", PartitionScheme::kColorSkew},
    {"class_imbalance", PartitionScheme::kClassImbalance},
    {"label_exclusive", PartitionScheme::kLabelExclusive},
    {"by_group", PartitionScheme::kByGroup}};
constexpr std::pair<const char*, Weighting> kWeightings[] = {
    {"uniform", Weighting::kUniform}, {"sample_count", Weighting::kBySampleCount}};
constexpr std::pair<const char*, DivergenceMetric> kMetrics[] = {
    {"norm", DivergenceMetric::kNorm}, {"cosine", DivergenceMetric::kCosine}};
constexpr std::pair<const char*, RoundMode> kFirstModes[] = {
    {"feature", RoundMode::kFeature}, {"finetune", RoundMode::kFinetune}};


struct Field {
  Key key;
  std::function<void(ExperimentConfig&, const Key&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FDNC_SIZE(sec, name, member)                                                                     \
  Field{{sec, name}, [](ExperimentConfig& c, const Key& k, std::string_view v) { c.member = parse_size(k, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define FDNC_DOUBLE(sec, name, member)                                                                     \
  Field{{sec, name}, [](ExperimentConfig& c, const Key& k, std::string_view v) { c.member = parse_double(k, v); }, \
        [](const ExperimentConfig& c) { return fmt_double(c.member); }}
#define FDNC_STRING(sec, name, member)                                                                  \
  Field{{sec, name}, [](ExperimentConfig& c, const Key&, std::string_view v) { c.member = std::string(v); }, \
        [](const ExperimentConfig& c) { return c.member; }}
#define FDNC_LIST(sec, name, member)                                                                   \
  Field{{sec, name}, [](ExperimentConfig& c, const Key&, std::string_view v) { c.member = parse_list(v); }, \
        [](const ExperimentConfig& c) { return join(c.member); }}
#define FDNC_ENUM(sec, name, member, table)                                                                     \
  Field{{sec, name}, [](ExperimentConfig& c, const Key& k, std::string_view v) { c.member = parse_enum(k, v, table); }, \
        [](const ExperimentConfig& c) {                                                                        \
          for (const auto& [n, value] : table)                                                                 \
            if (value == c.member) return std::string(n);                                                      \
          return std::string("?");                                                                             \
        }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FDNC_STRING("experiment", "name", name),
      FDNC_ENUM("experiment", "algorithm", algorithm, kAlgorithms),
      Field{{"experiment", "seed"},
            [](ExperimentConfig& c, const Key& k, std::string_view v) { c.seed = parse_u64(k, v); },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      FDNC_STRING("experiment", "output", output),

      FDNC_ENUM("dataset", "kind", dataset.kind, kDatasetKinds),
      FDNC_SIZE("dataset", "train_samples", dataset.train_samples),
      FDNC_SIZE("dataset", "test_samples", dataset.test_samples),
      FDNC_SIZE("dataset", "num_classes", dataset.num_classes),
      FDNC_SIZE("dataset", "height", dataset.height),
      FDNC_SIZE("dataset", "width", dataset.width),
      FDNC_DOUBLE("dataset", "pixel_noise", dataset.pixel_noise),
      FDNC_DOUBLE("dataset", "color_strength", dataset.color_strength),
      FDNC_SIZE("dataset", "max_shift", dataset.max_shift),
      FDNC_LIST("dataset", "train_paths", dataset.train_paths),
      FDNC_LIST("dataset", "test_paths", dataset.test_paths),
      FDNC_SIZE("dataset", "train_limit", dataset.train_limit),
      FDNC_SIZE("dataset", "test_limit", dataset.test_limit),
      FDNC_SIZE("dataset", "num_roles", dataset.num_roles),
      FDNC_SIZE("dataset", "chars_per_role", dataset.chars_per_role),
      FDNC_SIZE("dataset", "vocab", dataset.vocab),
      FDNC_DOUBLE("dataset", "test_fraction", dataset.test_fraction),

      FDNC_ENUM("partition", "scheme", partition.scheme, kSchemes),
      FDNC_SIZE("partition", "collaborators", partition.num_collaborators),
      FDNC_DOUBLE("partition", "skew_fraction", partition.skew_fraction),
      FDNC_DOUBLE("partition", "alpha", partition.alpha),
      FDNC_SIZE("partition", "min_points", partition.min_points),
      FDNC_SIZE("partition", "sample_count", partition.sample_count),
      FDNC_STRING("partition", "file", partition.file),

      FDNC_STRING("model", "layers", model.layers),
      FDNC_SIZE("model", "hidden", model.hidden),

      FDNC_SIZE("federation", "participants", federation.participants),
      FDNC_SIZE("federation", "rounds", federation.rounds),
      FDNC_DOUBLE("federation", "eta", federation.eta),
      FDNC_DOUBLE("federation", "eta_decay", federation.eta_decay),
      FDNC_SIZE("federation", "local_epochs", federation.local_epochs),
      FDNC_SIZE("federation", "batch_size", federation.batch_size),
      FDNC_DOUBLE("federation", "mu", federation.mu),
      FDNC_ENUM("federation", "weighting", federation.weighting, kWeightings),
      FDNC_SIZE("federation", "workers", federation.workers),

      FDNC_SIZE("dnc", "prepass_rounds", dnc.prepass_rounds),
      FDNC_SIZE("dnc", "diagnostic_rounds", dnc.diagnostic_rounds),
      FDNC_ENUM("dnc", "metric", dnc.metric, kMetrics),
      FDNC_DOUBLE("dnc", "knee_ratio", dnc.knee_ratio),
      FDNC_DOUBLE("dnc", "flat_tolerance", dnc.flat_tolerance),
      Field{{"dnc", "split"},
            [](ExperimentConfig& c, const Key& k, std::string_view v) {
              if (v == "auto") c.dnc.split = kAutoSplit;
              else if (v == "none") c.dnc.split = kNoSplitForced;
              else {
                c.dnc.split = parse_size(k, v);
                if (c.dnc.split == kAutoSplit)
                  throw ConfigError(k.qualified() + ": expected auto, none or a layer position >= 1");
              }
            },
            [](const ExperimentConfig& c) {
              if (c.dnc.split == kAutoSplit) return std::string("auto");
              if (c.dnc.split == kNoSplitForced) return std::string("none");
              return std::to_string(c.dnc.split);
            }},
      FDNC_SIZE("dnc", "feature_epochs", dnc.feature_epochs),
      FDNC_SIZE("dnc", "finetune_epochs", dnc.finetune_epochs),
      FDNC_DOUBLE("dnc", "eta0", dnc.eta0),
      FDNC_DOUBLE("dnc", "decay", dnc.decay),
      FDNC_DOUBLE("dnc", "finetune_eta_scale", dnc.finetune_eta_scale),
      FDNC_ENUM("dnc", "first_mode", dnc.first_mode, kFirstModes),
      Field{{"dnc", "transfer_matched"},
            [](ExperimentConfig& c, const Key& k, std::string_view v) { c.dnc.transfer_matched = parse_bool(k, v); },
            [](const ExperimentConfig& c) { return std::string(c.dnc.transfer_matched ? "true" : "false"); }},
  };
  return table;
}

#undef FDNC_SIZE
#undef FDNC_DOUBLE
#undef FDNC_STRING
#undef FDNC_LIST
#undef FDNC_ENUM

const std::vector<std::string> kSections = {"experiment", "dataset", "partition", "model", "federation", "dnc"};
const std::set<std::string> kRequired = {"experiment", "dataset", "partition"};

void require(bool ok, const std::string& key, const std::string& bounds) {
  if (!ok) throw ConfigError(key + " out of range: must be " + bounds);
}

}  // namespace

std::size_t ExperimentConfig::num_collaborators() const {
  switch (partition.scheme) {
    case PartitionScheme::kColorSkew: return 2;
    case PartitionScheme::kLabelExclusive: return num_classes_for(dataset);
    case PartitionScheme::kByGroup: return partition.sample_count;
    default: return partition.num_collaborators;
  }
}

std::size_t ExperimentConfig::participants() const {
  return federation.participants == 0 ? num_collaborators() : federation.participants;
}

Shape input_shape_for(const DatasetConfig& d) {
  switch (d.kind) {
    case DatasetKind::kSyntheticImages: return {3, d.height, d.width};
    case DatasetKind::kCifar10: return {3, 32, 32};
    case DatasetKind::kRoleText: return {kRoleTextWindow * d.vocab};
  }
  return {};
}

std::size_t num_classes_for(const DatasetConfig& d) {
  switch (d.kind) {
    case DatasetKind::kSyntheticImages: return d.num_classes;
    case DatasetKind::kCifar10: return 10;
    case DatasetKind::kRoleText: return d.vocab;
  }
  return 0;
}

ModelSpec model_spec_for(const ExperimentConfig& c) {
  Shape input = input_shape_for(c.dataset);
  std::size_t classes = num_classes_for(c.dataset);
  if (!c.model.layers.empty()) return parse_layers(c.model.layers, input, classes);
  if (c.dataset.kind == DatasetKind::kRoleText) return char_mlp(kRoleTextWindow, c.dataset.vocab, c.model.hidden);
  return desk_cnn(input, classes, c.model.hidden);
}

ExperimentConfig parse_config_text(std::string_view text) {
  std::map<std::string, const Field*> lookup;
  for (const auto& f : fields()) lookup[f.key.qualified()] = &f;

  ExperimentConfig config;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = section == "manifest";
      for (const auto& s : kSections) known = known || s == section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) throw ConfigError(where + "duplicate section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    if (section == "manifest") continue;
    std::string name(trim(line.substr(0, eq)));
    auto value = trim(line.substr(eq + 1));
    Key key{section, name};
    auto it = lookup.find(key.qualified());
    if (it == lookup.end()) throw ConfigError(where + "unknown key '" + name + "' in [" + section + "]");
    if (!seen_keys.insert(key.qualified()).second) throw ConfigError(where + "duplicate key " + key.qualified());
    it->second->set(config, key, value);
  }
  for (const auto& s : kRequired)
    if (!seen_sections.count(s)) throw ConfigError("missing required section [" + s + "]");
  validate(config);
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_text(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.key.section != section) {
      section = f.key.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += f.key.name + " = " + f.get(config) + "\n";
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  const auto& d = c.dataset;
  switch (d.kind) {
    case DatasetKind::kSyntheticImages:
      require(d.train_samples >= 1, "dataset.train_samples", ">= 1");
      require(d.test_samples >= 1, "dataset.test_samples", ">= 1");
      require(d.num_classes >= 2, "dataset.num_classes", ">= 2");
      require(d.height >= 1 && d.width >= 1, "dataset.height/width", ">= 1");
      require(d.pixel_noise >= 0, "dataset.pixel_noise", ">= 0");
      require(d.color_strength >= 0 && d.color_strength <= 1, "dataset.color_strength", "in [0, 1]");
      require(d.max_shift <= 64, "dataset.max_shift", "in [0, 64]");
      break;
    case DatasetKind::kCifar10:
      if (d.train_paths.empty()) throw ConfigError("dataset.train_paths must name at least one file");
      if (d.test_paths.empty()) throw ConfigError("dataset.test_paths must name at least one file");
      for (const auto* list : {&d.train_paths, &d.test_paths})
        for (const auto& p : *list)
          if (!std::filesystem::is_regular_file(p)) throw ConfigError("dataset file does not exist: " + p);
      break;
    case DatasetKind::kRoleText:
      require(d.num_roles >= 1, "dataset.num_roles", ">= 1");
      require(d.chars_per_role > kRoleTextWindow + 1, "dataset.chars_per_role", "> 9");
      require(d.vocab >= 8, "dataset.vocab", ">= 8");
      require(d.test_fraction > 0 && d.test_fraction < 1, "dataset.test_fraction", "in (0, 1)");
      break;
  }

  const auto& p = c.partition;
  if (!p.file.empty() && !std::filesystem::is_regular_file(p.file))
    throw ConfigError("partition.file does not exist: " + p.file);
  switch (p.scheme) {
    case PartitionScheme::kIid:
      require(p.num_collaborators >= 1, "partition.collaborators", ">= 1");
      break;
    case PartitionScheme::kColorSkew:
      require(p.skew_fraction >= 0.5 && p.skew_fraction <= 1, "partition.skew_fraction", "in [0.5, 1]");
      if (d.kind == DatasetKind::kRoleText) throw ConfigError("partition.scheme color_skew needs an image dataset");
      break;
    case PartitionScheme::kClassImbalance:
      require(p.num_collaborators >= 1, "partition.collaborators", ">= 1");
      require(p.alpha > 0, "partition.alpha", "> 0");
      break;
    case PartitionScheme::kLabelExclusive:
      break;
    case PartitionScheme::kByGroup:
      require(p.sample_count >= 1, "partition.sample_count", ">= 1");
      require(p.min_points >= 1, "partition.min_points", ">= 1");
      if (d.kind != DatasetKind::kRoleText) throw ConfigError("partition.scheme by_group needs the role_text dataset");
      require(p.sample_count <= d.num_roles, "partition.sample_count", "<= dataset.num_roles (" +
                                                                            std::to_string(d.num_roles) + ")");
      break;
  }

  const auto& f = c.federation;
  std::size_t n = c.num_collaborators();
  require(c.participants() <= n, "federation.participants",
          "in [1, " + std::to_string(n) + "] (collaborators), got " + std::to_string(f.participants));
  require(f.rounds >= 1, "federation.rounds", ">= 1");
  require(f.eta >= 0, "federation.eta", ">= 0");
  require(f.eta_decay > 0, "federation.eta_decay", "> 0");
  require(f.local_epochs >= 1, "federation.local_epochs", ">= 1");
  require(f.batch_size >= 1, "federation.batch_size", ">= 1");
  require(f.mu >= 0, "federation.mu", ">= 0");
  require(f.workers >= 1 && f.workers <= 256, "federation.workers", "in [1, 256]");

  const auto& k = c.dnc;
  require(k.prepass_rounds >= 1, "dnc.prepass_rounds", ">= 1");
  require(k.diagnostic_rounds >= 1, "dnc.diagnostic_rounds", ">= 1");
  require(k.knee_ratio >= 1, "dnc.knee_ratio", ">= 1");
  require(k.flat_tolerance >= 1, "dnc.flat_tolerance", ">= 1");
  require(k.feature_epochs >= 1, "dnc.feature_epochs", ">= 1");
  require(k.finetune_epochs >= 1, "dnc.finetune_epochs", ">= 1");
  require(k.eta0 >= 0, "dnc.eta0", ">= 0");
  require(k.decay > 0, "dnc.decay", "> 0");
  require(k.finetune_eta_scale > 0, "dnc.finetune_eta_scale", "> 0");

  ModelSpec spec;
  try {
    spec = model_spec_for(c);
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  std::size_t layers = parameterized_layers(spec).size();
  if (k.split != kAutoSplit && k.split != kNoSplitForced)
    require(k.split >= 1 && k.split < layers, "dnc.split", "in [1, " + std::to_string(layers - 1) + "]");
}

}  // namespace fdnc
