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


#include "fdnc/partition.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fdnc/errors.h"

namespace fdnc {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& data) {
  std::vector<std::vector<std::size_t>> out(data.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) out[static_cast<std::size_t>(data.labels[i])].push_back(i);
  return out;
}

Partition make_partition(std::size_t id, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  Partition p;
  p.collaborator_id = id;
  p.transforms.assign(indices.size(), Transform::kNone);
  p.sample_indices = std::move(indices);
  return p;
}

void mark_grayscale(Partition& p, double fraction, Rng& rng) {
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(p.size())));
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t k = 0; k < count; ++k) p.transforms[order[k]] = Transform::kGrayscale;
}

}  // namespace

std::size_t Partition::grayscale_count() const noexcept {
  return static_cast<std::size_t>(std::count(transforms.begin(), transforms.end(), Transform::kGrayscale));
}

std::vector<double> PartitionSet::weights() const {
  double total = 0.0;
  for (const auto& p : partitions) total += static_cast<double>(p.size());
  std::vector<double> w;
  for (const auto& p : partitions) w.push_back(total > 0.0 ? static_cast<double>(p.size()) / total : 0.0);
  return w;
}

void PartitionSet::validate() const {
  std::vector<bool> used(dataset_size, false);
  for (const auto& p : partitions) {
    if (p.transforms.size() != p.sample_indices.size()) {
      throw InputError("partition " + std::to_string(p.collaborator_id) + " has mismatched transforms");
    }
    for (auto i : p.sample_indices) {
      if (i >= dataset_size) throw InputError("partition index " + std::to_string(i) + " out of range");
      if (used[i]) throw InputError("sample " + std::to_string(i) + " appears in more than one partition");
      used[i] = true;
    }
  }
}

PartitionSet partition_iid(const Dataset& data, std::size_t num_collaborators, Rng rng) {
  if (num_collaborators < 1 || num_collaborators > data.size()) {
    throw ConfigError("iid partition needs 1 <= collaborators <= dataset size");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> parts(num_collaborators);
  for (std::size_t i = 0; i < order.size(); ++i) parts[i % num_collaborators].push_back(order[i]);
  PartitionSet set{"iid", {{"num_collaborators", std::to_string(num_collaborators)}}, data.size(), {}};
  for (std::size_t k = 0; k < num_collaborators; ++k) set.partitions.push_back(make_partition(k, std::move(parts[k])));
  return set;
}

PartitionSet partition_color_skew(const Dataset& data, double skew_fraction, Rng rng) {
  if (data.num_classes % 2 != 0) throw ConfigError("color skew needs an even number of classes");
  if (!(skew_fraction >= 0.5 && skew_fraction <= 1.0)) throw ConfigError("skew_fraction must lie in [0.5, 1]");
  if (data.feature_shape.size() != 3 || data.feature_shape[0] != 3) {
    throw ConfigError("color skew needs 3-channel image features");
  }
  const auto half = static_cast<std::int32_t>(data.num_classes / 2);
  std::vector<std::size_t> first, second;
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] < half ? first : second).push_back(i);
  PartitionSet set{"color_skew", {{"skew_fraction", format_double(skew_fraction)}}, data.size(), {}};
  set.partitions.push_back(make_partition(0, std::move(first)));
  set.partitions.push_back(make_partition(1, std::move(second)));
  mark_grayscale(set.partitions[0], skew_fraction, rng);
  mark_grayscale(set.partitions[1], 1.0 - skew_fraction, rng);
  return set;
}

PartitionSet partition_class_imbalance(const Dataset& data, std::size_t num_collaborators, double alpha, Rng rng) {
  if (num_collaborators < 2) throw ConfigError("class imbalance needs at least 2 collaborators");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (data.size() < num_collaborators) {
    throw ConfigError("dataset of " + std::to_string(data.size()) + " samples cannot give each of " +
                      std::to_string(num_collaborators) + " collaborators a sample");
  }
  std::vector<std::vector<std::size_t>> parts(num_collaborators);
  for (auto& cls : indices_by_class(data)) {
    std::vector<double> p(num_collaborators);
    double sum = 0.0;
    for (auto& v : p) sum += (v = rng.gamma(alpha));
    for (auto& v : p) v /= sum;
    rng.shuffle(std::span<std::size_t>(cls));
    // Largest-remainder apportionment of the class across collaborators.
    const double n = static_cast<double>(cls.size());
    std::vector<std::size_t> counts(num_collaborators);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < num_collaborators; ++k) {
      const double exact = p[k] * n;
      counts[k] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[k];
      remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < cls.size(); ++r, ++assigned) ++counts[remainders[r % num_collaborators].second];
    std::size_t pos = 0;
    for (std::size_t k = 0; k < num_collaborators; ++k) {
      parts[k].insert(parts[k].end(), cls.begin() + static_cast<std::ptrdiff_t>(pos),
                      cls.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
  }
  // Every collaborator must train on something: move one sample from the
  // largest partition into each empty one.
  for (auto& part : parts) {
    if (!part.empty()) continue;
    auto largest = std::max_element(parts.begin(), parts.end(),
                                    [](const auto& a, const auto& b) { return a.size() < b.size(); });
    part.push_back(largest->back());
    largest->pop_back();
  }
  PartitionSet set{"class_imbalance",
                   {{"num_collaborators", std::to_string(num_collaborators)}, {"alpha", format_double(alpha)}},
                   data.size(),
                   {}};
  for (std::size_t k = 0; k < num_collaborators; ++k) set.partitions.push_back(make_partition(k, std::move(parts[k])));
  return set;
}

PartitionSet partition_label_exclusive(const Dataset& data, Rng /*rng*/) {
  PartitionSet set{"label_exclusive", {}, data.size(), {}};
  auto by_class = indices_by_class(data);
  for (std::size_t k = 0; k < by_class.size(); ++k) set.partitions.push_back(make_partition(k, std::move(by_class[k])));
  return set;
}

PartitionSet partition_by_group(const Dataset& data, std::size_t min_points, std::size_t sample_count, Rng rng) {
  if (!data.has_group_keys()) throw ConfigError("partition by group needs samples with group keys");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) groups[data.group_keys[i]].push_back(i);
  std::vector<std::string> survivors;
  for (const auto& [key, idx] : groups) {
    if (idx.size() >= min_points) survivors.push_back(key);
  }
  if (survivors.size() < sample_count) {
    throw ConfigError(std::to_string(survivors.size()) + " groups have at least " + std::to_string(min_points) +
                      " samples; cannot sample " + std::to_string(sample_count));
  }
  // Partial Fisher-Yates: the first sample_count slots are a uniform draw.
  for (std::size_t i = 0; i < sample_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(survivors.size() - i));
    std::swap(survivors[i], survivors[j]);
  }
  survivors.resize(sample_count);
  std::sort(survivors.begin(), survivors.end());
  PartitionSet set{"by_group",
                   {{"min_points", std::to_string(min_points)}, {"sample_count", std::to_string(sample_count)}},
                   data.size(),
                   {}};
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    set.partitions.push_back(make_partition(k, std::move(groups[survivors[k]])));
  }
  return set;
}

Dataset materialize(const Dataset& data, const Partition& partition) {
  Dataset out;
  out.feature_shape = data.feature_shape;
  out.num_classes = data.num_classes;
  const std::size_t f = data.feature_size();
  out.features.reserve(partition.size() * f);
  for (std::size_t k = 0; k < partition.size(); ++k) {
    const std::size_t i = partition.sample_indices[k];
    if (i >= data.size()) throw InputError("partition index out of range");
    const auto x = data.sample(i);
    out.features.insert(out.features.end(), x.begin(), x.end());
    out.labels.push_back(data.labels[i]);
    if (data.has_group_keys()) out.group_keys.push_back(data.group_keys[i]);
    if (partition.transforms[k] == Transform::kGrayscale) {
      if (data.feature_shape.size() != 3 || data.feature_shape[0] != 3) {
        throw InputError("grayscale transform needs 3-channel images");
      }
      grayscale_in_place(out.sample(out.size() - 1), data.feature_shape[1] * data.feature_shape[2]);
    }
  }
  return out;
}

std::string to_text(const PartitionSet& set) {
  std::ostringstream out;
  out << "fdnc-partition 1\n";
  out << "scheme " << set.scheme << "\n";
  for (const auto& [k, v] : set.parameters) out << "param " << k << " " << v << "\n";
  out << "dataset_size " << set.dataset_size << "\n";
  out << "collaborators " << set.partitions.size() << "\n";
  for (const auto& p : set.partitions) {
    out << "collaborator " << p.collaborator_id << " " << p.size() << "\n";
    out << "indices";
    for (auto i : p.sample_indices) out << ' ' << i;
    out << "\ntransforms ";
    for (auto t : p.transforms) out << (t == Transform::kGrayscale ? 'g' : 'n');
    out << "\n";
  }
  return out.str();
}

PartitionSet partition_set_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& why) { return FormatError("partition file: " + why); };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "fdnc-partition" || version != 1) throw fail("bad header");
  PartitionSet set;
  std::size_t count = 0;
  if (!(in >> word) || word != "scheme" || !(in >> set.scheme)) throw fail("missing scheme");
  while (in >> word && word == "param") {
    std::string k, v;
    if (!(in >> k >> v)) throw fail("bad param line");
    set.parameters.emplace_back(k, v);
  }
  if (word != "dataset_size" || !(in >> set.dataset_size)) throw fail("missing dataset_size");
  if (!(in >> word) || word != "collaborators" || !(in >> count)) throw fail("missing collaborators");
  for (std::size_t c = 0; c < count; ++c) {
    Partition p;
    std::size_t n = 0;
    if (!(in >> word) || word != "collaborator" || !(in >> p.collaborator_id >> n)) throw fail("bad collaborator line");
    if (!(in >> word) || word != "indices") throw fail("missing indices");
    p.sample_indices.resize(n);
    for (auto& i : p.sample_indices) {
      if (!(in >> i)) throw fail("truncated index list");
    }
    if (!(in >> word) || word != "transforms") throw fail("missing transforms");
    std::string marks;
    std::getline(in, marks);
    if (!marks.empty() && marks.front() == ' ') marks.erase(0, 1);
    if (marks.size() != n) throw fail("transform list length mismatch");
    for (char m : marks) {
      if (m != 'g' && m != 'n') throw fail("unknown transform mark");
      p.transforms.push_back(m == 'g' ? Transform::kGrayscale : Transform::kNone);
    }
    set.partitions.push_back(std::move(p));
  }
  try {
    set.validate();
  } catch (const InputError& e) {
    throw fail(e.what());
  }
  return set;
}

void save_partition_set(const std::filesystem::path& path, const PartitionSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_text(set);
  if (!out) throw IoError("failed writing " + path.string());
}

PartitionSet load_partition_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return partition_set_from_text(buf.str());
}

}  // namespace fdnc
