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


#include "fdnc/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fdnc/errors.h"

namespace fdnc {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t to_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFull) throw InputError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

void put_tensor(std::ostream& out, const Tensor& t) {
  put_u32(out, to_u32(t.shape.size(), "tensor rank"));
  for (auto d : t.shape) put_u32(out, to_u32(d, "tensor dimension"));
  for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  std::uint32_t u32() {
    unsigned char b[4];
    if (!in_.read(reinterpret_cast<char*>(b), 4)) throw FormatError("checkpoint truncated");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    if (n && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError("checkpoint truncated");
    return s;
  }

  Tensor tensor() {
    const std::uint32_t rank = u32();
    if (rank > 8) throw FormatError("implausible tensor rank " + std::to_string(rank));
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = u32();
      n *= d;
      if (n > (std::size_t{1} << 31)) throw FormatError("implausible tensor size");
    }
    std::vector<float> data(n);
    for (auto& f : data) f = std::bit_cast<float>(u32());
    return Tensor(std::move(shape), std::move(data));
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterSet& params) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  for (const auto& e : params.entries) {
    put_u32(out, to_u32(e.layer_index, "layer index"));
    put_u32(out, to_u32(e.layer_name.size(), "layer name length"));
    out.write(e.layer_name.data(), static_cast<std::streamsize>(e.layer_name.size()));
    put_tensor(out, e.weight);
    put_tensor(out, e.bias);
  }
  if (!out) throw IoError("failed writing checkpoint");
}

ParameterSet read_checkpoint(std::istream& in) {
  Reader r(in);
  if (r.bytes(sizeof(kCheckpointMagic) - 1) != std::string(kCheckpointMagic)) {
    throw FormatError("not an FDNC1 checkpoint");
  }
  ParameterSet params;
  std::size_t last_index = 0;
  while (!r.at_end()) {
    ParamEntry e;
    e.layer_index = r.u32();
    if (e.layer_index <= last_index) throw FormatError("checkpoint layer indices must increase");
    last_index = e.layer_index;
    const std::uint32_t name_len = r.u32();
    if (name_len > 4096) throw FormatError("implausible layer name length");
    e.layer_name = r.bytes(name_len);
    e.weight = r.tensor();
    e.bias = r.tensor();
    params.entries.push_back(std::move(e));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

ParameterSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace fdnc
