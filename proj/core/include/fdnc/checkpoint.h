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


#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fdnc/params.h"

namespace fdnc {

// Binary checkpoint:
//   "FDNC1\n"
//   per entry: u32 layer_index, u32 name length, name bytes (UTF-8),
//              weight tensor, bias tensor
//   tensor:    u32 rank, rank x u32 dims, prod(dims) x f32 payload
// All integers and floats little-endian; entries run to end of file.
inline constexpr char kCheckpointMagic[] = "FDNC1\n";

void write_checkpoint(std::ostream& out, const ParameterSet& params);
ParameterSet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
ParameterSet load_checkpoint(const std::filesystem::path& path);

}  // namespace fdnc
