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

#include <cstddef>
#include <string>
#include <vector>

namespace fdnc {

enum class Direction { kDown, kUp };

const char* to_string(Direction d);

struct TransferRecord {
  std::size_t round = 0;
  Direction direction = Direction::kDown;
  std::size_t collaborator = 0;
  std::size_t scalar_count = 0;  // 32-bit parameter scalars serialized

  bool operator==(const TransferRecord&) const = default;
};

// Append-only log of every parameter transfer.
class CommLedger {
 public:
  void record(std::size_t round, Direction direction, std::size_t collaborator, std::size_t scalar_count);

  const std::vector<TransferRecord>& records() const noexcept { return records_; }
  std::size_t total() const noexcept { return total_; }
  std::size_t total(Direction direction) const noexcept;
  std::size_t round_total(std::size_t round, Direction direction) const noexcept;
  // Sum over rounds in [first, last].
  std::size_t total_in_rounds(std::size_t first, std::size_t last) const noexcept;

  // round,direction,collaborator,scalar_count
  std::string to_csv() const;

 private:
  std::vector<TransferRecord> records_;
  std::size_t total_ = 0;
};

}  // namespace fdnc
