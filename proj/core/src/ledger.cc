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


#include "fdnc/ledger.h"

#include <sstream>

namespace fdnc {

const char* to_string(Direction d) { return d == Direction::kDown ? "down" : "up"; }

void CommLedger::record(std::size_t round, Direction direction, std::size_t collaborator, std::size_t scalar_count) {
  records_.push_back({round, direction, collaborator, scalar_count});
  total_ += scalar_count;
}

std::size_t CommLedger::total(Direction direction) const noexcept {
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.direction == direction) n += r.scalar_count;
  }
  return n;
}

std::size_t CommLedger::round_total(std::size_t round, Direction direction) const noexcept {
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.round == round && r.direction == direction) n += r.scalar_count;
  }
  return n;
}

std::size_t CommLedger::total_in_rounds(std::size_t first, std::size_t last) const noexcept {
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.round >= first && r.round <= last) n += r.scalar_count;
  }
  return n;
}

std::string CommLedger::to_csv() const {
  std::ostringstream out;
  out << "round,direction,collaborator,scalar_count\n";
  for (const auto& r : records_) {
    out << r.round << ',' << to_string(r.direction) << ',' << r.collaborator << ',' << r.scalar_count << '\n';
  }
  return out.str();
}

}  // namespace fdnc
