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

#include <cstdint>
#include <string>
#include <vector>

#include "fdnc/federation.h"

namespace fdnc {

// One run as seen by the report: training rows only, pre-pass excluded.
struct ReportSeries {
  std::string label;  // fedavg, fedprox, dnc, dnc_prime
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rows;
};

struct ComparisonReport {
  std::size_t rounds = 0;   // rows compared per run
  bool truncated = false;   // some run had more rows than others
  std::string table;        // per round: accuracy, diff to baseline, cumulative transfer, transfer ratio
  std::string summary;      // final accuracy mean +- range per algorithm
  std::string svg;          // accuracy vs round, one polyline per run

  std::string text() const { return table + "\n" + summary; }
};

// The baseline is the first fedavg run with the same seed, or else the
// first run. Transfer counts restart at the first training round.
ComparisonReport compare_report(const std::vector<ReportSeries>& runs, const std::string& title = "accuracy");

std::string xml_escape(const std::string& text);

}  // namespace fdnc
