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

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <functional>
#include <sstream>

#include "fdnc/errors.h"
#include "fdnc/report.h"

namespace fdnc {
namespace {

ReportSeries series(const std::string& label, std::uint64_t seed, std::vector<double> acc, std::size_t per_round) {
  ReportSeries s{label, seed, {}};
  std::size_t cum = 0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    RoundMetrics m;
    m.round = i + 1;
    m.mode = label == "dnc" ? (i % 2 == 0 ? "feature" : "finetune") : "full";
    m.accuracy = acc[i];
    m.down_scalars = per_round / 2;
    m.up_scalars = per_round / 2;
    cum += per_round;
    m.cumulative_scalars = cum;
    s.rows.push_back(m);
  }
  return s;
}

// Column of the per-round table named like "diff:dnc#1", one entry per round.
std::vector<std::string> column(const std::string& table, const std::string& name) {
  std::istringstream in(table);
  std::vector<std::string> header, out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cells(line);
    std::vector<std::string> row;
    for (std::string c; cells >> c;) row.push_back(c);
    if (header.empty()) {
      header = row;
      continue;
    }
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) out.push_back(row.at(i));
  }
  return out;
}

TEST(Report, IdenticalRunsHaveZeroDifference) {
  auto a = series("fedavg", 1, {0.1, 0.4, 0.5, 0.6}, 100);
  auto b = a;
  b.label = "fedprox";
  auto r = compare_report({a, b});
  EXPECT_EQ(r.rounds, 4u);
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(column(r.table, "diff:fedprox#1"), std::vector<std::string>(4, "+0.0000")) << r.table;
  EXPECT_EQ(column(r.table, "ratio:fedprox#1"), std::vector<std::string>(4, "1.000000")) << r.table;
}

TEST(Report, HalfTransferRatioOnDnc) {
  auto fed = series("fedavg", 2, {0.2, 0.3, 0.4, 0.5}, 200);
  auto dnc = series("dnc", 2, {0.3, 0.4, 0.5, 0.6}, 100);
  auto r = compare_report({fed, dnc});
  EXPECT_EQ(column(r.table, "ratio:dnc#2"), std::vector<std::string>(4, "0.500000")) << r.table;
  EXPECT_EQ(column(r.table, "xfer:dnc#2"), (std::vector<std::string>{"100", "200", "300", "400"}));
  EXPECT_EQ(column(r.table, "diff:dnc#2"), std::vector<std::string>(4, "+0.1000")) << r.table;
  EXPECT_NE(r.summary.find("not implemented"), std::string::npos);
}

TEST(Report, BaselinePrefersSameSeedFedAvg) {
  auto d1 = series("dnc", 1, {0.5, 0.5}, 10);
  auto f2 = series("fedavg", 2, {0.1, 0.1}, 20);
  auto f1 = series("fedavg", 1, {0.4, 0.4}, 20);
  auto r = compare_report({d1, f2, f1});
  EXPECT_EQ(column(r.table, "diff:dnc#1"), std::vector<std::string>(2, "+0.1000")) << r.table;
  EXPECT_EQ(column(r.table, "diff:fedavg#2"), std::vector<std::string>(2, "+0.0000")) << r.table;
}

TEST(Report, TruncatesToShortestRun) {
  auto r = compare_report({series("fedavg", 1, {0.1, 0.2, 0.3}, 10), series("dnc", 1, {0.1, 0.2}, 5)});
  EXPECT_EQ(r.rounds, 2u);
  EXPECT_TRUE(r.truncated);
}

TEST(Report, SummaryRangeAcrossSeeds) {
  auto r = compare_report({series("fedavg", 1, {0.5}, 10), series("fedavg", 2, {0.7}, 10)});
  EXPECT_NE(r.summary.find("0.6000"), std::string::npos) << r.summary;
  EXPECT_NE(r.summary.find("0.1000"), std::string::npos) << r.summary;
}

TEST(Report, SvgIsWellFormedWithOnePolylinePerRun) {
  auto r = compare_report({series("fedavg", 1, {0.1, 0.5, 0.6}, 10), series("dnc", 1, {0.3, 0.5, 0.7}, 5),
                           series("fedprox", 1, {0.2, 0.4, 0.6}, 10)},
                          "acc <&> \"q\"");
  boost::property_tree::ptree tree;
  std::istringstream in(r.svg);
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree)) << r.svg;
  const auto& svg = tree.get_child("svg");
  std::size_t polylines = 0;
  std::function<void(const boost::property_tree::ptree&)> walk = [&](const boost::property_tree::ptree& t) {
    for (const auto& [name, child] : t) {
      if (name == "polyline") ++polylines;
      walk(child);
    }
  };
  walk(svg);
  EXPECT_EQ(polylines, 3u);
  EXPECT_NE(r.svg.find("acc &lt;&amp;&gt; &quot;q&quot;"), std::string::npos);
}

TEST(Report, NeedsTwoRuns) {
  EXPECT_THROW(compare_report({series("fedavg", 1, {0.1}, 1)}), InputError);
}

TEST(Report, XmlEscape) { EXPECT_EQ(xml_escape("a<b>&'\""), "a&lt;b&gt;&amp;&apos;&quot;"); }

}  // namespace
}  // namespace fdnc
