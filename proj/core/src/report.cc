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


#include "fdnc/report.h"

#include <algorithm>
#include <cstdio>
#include <map>

#include "fdnc/errors.h"

namespace fdnc {

namespace {

std::string run_name(const ReportSeries& r) { return r.label + "#" + std::to_string(r.seed); }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string signed_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.*f", digits, v == 0.0 ? 0.0 : v);
  std::string out = buf;
  if (out.find_first_not_of("+-0.") == std::string::npos) out[0] = '+';  // no "-0.0000"
  return out;
}

std::vector<std::size_t> cumulative(const std::vector<RoundMetrics>& rows, std::size_t n) {
  std::vector<std::size_t> out(n);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) out[i] = (sum += rows[i].down_scalars + rows[i].up_scalars);
  return out;
}

const char* display_name(const std::string& label) {
  if (label == "fedavg") return "FedAvg";
  if (label == "fedprox") return "FedProx";
  if (label == "fedma") return "FedMA";
  if (label == "dnc") return "D&C";
  if (label == "dnc_prime") return "D&C'";
  return nullptr;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

ComparisonReport compare_report(const std::vector<ReportSeries>& runs, const std::string& title) {
  if (runs.size() < 2) throw InputError("a comparison needs at least two runs");
  ComparisonReport rep;
  std::size_t shortest = runs.front().rows.size();
  std::size_t longest = 0;
  for (const auto& r : runs) {
    shortest = std::min(shortest, r.rows.size());
    longest = std::max(longest, r.rows.size());
  }
  if (shortest == 0) throw InputError("a run in the comparison has no training rounds");
  rep.rounds = shortest;
  rep.truncated = longest != shortest;

  std::vector<std::size_t> baseline(runs.size(), 0);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = 0; j < runs.size(); ++j) {
      if (runs[j].label == "fedavg" && runs[j].seed == runs[i].seed) {
        baseline[i] = j;
        break;
      }
    }
  }
  std::vector<std::vector<std::size_t>> cum;
  for (const auto& r : runs) cum.push_back(cumulative(r.rows, shortest));

  // Aligned per-round table.
  std::string& t = rep.table;
  if (rep.truncated) {
    t += "# round counts differ; aligned on the first " + std::to_string(shortest) + " rounds:";
    for (const auto& r : runs) t += " " + run_name(r) + "=" + std::to_string(r.rows.size());
    t += "\n";
  }
  t += "# baseline per run:";
  for (std::size_t i = 0; i < runs.size(); ++i) t += " " + run_name(runs[i]) + "->" + run_name(runs[baseline[i]]);
  t += "\n";
  const std::size_t w = 12;
  t += pad("round", 6);
  for (const auto& r : runs) {
    const auto n = run_name(r);
    t += " " + pad("acc:" + n, std::max(w, n.size() + 4)) + " " + pad("diff:" + n, std::max(w, n.size() + 5)) + " " +
         pad("xfer:" + n, std::max(w, n.size() + 5)) + " " + pad("ratio:" + n, std::max(w, n.size() + 6));
  }
  t += "\n";
  for (std::size_t k = 0; k < shortest; ++k) {
    t += pad(std::to_string(k + 1), 6);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto n = run_name(runs[i]);
      const auto& b = runs[baseline[i]];
      const double acc = runs[i].rows[k].accuracy;
      const double diff = acc - b.rows[k].accuracy;
      const auto ratio = static_cast<double>(cum[i][k]) / static_cast<double>(cum[baseline[i]][k]);
      t += " " + pad(fixed(acc, 4), std::max(w, n.size() + 4)) + " " + pad(signed_fixed(diff, 4), std::max(w, n.size() + 5)) +
           " " + pad(std::to_string(cum[i][k]), std::max(w, n.size() + 5)) + " " +
           pad(fixed(ratio, 6), std::max(w, n.size() + 6));
    }
    t += "\n";
  }

  // Final-round summary per algorithm, over seeds.
  std::map<std::string, std::vector<double>> finals;
  for (const auto& r : runs) finals[r.label].push_back(r.rows[shortest - 1].accuracy);
  std::string& s = rep.summary;
  s += "final accuracy after " + std::to_string(shortest) + " rounds (mean +- half range over seeds)\n";
  s += pad("algorithm", 10) + pad("runs", 6) + pad("mean", 10) + pad("min", 10) + pad("max", 10) + pad("+-", 10) + "\n";
  std::vector<std::string> order = {"fedavg", "fedprox", "fedma", "dnc", "dnc_prime"};
  for (const auto& [label, v] : finals)
    if (!display_name(label)) order.push_back(label);
  for (const auto& label : order) {
    const char* shown = display_name(label);
    std::string name = shown ? shown : label;
    if (label == "fedma") {
      s += pad(name, 10) + "  not implemented\n";
      continue;
    }
    auto it = finals.find(label);
    if (it == finals.end()) continue;
    const auto& v = it->second;
    double mean = 0;
    for (double a : v) mean += a;
    mean /= static_cast<double>(v.size());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    s += pad(name, 10) + pad(std::to_string(v.size()), 6) + pad(fixed(mean, 4), 10) + pad(fixed(*lo, 4), 10) +
         pad(fixed(*hi, 4), 10) + pad(fixed((*hi - *lo) / 2, 4), 10) + "\n";
  }

  // SVG chart, x = round, y = accuracy in [0, 1].
  const double W = 640, H = 400, left = 60, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto x_of = [&](std::size_t k) {
    return left + (shortest == 1 ? pw / 2 : pw * static_cast<double>(k) / static_cast<double>(shortest - 1));
  };
  auto y_of = [&](double acc) { return top + ph * (1.0 - std::clamp(acc, 0.0, 1.0)); };
  std::string& g = rep.svg;
  g += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  g += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  g += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  g += "<text x=\"" + fixed(left + pw / 2, 1) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       xml_escape(title) + "</text>\n";
  g += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top + ph, 1) + "\" x2=\"" + fixed(left + pw, 1) + "\" y2=\"" +
       fixed(top + ph, 1) + "\" stroke=\"black\"/>\n";
  g += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top, 1) + "\" x2=\"" + fixed(left, 1) + "\" y2=\"" +
       fixed(top + ph, 1) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double acc = i / 4.0;
    g += "<text x=\"" + fixed(left - 6, 1) + "\" y=\"" + fixed(y_of(acc) + 4, 1) +
         "\" text-anchor=\"end\" font-size=\"11\">" + fixed(acc, 2) + "</text>\n";
  }
  for (std::size_t k = 0; k < shortest; ++k) {
    if (shortest > 10 && (k + 1) % 2 != 0 && k + 1 != shortest) continue;
    g += "<text x=\"" + fixed(x_of(k), 1) + "\" y=\"" + fixed(top + ph + 16, 1) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + std::to_string(k + 1) + "</text>\n";
  }
  g += "<text x=\"" + fixed(left + pw / 2, 1) + "\" y=\"" + fixed(H - 10, 1) +
       "\" text-anchor=\"middle\" font-size=\"13\">communication round</text>\n";
  g += "<text x=\"16\" y=\"" + fixed(top + ph / 2, 1) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
       fixed(top + ph / 2, 1) + ")\">test accuracy</text>\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string points;
    for (std::size_t k = 0; k < shortest; ++k)
      points += (k ? " " : "") + fixed(x_of(k), 2) + "," + fixed(y_of(runs[i].rows[k].accuracy), 2);
    const char* shown = display_name(runs[i].label);
    std::string legend = (shown ? std::string(shown) : runs[i].label) + " seed " + std::to_string(runs[i].seed);
    g += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points +
         "\"><title>" + xml_escape(legend) + "</title></polyline>\n";
    const double ly = top + 14.0 * static_cast<double>(i);
    g += "<text x=\"" + fixed(left + pw + 10, 1) + "\" y=\"" + fixed(ly + 4, 1) + "\" font-size=\"11\" fill=\"" + color +
         "\">" + xml_escape(legend) + "</text>\n";
  }
  g += "</svg>\n";
  return rep;
}

}  // namespace fdnc
