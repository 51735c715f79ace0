// Copyright 2026 The dner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dner/evaluate.h"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <tuple>

#include "dner/errors.h"

namespace dner {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Display width of a UTF-8 string, one column per code point.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t w) {
  return s + std::string(w > width(s) ? w - width(s) : 0, ' ');
}

}  // namespace

double EvalReport::precision() const {
  return ratio(true_positives, true_positives + false_positives);
}

double EvalReport::recall() const {
  return ratio(true_positives, true_positives + false_negatives);
}

double EvalReport::f1() const {
  return ratio(2 * true_positives,
               2 * true_positives + false_positives + false_negatives);
}

EvalReport& EvalReport::operator+=(const EvalReport& other) {
  true_positives += other.true_positives;
  false_positives += other.false_positives;
  false_negatives += other.false_negatives;
  return *this;
}

EvalReport score_sentence(const std::vector<Span>& gold,
                          const std::vector<Span>& pred) {
  std::vector<Span> g = gold, p = pred;
  std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  std::vector<Span> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(),
                        std::back_inserter(common));
  EvalReport r;
  r.true_positives = common.size();
  r.false_positives = p.size() - common.size();
  r.false_negatives = g.size() - common.size();
  return r;
}

EvalReport score_entities(std::span<const std::vector<Span>> gold,
                          std::span<const std::vector<Span>> pred) {
  if (gold.size() != pred.size()) {
    throw ShapeError("gold has " + std::to_string(gold.size()) +
                     " sentences but prediction has " +
                     std::to_string(pred.size()));
  }
  EvalReport total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    total += score_sentence(gold[i], pred[i]);
  }
  return total;
}

std::string format_report(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "true positives   %8zu\n"
                "false positives  %8zu\n"
                "false negatives  %8zu\n"
                "precision        %8.4f\n"
                "recall           %8.4f\n"
                "f1               %8.4f\n",
                r.true_positives, r.false_positives, r.false_negatives,
                r.precision(), r.recall(), r.f1());
  return buf;
}

std::string key_value_report(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "tp=%zu\nfp=%zu\nfn=%zu\nprecision=%.17g\nrecall=%.17g\n"
                "f1=%.17g\n",
                r.true_positives, r.false_positives, r.false_negatives,
                r.precision(), r.recall(), r.f1());
  return buf;
}

std::string ablation_report(std::vector<AblationRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AblationRow& a, const AblationRow& b) {
                     return std::tie(a.dataset, a.scheme, a.flags) <
                            std::tie(b.dataset, b.scheme, b.flags);
                   });
  const std::vector<std::string> header = {"Dataset", "Scheme", "V1", "V2",
                                           "V3",      "V4",     "P",  "R",
                                           "F1"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    std::vector<std::string> c = {row.dataset,
                                  std::string(scheme_name(row.scheme))};
    for (bool f : row.flags) c.push_back(f ? "✓" : "x");
    c.push_back(fixed(100 * row.report.precision(), 2));
    c.push_back(fixed(100 * row.report.recall(), 2));
    c.push_back(fixed(100 * row.report.f1(), 2));
    cells.push_back(std::move(c));
  }
  std::vector<std::size_t> w(header.size());
  for (std::size_t k = 0; k < header.size(); ++k) {
    w[k] = width(header[k]);
    for (const auto& c : cells) w[k] = std::max(w[k], width(c[k]));
  }
  const auto line = [&](const std::vector<std::string>& c) {
    std::string out;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) out += "  ";
      out += k + 1 < c.size() ? pad(c[k], w[k]) : c[k];
    }
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t k = 0; k < w.size(); ++k) total += w[k] + (k ? 2 : 0);
  out += std::string(total, '-') + "\n";
  for (const auto& c : cells) out += line(c);
  return out;
}

}  // namespace dner
