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

// Entity-level scoring with strict span matching, and the ablation table.

#ifndef DNER_EVALUATE_H_
#define DNER_EVALUATE_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dner/tagging.h"

namespace dner {

struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  double precision() const;
  double recall() const;
  // 2TP / (2TP + FP + FN), the harmonic mean of precision and recall.
  double f1() const;

  EvalReport& operator+=(const EvalReport& other);
  bool operator==(const EvalReport&) const = default;
};

// A predicted span counts only if (start, end, type) equals a gold span.
// Duplicates are matched as a multiset. Throws ShapeError when the two
// sides have different sentence counts.
EvalReport score_entities(std::span<const std::vector<Span>> gold,
                          std::span<const std::vector<Span>> pred);
EvalReport score_sentence(const std::vector<Span>& gold,
                          const std::vector<Span>& pred);

// Human-readable block and key=value lines.
std::string format_report(const EvalReport& report);
std::string key_value_report(const EvalReport& report);

struct AblationRow {
  std::string dataset;
  Scheme scheme = Scheme::kIob2;
  std::array<bool, 4> flags = {true, true, true, true};  // V1..V4
  EvalReport report;
};

// One row per run, ordered by (dataset, scheme, V1..V4) with off before on.
std::string ablation_report(std::vector<AblationRow> rows);

}  // namespace dner

#endif  // DNER_EVALUATE_H_
