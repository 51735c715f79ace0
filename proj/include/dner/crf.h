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

// Linear-chain CRF.
//
// Emission scores S are a [T x m] matrix (tag x position). Transitions are a
// [(T+2) x (T+2)] matrix whose last two indices are the virtual START and
// STOP states: row T holds START->tag scores and column T+1 holds
// tag->STOP scores. Entries into START and out of STOP are -inf and never
// read.

#ifndef DNER_CRF_H_
#define DNER_CRF_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dner/autodiff.h"
#include "dner/random.h"
#include "dner/tagging.h"

namespace dner {

using TagPath = std::vector<std::size_t>;

inline std::size_t start_state(std::size_t n_tags) { return n_tags; }
inline std::size_t stop_state(std::size_t n_tags) { return n_tags + 1; }

// Zero transitions with the START/STOP structure in place.
ad::Tensor make_transitions(std::size_t n_tags);
// Sets scheme-illegal transitions (e.g. O -> I-X) to -inf.
void mask_transitions(ad::Tensor& tr, const TagInventory& inventory);

struct EmissionProjection {
  ad::Parameter weight;  // [T x 2H]
  ad::Parameter bias;    // [T]

  static EmissionProjection init(std::size_t n_tags, std::size_t input,
                                 Rng& rng);
  ad::ParameterList parameters() { return {&weight, &bias}; }
};

// Column j of the result is weight * contextual[j] + bias.
ad::Var project(ad::Var weight, ad::Var bias,
                std::span<const ad::Var> contextual);

double global_score(const ad::Tensor& s, const ad::Tensor& tr,
                    std::span<const std::size_t> path);
// Forward algorithm in log space.
double log_partition(const ad::Tensor& s, const ad::Tensor& tr);

// log Z - Score(gold) as a single graph node; the backward pass uses
// forward-backward marginals.
ad::Var nll_loss(ad::Var s, ad::Var tr, std::span<const std::size_t> gold);
// Same quantity assembled from elementary ops; slower, used as a check.
ad::Var nll_loss_composite(ad::Var s, ad::Var tr,
                           std::span<const std::size_t> gold);
// Mean per-token softmax cross-entropy (transitions unused).
ad::Var local_loss(ad::Var s, std::span<const std::size_t> gold);

// Best path under global_score; ties go to the lowest tag index.
TagPath viterbi_decode(const ad::Tensor& s, const ad::Tensor& tr);
// Per-position argmax of the emissions.
TagPath local_decode(const ad::Tensor& s);

// Plain-text score fixture:
//
//   tags O B-Disease I-Disease
//   tokens In colon carcinoma cells
//   emissions
//   O 3 0 0 8                   one row per tag, one column per token
//   ...
//   transitions                 rows: START then tags; columns: tags, STOP
//   START 4 0 0 -inf
//   O 0 2 0 1
//   ...
//   path O B-Disease I-Disease O
//
// '#' starts a comment line.
struct CrfFixture {
  std::vector<std::string> tags;
  std::vector<std::string> tokens;
  ad::Tensor emissions;    // [T x m]
  ad::Tensor transitions;  // [(T+2) x (T+2)]
  std::vector<TagPath> paths;

  std::string path_string(std::span<const std::size_t> path) const;
};

CrfFixture parse_fixture(std::istream& in);

}  // namespace dner

#endif  // DNER_CRF_H_
