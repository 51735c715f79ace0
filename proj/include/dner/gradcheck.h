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

// Central finite-difference checks of analytic gradients.

#ifndef DNER_GRADCHECK_H_
#define DNER_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dner/autodiff.h"

namespace dner {

struct GradCheckResult {
  std::string suite;
  std::string parameter;
  std::size_t checked = 0;  // finite entries compared
  double max_rel_error = 0.0;
};

// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

struct GradCheckOptions {
  double step = 1e-5;
  double floor = 1e-6;
};

// Builds the loss on a fresh graph from the current parameter values.
using LossFn = std::function<ad::Var(ad::Graph&)>;

// Compares backward() against central differences for every finite entry of
// every parameter in `params`.
std::vector<GradCheckResult> check_gradients(const std::string& suite,
                                             const LossFn& loss,
                                             const ad::ParameterList& params,
                                             const GradCheckOptions& options = {});

// Named suites over small random instances: "autodiff" (composite graph),
// "crf" (nll w.r.t. emissions and transitions), "encoder" (sum of
// contextual outputs on a 3-token sentence) and "model" (CRF loss of the
// full tagger with T=4 on a 3-token sentence).
std::vector<std::string> gradient_suites();
std::vector<GradCheckResult> run_gradient_suite(const std::string& suite,
                                                std::uint64_t seed,
                                                const GradCheckOptions& options = {});

}  // namespace dner

#endif  // DNER_GRADCHECK_H_
