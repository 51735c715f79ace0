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

#include "dner/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "dner/crf.h"
#include "dner/encoder.h"
#include "dner/errors.h"
#include "dner/random.h"

namespace dner {
namespace {

using ad::Graph;
using ad::Parameter;
using ad::Tensor;
using ad::Var;

Parameter random_param(const std::string& name, std::vector<std::size_t> shape,
                       Rng& rng, double bound = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return Parameter(name, std::move(t));
}

Tensor random_transitions(std::size_t n_tags, Rng& rng) {
  Tensor tr = make_transitions(n_tags);
  for (double& v : tr.data()) {
    if (std::isfinite(v)) v = rng.uniform(-1.0, 1.0);
  }
  return tr;
}

// A small encoder with every feature switched on and dropout off.
struct TinyEncoder {
  EncoderConfig config;
  EncoderParams params;
  SentenceInput input;

  explicit TinyEncoder(Rng& rng) {
    config.char_dim = 3;
    config.char_hidden = 3;
    config.word_dim = 4;
    config.word_hidden = 3;
    config.dropout = 0.0;
    const std::size_t char_vocab = 7;
    const std::size_t word_rows = 6;
    params.char_table = random_param("char_table", {char_vocab, 3}, rng);
    params.word_table = random_param("word_table", {word_rows, 4}, rng);
    params.char_lstm = BiLstmParams::init("char_lstm", 3, 3, rng);
    params.word_lstm =
        BiLstmParams::init("word_lstm", config.token_rep_dim(), 3, rng);
    // Random biases so the check does not sit at the init point only.
    for (Parameter* p : params.parameters()) {
      if (p->value.rank() == 1) {
        for (double& v : p->value.data()) v += rng.uniform(-0.5, 0.5);
      }
    }
    input.word_rows = {2, 5, 2};
    input.char_ids = {{1, 2, 3}, {4}, {5, 1, 6, 1}};
    input.dict.resize(3);
    input.dict[0].solo = true;
    input.dict[1].multiword_part = true;
    input.dict[1].synonym = true;
    input.dict[2].abbreviation = true;
  }

  std::vector<Var> encode(Graph& g) {
    Rng unused(0);
    return contextual_representation(g, params, config, input, false, unused);
  }
};

std::vector<GradCheckResult> autodiff_suite(std::uint64_t seed,
                                            const GradCheckOptions& options) {
  Rng rng(seed);
  Parameter a = random_param("a", {3, 4}, rng);
  Parameter v = random_param("v", {4}, rng);
  Parameter bias = random_param("bias", {3}, rng);
  Parameter b = random_param("b", {2, 3}, rng);
  Parameter u = random_param("u", {2}, rng);
  const std::vector<double> mask = {2.0, 0.0, 2.0};
  auto loss = [&](Graph& g) {
    Var A = g.param(a), V = g.param(v), Bias = g.param(bias), B = g.param(b),
        U = g.param(u);
    Var h = ad::sigmoid(ad::add(ad::matvec(A, V), Bias));
    Var k = ad::tanh(ad::apply_mask(ad::mul(h, Bias), mask));
    Var z = ad::add(ad::matvec(B, ad::sub(h, ad::scale(k, 0.5))), U);
    const Var cols[] = {h, k, ad::slice(ad::concat(std::vector<Var>{V, Bias}), 2, 3)};
    Var m = ad::add_bias(ad::matmul(B, ad::stack_columns(cols)), U);
    Var lse = ad::logsumexp(ad::concat(std::vector<Var>{z, ad::column(m, 1)}));
    Var top = ad::max(ad::column(m, 2));
    return ad::add(ad::add(lse, ad::scale(top, 0.3)),
                   ad::add(ad::pick(m, 3), ad::scale(ad::sum(ad::mul(z, z)), 0.1)));
  };
  return check_gradients("autodiff", loss, {&a, &v, &bias, &b, &u}, options);
}

std::vector<GradCheckResult> crf_suite(std::uint64_t seed,
                                       const GradCheckOptions& options) {
  Rng rng(seed);
  const std::size_t T = 4, m = 5;
  Parameter s = random_param("emissions", {T, m}, rng, 2.0);
  Parameter tr("transitions", random_transitions(T, rng));
  TagPath gold(m);
  for (auto& y : gold) y = rng.below(T);
  auto loss = [&](Graph& g) { return nll_loss(g.param(s), g.param(tr), gold); };
  return check_gradients("crf", loss, {&s, &tr}, options);
}

std::vector<GradCheckResult> encoder_suite(std::uint64_t seed,
                                           const GradCheckOptions& options) {
  Rng rng(seed);
  TinyEncoder enc(rng);
  auto loss = [&](Graph& g) {
    std::vector<Var> parts;
    for (Var c : enc.encode(g)) parts.push_back(ad::sum(c));
    return ad::sum(ad::concat(parts));
  };
  return check_gradients("encoder", loss, enc.params.parameters(), options);
}

std::vector<GradCheckResult> model_suite(std::uint64_t seed,
                                         const GradCheckOptions& options) {
  Rng rng(seed);
  const std::size_t T = 4;
  TinyEncoder enc(rng);
  EmissionProjection proj = EmissionProjection::init(T, 6, rng);
  for (double& v : proj.bias.value.data()) v = rng.uniform(-0.5, 0.5);
  Parameter tr("transitions", random_transitions(T, rng));
  const TagPath gold = {1, 2, 0};
  auto loss = [&](Graph& g) {
    Var s = project(g.param(proj.weight), g.param(proj.bias), enc.encode(g));
    return nll_loss(s, g.param(tr), gold);
  };
  ad::ParameterList params = enc.params.parameters();
  params.push_back(&proj.weight);
  params.push_back(&proj.bias);
  params.push_back(&tr);
  return check_gradients("model", loss, params, options);
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

std::vector<GradCheckResult> check_gradients(const std::string& suite,
                                             const LossFn& loss,
                                             const ad::ParameterList& params,
                                             const GradCheckOptions& options) {
  ad::zero_grad(params);
  {
    Graph g;
    g.backward(loss(g));
  }
  std::vector<Tensor> analytic;
  for (const Parameter* p : params) analytic.push_back(p->grad);

  const auto value = [&] {
    Graph g;
    return loss(g).value().item();
  };
  std::vector<GradCheckResult> out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    GradCheckResult r{suite, p.name, 0, 0.0};
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double orig = p.value[i];
      if (!std::isfinite(orig)) continue;
      p.value[i] = orig + options.step;
      const double plus = value();
      p.value[i] = orig - options.step;
      const double minus = value();
      p.value[i] = orig;
      const double numeric = (plus - minus) / (2 * options.step);
      r.max_rel_error = std::max(
          r.max_rel_error, relative_error(analytic[k][i], numeric, options.floor));
      ++r.checked;
    }
    out.push_back(r);
  }
  ad::zero_grad(params);
  return out;
}

std::vector<std::string> gradient_suites() {
  return {"autodiff", "crf", "encoder", "model"};
}

std::vector<GradCheckResult> run_gradient_suite(const std::string& suite,
                                                std::uint64_t seed,
                                                const GradCheckOptions& options) {
  if (suite == "autodiff") return autodiff_suite(seed, options);
  if (suite == "crf") return crf_suite(seed, options);
  if (suite == "encoder") return encoder_suite(seed, options);
  if (suite == "model") return model_suite(seed, options);
  throw ConfigError("unknown gradient suite '" + suite + "'");
}

}  // namespace dner
