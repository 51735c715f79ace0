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

#include "dner/encoder.h"

#include <algorithm>
#include <cmath>

#include "dner/errors.h"

namespace dner {
namespace {

using ad::Parameter;
using ad::Tensor;
using ad::Var;

Parameter uniform_matrix(const std::string& name, std::size_t rows,
                         std::size_t cols, double bound, Rng& rng) {
  Tensor t({rows, cols});
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return Parameter(name, std::move(t));
}

void append(ad::ParameterList& out, const ad::ParameterList& more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

LstmParams LstmParams::init(const std::string& name, std::size_t input,
                            std::size_t hidden, Rng& rng) {
  LstmParams p;
  const double bx = std::sqrt(6.0 / static_cast<double>(input + hidden));
  const double bh = std::sqrt(6.0 / static_cast<double>(2 * hidden));
  p.w_x = uniform_matrix(name + ".w_x", 4 * hidden, input, bx, rng);
  p.w_h = uniform_matrix(name + ".w_h", 4 * hidden, hidden, bh, rng);
  Tensor b({4 * hidden});
  for (std::size_t k = hidden; k < 2 * hidden; ++k) b[k] = 1.0;
  p.bias = Parameter(name + ".bias", std::move(b));
  return p;
}

ad::ParameterList LstmParams::parameters() { return {&w_x, &w_h, &bias}; }

BiLstmParams BiLstmParams::init(const std::string& name, std::size_t input,
                                std::size_t hidden, Rng& rng) {
  BiLstmParams p;
  p.forward = LstmParams::init(name + ".fwd", input, hidden, rng);
  p.backward = LstmParams::init(name + ".bwd", input, hidden, rng);
  return p;
}

ad::ParameterList BiLstmParams::parameters() {
  ad::ParameterList out = forward.parameters();
  append(out, backward.parameters());
  return out;
}

BoundLstm BoundLstm::bind(ad::Graph& g, LstmParams& p) {
  return BoundLstm{g.param(p.w_x), g.param(p.w_h), g.param(p.bias),
                   p.hidden_size()};
}

BoundBiLstm BoundBiLstm::bind(ad::Graph& g, BiLstmParams& p) {
  return BoundBiLstm{BoundLstm::bind(g, p.forward),
                     BoundLstm::bind(g, p.backward)};
}

LstmState lstm_step(const BoundLstm& p, Var x, Var h_prev, Var c_prev) {
  const std::size_t H = p.hidden;
  Var z = ad::add(ad::add(ad::matvec(p.w_x, x), ad::matvec(p.w_h, h_prev)),
                  p.bias);
  Var i = ad::sigmoid(ad::slice(z, 0, H));
  Var f = ad::sigmoid(ad::slice(z, H, H));
  Var o = ad::sigmoid(ad::slice(z, 2 * H, H));
  Var cand = ad::tanh(ad::slice(z, 3 * H, H));
  Var c = ad::add(ad::mul(f, c_prev), ad::mul(i, cand));
  Var h = ad::mul(o, ad::tanh(c));
  return {h, c};
}

std::vector<Var> run_lstm(ad::Graph& g, const BoundLstm& p,
                          std::span<const Var> inputs, bool reverse) {
  const std::size_t n = inputs.size();
  std::vector<Var> out(n);
  Var h = g.constant(Tensor({p.hidden}));
  Var c = h;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    LstmState s = lstm_step(p, inputs[t], h, c);
    h = s.h;
    c = s.c;
    out[t] = h;
  }
  return out;
}

std::vector<Var> bilstm(ad::Graph& g, const BoundBiLstm& p,
                        std::span<const Var> inputs) {
  if (inputs.empty()) throw ShapeError("bilstm over an empty sequence");
  const auto fwd = run_lstm(g, p.forward, inputs, false);
  const auto bwd = run_lstm(g, p.backward, inputs, true);
  std::vector<Var> out;
  out.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Var parts[] = {fwd[t], bwd[t]};
    out.push_back(ad::concat(parts));
  }
  return out;
}

Var char_representation(ad::Graph& g, const BoundBiLstm& p,
                        Parameter& char_table,
                        std::span<const std::size_t> char_ids) {
  if (char_ids.empty()) throw ShapeError("char representation of empty word");
  std::vector<Var> chars;
  chars.reserve(char_ids.size());
  for (std::size_t id : char_ids) chars.push_back(ad::lookup(g, char_table, id));
  const auto fwd = run_lstm(g, p.forward, chars, false);
  const auto bwd = run_lstm(g, p.backward, chars, true);
  const Var parts[] = {fwd.back(), bwd.front()};
  return ad::concat(parts);
}

EncoderParams EncoderParams::init(const EncoderConfig& config,
                                  std::size_t char_vocab_size,
                                  const EmbeddingTable& words, Rng& rng) {
  if (words.dim() != config.word_dim) {
    throw ConfigError("word table has dimension " +
                      std::to_string(words.dim()) + " but word_dim is " +
                      std::to_string(config.word_dim));
  }
  EncoderParams p;
  p.char_table =
      uniform_matrix("char_table", std::max<std::size_t>(char_vocab_size, 1),
                     config.char_dim, embedding_init_bound(config.char_dim),
                     rng);
  p.word_table = Parameter(
      "word_table", Tensor({words.rows(), words.dim()}, words.data()));
  p.char_lstm =
      BiLstmParams::init("char_lstm", config.char_dim, config.char_hidden, rng);
  p.word_lstm = BiLstmParams::init("word_lstm", config.token_rep_dim(),
                                   config.word_hidden, rng);
  return p;
}

ad::ParameterList EncoderParams::parameters() {
  ad::ParameterList out = {&char_table, &word_table};
  append(out, char_lstm.parameters());
  append(out, word_lstm.parameters());
  return out;
}

SentenceInput prepare_input(std::span<const std::string> surfaces,
                            const EmbeddingTable& words,
                            const CharVocab& chars, const Lexicon& lexicon) {
  SentenceInput in;
  for (const auto& s : surfaces) {
    in.word_rows.push_back(words.index(normalize_token(s)));
    in.char_ids.push_back(chars.indices(s));
  }
  in.dict = token_features(surfaces, lexicon);
  return in;
}

std::vector<Var> token_representations(ad::Graph& g, EncoderParams& params,
                                       const EncoderConfig& config,
                                       const SentenceInput& input) {
  std::vector<Var> reps;
  reps.reserve(input.size());
  BoundBiLstm char_lstm;
  if (config.use_chars) char_lstm = BoundBiLstm::bind(g, params.char_lstm);
  for (std::size_t t = 0; t < input.size(); ++t) {
    std::vector<Var> parts;
    if (config.use_chars) {
      parts.push_back(char_representation(g, char_lstm, params.char_table,
                                          input.char_ids[t]));
    }
    parts.push_back(ad::lookup(g, params.word_table, input.word_rows[t]));
    std::vector<double> bits(kDictFeatureDim, 0.0);
    if (config.use_dict) {
      const auto v = input.dict[t].values();
      bits.assign(v.begin(), v.end());
    }
    parts.push_back(g.constant(Tensor::vector(std::move(bits))));
    reps.push_back(ad::concat(parts));
  }
  return reps;
}

std::vector<Var> contextual_representation(ad::Graph& g, EncoderParams& params,
                                           const EncoderConfig& config,
                                           const SentenceInput& input,
                                           bool training, Rng& rng) {
  std::vector<Var> reps = token_representations(g, params, config, input);
  for (Var& r : reps) r = ad::dropout(r, config.dropout, training, rng);
  std::vector<Var> ctx =
      bilstm(g, BoundBiLstm::bind(g, params.word_lstm), reps);
  for (Var& c : ctx) c = ad::dropout(c, config.dropout, training, rng);
  return ctx;
}

}  // namespace dner
