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

// LSTM and BiLSTM layers, the character-level word representation and the
// word-level contextual encoder.

#ifndef DNER_ENCODER_H_
#define DNER_ENCODER_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dner/autodiff.h"
#include "dner/embeddings.h"
#include "dner/lexicon.h"
#include "dner/random.h"

namespace dner {

// Gate blocks are stacked in the order input, forget, output, candidate:
// w_x is [4H x in], w_h is [4H x H], bias is [4H].
struct LstmParams {
  ad::Parameter w_x;
  ad::Parameter w_h;
  ad::Parameter bias;

  std::size_t input_size() const { return w_x.value.cols(); }
  std::size_t hidden_size() const { return w_h.value.cols(); }

  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights with fan_out = hidden
  // (one gate block), forget bias 1.
  static LstmParams init(const std::string& name, std::size_t input,
                         std::size_t hidden, Rng& rng);
  ad::ParameterList parameters();
};

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  std::size_t hidden_size() const { return forward.hidden_size(); }
  static BiLstmParams init(const std::string& name, std::size_t input,
                           std::size_t hidden, Rng& rng);
  ad::ParameterList parameters();
};

// LstmParams placed on a graph.
struct BoundLstm {
  ad::Var w_x;
  ad::Var w_h;
  ad::Var bias;
  std::size_t hidden = 0;

  static BoundLstm bind(ad::Graph& g, LstmParams& p);
};

struct BoundBiLstm {
  BoundLstm forward;
  BoundLstm backward;

  static BoundBiLstm bind(ad::Graph& g, BiLstmParams& p);
};

struct LstmState {
  ad::Var h;
  ad::Var c;
};

LstmState lstm_step(const BoundLstm& p, ad::Var x, ad::Var h_prev,
                    ad::Var c_prev);

// Hidden states of one direction, listed in input order. With `reverse`
// the recurrence runs from the last input to the first.
std::vector<ad::Var> run_lstm(ad::Graph& g, const BoundLstm& p,
                              std::span<const ad::Var> inputs, bool reverse);

// output_t = [forward h_t ; backward h_t]. Throws ShapeError when empty.
std::vector<ad::Var> bilstm(ad::Graph& g, const BoundBiLstm& p,
                            std::span<const ad::Var> inputs);

// [final forward state ; final backward state] over the embedded
// characters of one word.
ad::Var char_representation(ad::Graph& g, const BoundBiLstm& p,
                            ad::Parameter& char_table,
                            std::span<const std::size_t> char_ids);

// Widths are per LSTM direction.
struct EncoderConfig {
  std::size_t char_dim = 100;
  std::size_t char_hidden = 100;
  std::size_t word_dim = 200;
  std::size_t word_hidden = 300;
  bool use_chars = true;  // off: TokenRep has no char part
  bool use_dict = true;   // off: dictionary bits are all zero
  double dropout = 0.5;

  std::size_t token_rep_dim() const {
    return (use_chars ? 2 * char_hidden : 0) + word_dim + kDictFeatureDim;
  }
};

struct EncoderParams {
  ad::Parameter char_table;  // [char vocab x char_dim]
  ad::Parameter word_table;  // [word rows x word_dim]
  BiLstmParams char_lstm;
  BiLstmParams word_lstm;

  // Random char table and LSTMs; the word table is copied from `words`.
  static EncoderParams init(const EncoderConfig& config,
                            std::size_t char_vocab_size,
                            const EmbeddingTable& words, Rng& rng);
  // Fixed order, also used for checkpoints.
  ad::ParameterList parameters();
};

// Lookup indices and dictionary features of one tokenized sentence.
struct SentenceInput {
  std::vector<std::size_t> word_rows;
  std::vector<std::vector<std::size_t>> char_ids;
  std::vector<DictFeatureVector> dict;

  std::size_t size() const { return word_rows.size(); }
};

SentenceInput prepare_input(std::span<const std::string> surfaces,
                            const EmbeddingTable& words,
                            const CharVocab& chars, const Lexicon& lexicon);

// TokenReps of every token (before dropout).
std::vector<ad::Var> token_representations(ad::Graph& g, EncoderParams& params,
                                           const EncoderConfig& config,
                                           const SentenceInput& input);

// Dropout on TokenReps, word BiLSTM, then dropout on the outputs. Dropout is
// skipped unless `training`.
std::vector<ad::Var> contextual_representation(ad::Graph& g,
                                               EncoderParams& params,
                                               const EncoderConfig& config,
                                               const SentenceInput& input,
                                               bool training, Rng& rng);

}  // namespace dner

#endif  // DNER_ENCODER_H_
