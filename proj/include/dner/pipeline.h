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

// Model configuration, training loop, prediction and checkpoints.

#ifndef DNER_PIPELINE_H_
#define DNER_PIPELINE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dner/autodiff.h"
#include "dner/corpus.h"
#include "dner/crf.h"
#include "dner/embeddings.h"
#include "dner/encoder.h"
#include "dner/evaluate.h"
#include "dner/lexicon.h"
#include "dner/tagging.h"

namespace dner {

// Hyperparameters. LSTM unit counts are per direction.
struct ModelConfig {
  std::size_t epochs = 15;
  double dropout = 0.5;
  std::size_t batch_size = 20;
  std::string optimizer = "adam";
  double learning_rate = 0.001;
  double learning_decay = 0.9;
  double clip_norm = 5.0;
  std::size_t char_lstm_units = 100;
  std::size_t word_lstm_units = 300;
  std::size_t char_dim = 100;
  std::size_t word_dim = 200;
  Scheme scheme = Scheme::kIobes;
  bool use_dictionary = true;   // V1
  bool use_pretrained = true;   // V2
  bool use_crf = true;          // V3
  bool use_chars = true;        // V4
  bool mask_transitions = false;
  std::uint64_t seed = 1;
  // Comma-separated entity types to keep; empty keeps all.
  std::string keep_types;
  // Kept types are renamed to this; empty keeps the original names.
  std::string collapse_to = "Disease";
  std::size_t threads = 1;

  // Key names in file order.
  static const std::vector<std::string>& keys();
  std::string get(std::string_view key) const;
  // Throws ConfigError on unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  // Throws ConfigError when a value is out of range.
  void validate() const;

  std::string to_text() const;  // key=value lines
  // Applies key=value lines ('#' comments allowed) on top of *this.
  void apply_text(std::string_view text);

  EncoderConfig encoder() const;
  std::array<bool, 4> flags() const {
    return {use_dictionary, use_pretrained, use_crf, use_chars};
  }
};

// Sentences of a corpus with their gold token spans.
struct Dataset {
  std::vector<Document> docs;
  std::vector<Sentence> sentences;
  std::vector<std::vector<Span>> gold;
  Diagnostics diagnostics;
};

// Applies keep_types / collapse_to to the mentions of `docs`.
std::vector<Document> filter_types(std::vector<Document> docs,
                                   const ModelConfig& config);
Dataset make_dataset(std::vector<Document> docs, const ModelConfig& config);

struct TrainingMetadata {
  std::size_t best_epoch = 0;  // 1-based; 0 before training
  double best_dev_f1 = -1.0;   // -1 without a dev set
  std::vector<double> loss_curve;  // mean sentence loss per epoch
  std::vector<double> dev_f1_curve;

  bool operator==(const TrainingMetadata&) const = default;
};

class Model {
 public:
  ModelConfig config;
  TagInventory inventory;
  EmbeddingTable words;  // vocabulary; trained vectors live in encoder
  CharVocab chars;
  Lexicon lexicon;
  EncoderParams encoder;
  EmissionProjection projection;
  ad::Parameter transitions;
  TrainingMetadata metadata;

  // Fresh parameters for the given vocabularies.
  static Model create(const ModelConfig& config, std::vector<std::string> types,
                      EmbeddingTable words, CharVocab chars, Lexicon lexicon,
                      Rng& rng);

  ad::ParameterList parameters();

  SentenceInput input(std::span<const std::string> surfaces) const;
  // Emission scores [T x m] on `g`.
  ad::Var emissions(ad::Graph& g, const SentenceInput& in, bool training,
                    Rng& rng);
  ad::Var loss(ad::Graph& g, const SentenceInput& in,
               std::span<const std::size_t> gold, bool training, Rng& rng);

  // Inference; Viterbi or local decoding per config, then repair.
  TagSequence tag(const SentenceInput& in);
  std::vector<Span> spans(const Sentence& sentence);
  // One entry per sentence; decoded on config.threads workers.
  std::vector<std::vector<Span>> predict_spans(
      std::span<const Sentence> sentences);

  void save(std::ostream& out);
  static Model load(std::istream& in);
  void save_file(const std::string& path);
  static Model load_file(const std::string& path);
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double dev_f1 = -1.0;
  double seconds = 0.0;
};
using ProgressFn = std::function<void(const EpochReport&)>;
using LogFn = std::function<void(const std::string&)>;

struct TrainingInputs {
  std::vector<Document> train;
  std::vector<Document> dev;
  std::istream* embeddings = nullptr;  // word2vec text; needed when V2 is on
  std::istream* medic = nullptr;       // optional lexicon
  ProgressFn progress;
  LogFn log;
};

// Returns the model of the best dev epoch (last epoch without dev data).
Model train(const ModelConfig& config, TrainingInputs inputs);

// Documents with predicted mentions (concept ids empty).
std::vector<Document> predict(Model& model, std::span<const Document> docs);

}  // namespace dner

#endif  // DNER_PIPELINE_H_
