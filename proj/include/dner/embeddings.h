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

#ifndef DNER_EMBEDDINGS_H_
#define DNER_EMBEDDINGS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dner/corpus.h"

namespace dner {

using Vocabulary = std::set<std::string>;

// Lowercases ASCII letters and maps pure numbers (digits with optional
// . , - % signs) to "NUM". Idempotent: "NUM" maps to itself.
std::string normalize_token(std::string_view surface);

// Normalized words of every token in `sentences`.
Vocabulary word_vocabulary(std::span<const Sentence> sentences);

// Word look-up table. Row 0 is UNK and row 1 is NUM; both are always
// present. Unknown words resolve to the UNK row.
class EmbeddingTable {
 public:
  static constexpr std::size_t kUnkRow = 0;
  static constexpr std::size_t kNumRow = 1;
  static constexpr std::string_view kUnkWord = "<UNK>";
  static constexpr std::string_view kNumWord = "NUM";

  EmbeddingTable() = default;
  // Table holding only the two special rows, zero-initialized.
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() { return data_; }
  std::span<const double> row(std::size_t i) const;
  std::span<double> mutable_row(std::size_t i);

  bool contains(std::string_view normalized) const;
  // Row of an already-normalized word, UNK when absent.
  std::size_t index(std::string_view normalized) const;
  // Returns the new (or existing) row of `word`.
  std::size_t add(const std::string& word);

  void save(std::ostream& out) const;
  static EmbeddingTable load(std::istream& in);

  bool operator==(const EmbeddingTable& other) const {
    return dim_ == other.dim_ && words_ == other.words_ && data_ == other.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;  // rows() x dim(), row-major
};

// Reads word2vec text vectors ("count dim" header optional), keeping only
// words whose normalized form is in `restrict_to`. An exact match beats a
// match through normalization. UNK/NUM rows absent from the file are drawn
// from the random_table distribution with `seed`. `expected_dim` of 0
// accepts whatever the file declares.
EmbeddingTable load_word2vec_text(std::istream& in,
                                  const Vocabulary& restrict_to,
                                  std::size_t expected_dim = 0,
                                  std::uint64_t seed = 1);

// UNK, NUM, then `vocab` in sorted order; every entry uniform in
// [-sqrt(3/dim), +sqrt(3/dim)].
EmbeddingTable random_table(const Vocabulary& vocab, std::size_t dim,
                            std::uint64_t seed);

double embedding_init_bound(std::size_t dim);

// UTF-8 decoding; malformed bytes become U+FFFD.
std::vector<char32_t> utf8_codepoints(std::string_view text);

// Dense character index over raw (case-preserving) surfaces. Index 0 is the
// shared padding/unknown character.
class CharVocab {
 public:
  static constexpr std::size_t kUnknown = 0;

  std::size_t size() const { return chars_.size() + 1; }
  std::size_t index(char32_t c) const;
  std::vector<std::size_t> indices(std::string_view word) const;
  const std::vector<char32_t>& chars() const { return chars_; }

  static CharVocab from_chars(std::vector<char32_t> chars);

  bool operator==(const CharVocab& other) const {
    return chars_ == other.chars_;
  }

 private:
  std::vector<char32_t> chars_;  // sorted; index = position + 1
};

CharVocab build_char_vocab(std::span<const Sentence> corpus);

}  // namespace dner

#endif  // DNER_EMBEDDINGS_H_
