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

// Disease gazetteer loaded from a MEDIC-style vocabulary, and the per-token
// binary dictionary features derived from it.

#ifndef DNER_LEXICON_H_
#define DNER_LEXICON_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dner/corpus.h"

namespace dner {

inline constexpr std::size_t kMaxLexiconNgram = 8;
inline constexpr std::size_t kDictFeatureDim = 4;

struct DictFeatureVector {
  bool solo = false;           // token alone is a name or synonym
  bool multiword_part = false;  // token is inside a matched n-gram, 2 <= n <= 8
  bool abbreviation = false;
  bool synonym = false;  // token occurs in some synonym string

  std::array<double, kDictFeatureDim> values() const {
    return {double(solo), double(multiword_part), double(abbreviation),
            double(synonym)};
  }
  bool operator==(const DictFeatureVector&) const = default;
};

// All keys are normalized phrases: tokens produced by tokenize(), each
// passed through normalize_token(), joined by single spaces.
class Lexicon {
 public:
  void add_entry(std::string_view raw_name);
  void add_synonym(std::string_view raw_synonym, std::string_view raw_canonical);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty() && synonyms_.empty(); }

  const std::set<std::string>& entries() const { return entries_; }
  const std::map<std::string, std::string>& synonyms() const {
    return synonyms_;
  }
  const std::set<std::string>& abbreviations() const { return abbreviations_; }

  bool is_name(std::string_view phrase) const;
  bool is_abbreviation(std::string_view token) const;
  bool in_synonym(std::string_view token) const;
  // True when `token` begins at least one multi-word name or synonym.
  bool starts_multiword(std::string_view token) const;

  // Rebuilds a lexicon from its stored normalized contents.
  static Lexicon from_parts(std::set<std::string> entries,
                            std::map<std::string, std::string> synonyms,
                            std::set<std::string> abbreviations);

 private:
  void index_phrase(const std::string& phrase);
  void add_abbreviation_if_any(std::string_view raw);

  std::set<std::string> entries_;
  std::map<std::string, std::string> synonyms_;
  std::set<std::string> abbreviations_;
  std::unordered_set<std::string> synonym_tokens_;
  std::unordered_set<std::string> multiword_first_tokens_;
};

std::string normalize_phrase(std::string_view raw);

// Single-token, all-uppercase (digits allowed), length 2 to 6.
bool looks_like_abbreviation(std::string_view raw);

// Reads a MEDIC TSV. The header row may be commented out as in the CTD
// distribution ("# DiseaseName<TAB>DiseaseID..."); other '#' lines are
// skipped. Requires DiseaseName, DiseaseID and Synonyms columns.
Lexicon load_medic(std::istream& in);

std::vector<DictFeatureVector> token_features(
    std::span<const std::string> surfaces, const Lexicon& lex);
std::vector<DictFeatureVector> token_features(const Sentence& sentence,
                                              const Lexicon& lex);

}  // namespace dner

#endif  // DNER_LEXICON_H_
