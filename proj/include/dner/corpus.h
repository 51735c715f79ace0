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

// PubTator corpora: parsing, offset-exact tokenization, sentence splitting
// and projection of character-offset mentions onto token-level tags.

#ifndef DNER_CORPUS_H_
#define DNER_CORPUS_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dner/tagging.h"

namespace dner {

// Non-fatal problems found while reading or projecting a corpus.
struct Diagnostic {
  std::string doc_id;
  std::string message;
};
using Diagnostics = std::vector<Diagnostic>;

struct Mention {
  std::size_t start = 0;  // inclusive char offset into Document::text()
  std::size_t end = 0;    // exclusive
  std::string surface;
  std::string entity_type;
  std::string concept_id;  // may be empty
  std::string extra;       // trailing columns (e.g. BC5CDR composite parts)

  bool operator==(const Mention&) const = default;
};

struct Document {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<Mention> mentions;  // sorted by (start, end)

  // Offsets of mentions refer to this string.
  std::string text() const { return title + " " + abstract; }

  bool operator==(const Document&) const = default;
};

struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string doc_id;
  std::size_t index = 0;

  std::size_t size() const { return tokens.size(); }
  std::size_t start() const { return tokens.front().start; }
  std::size_t end() const { return tokens.back().end; }
  std::vector<std::string> surfaces() const;
};

struct CorpusStats {
  std::size_t n_abstracts = 0;
  std::size_t n_sentences = 0;
  std::size_t n_mentions = 0;
  std::size_t n_unique_mentions = 0;

  bool operator==(const CorpusStats&) const = default;
};

// Parses PubTator text. Malformed lines throw ParseError with the line
// number; mentions with offsets outside the text are dropped and reported
// through `diagnostics`.
std::vector<Document> parse_pubtator(std::istream& in,
                                     Diagnostics* diagnostics = nullptr);
std::vector<Document> parse_pubtator(std::string_view text,
                                     Diagnostics* diagnostics = nullptr);
void write_pubtator(std::ostream& out, std::span<const Document> docs);

// Splits on whitespace, then detaches leading/trailing punctuation (one
// token per character) and splits at internal hyphens and slashes. Offsets
// are relative to `text` plus `base_offset`.
std::vector<Token> tokenize(std::string_view text, std::size_t base_offset = 0);

// Rule-based splitter: a sentence ends at . ! ? followed by whitespace and an
// uppercase letter or digit, unless the preceding word is a known
// abbreviation or the boundary would cut a gold mention. The title always
// forms its own sentence(s).
std::vector<Sentence> split_sentences(const Document& doc);
std::vector<Sentence> split_sentences(std::span<const Document> docs);

// Token spans of the mentions that overlap `sentence`. Mid-token mention
// boundaries are widened to whole tokens; of two overlapping mentions the
// longer one is kept. Both events are reported through `diagnostics`.
std::vector<Span> project_spans(const Sentence& sentence,
                                std::span<const Mention> mentions,
                                Diagnostics* diagnostics = nullptr);
TagSequence project_mentions(const Sentence& sentence,
                             std::span<const Mention> mentions, Scheme scheme,
                             Diagnostics* diagnostics = nullptr);

// Unique mentions are counted by case-insensitive surface string.
CorpusStats corpus_stats(std::span<const Document> docs);

}  // namespace dner

#endif  // DNER_CORPUS_H_
