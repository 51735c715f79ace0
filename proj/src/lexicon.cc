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

#include "dner/lexicon.h"

#include <algorithm>
#include <istream>

#include "dner/embeddings.h"
#include "dner/errors.h"

namespace dner {
namespace {

std::vector<std::string> normalized_tokens(std::string_view raw) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(raw)) out.push_back(normalize_token(t.surface));
  return out;
}

std::string join(std::span<const std::string> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ' ';
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

}  // namespace

std::string normalize_phrase(std::string_view raw) {
  return join(normalized_tokens(raw));
}

bool looks_like_abbreviation(std::string_view raw) {
  if (raw.size() < 2 || raw.size() > 6) return false;
  bool letter = false;
  for (char c : raw) {
    if (c >= 'A' && c <= 'Z') {
      letter = true;
    } else if (!(c >= '0' && c <= '9')) {
      return false;
    }
  }
  return letter;
}

void Lexicon::index_phrase(const std::string& phrase) {
  if (phrase.find(' ') == std::string::npos) return;
  multiword_first_tokens_.insert(phrase.substr(0, phrase.find(' ')));
}

void Lexicon::add_abbreviation_if_any(std::string_view raw) {
  const std::string t = trim(raw);
  if (looks_like_abbreviation(t)) abbreviations_.insert(normalize_token(t));
}

void Lexicon::add_entry(std::string_view raw_name) {
  const std::string name = normalize_phrase(raw_name);
  if (name.empty()) return;
  entries_.insert(name);
  index_phrase(name);
  add_abbreviation_if_any(raw_name);
}

void Lexicon::add_synonym(std::string_view raw_synonym,
                          std::string_view raw_canonical) {
  const auto tokens = normalized_tokens(raw_synonym);
  if (tokens.empty()) return;
  const std::string syn = join(tokens);
  synonyms_.emplace(syn, normalize_phrase(raw_canonical));
  synonym_tokens_.insert(tokens.begin(), tokens.end());
  index_phrase(syn);
  add_abbreviation_if_any(raw_synonym);
}

Lexicon Lexicon::from_parts(std::set<std::string> entries,
                            std::map<std::string, std::string> synonyms,
                            std::set<std::string> abbreviations) {
  Lexicon lex;
  lex.entries_ = std::move(entries);
  lex.synonyms_ = std::move(synonyms);
  lex.abbreviations_ = std::move(abbreviations);
  for (const auto& e : lex.entries_) lex.index_phrase(e);
  for (const auto& [syn, canonical] : lex.synonyms_) {
    lex.index_phrase(syn);
    for (const auto& t : split(syn, ' ')) lex.synonym_tokens_.insert(t);
  }
  return lex;
}

bool Lexicon::is_name(std::string_view phrase) const {
  const std::string p(phrase);
  return entries_.count(p) > 0 || synonyms_.count(p) > 0;
}

bool Lexicon::is_abbreviation(std::string_view token) const {
  return abbreviations_.count(std::string(token)) > 0;
}

bool Lexicon::in_synonym(std::string_view token) const {
  return synonym_tokens_.count(std::string(token)) > 0;
}

bool Lexicon::starts_multiword(std::string_view token) const {
  return multiword_first_tokens_.count(std::string(token)) > 0;
}

Lexicon load_medic(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  int name_col = -1;
  int id_col = -1;
  int syn_col = -1;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::string_view body = line;
    const bool comment = body.front() == '#';
    if (comment) {
      body.remove_prefix(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
    }
    if (!have_header) {
      if (comment && body.rfind("DiseaseName", 0) != 0) continue;
      const auto cols = split(body, '\t');
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::string name = trim(cols[c]);
        if (name == "DiseaseName") name_col = static_cast<int>(c);
        if (name == "DiseaseID") id_col = static_cast<int>(c);
        if (name == "Synonyms") syn_col = static_cast<int>(c);
      }
      for (auto [col, label] : {std::pair{name_col, "DiseaseName"},
                                std::pair{id_col, "DiseaseID"},
                                std::pair{syn_col, "Synonyms"}}) {
        if (col < 0) {
          throw ParseError(std::string("MEDIC header lacks required column ") +
                               label,
                           lineno);
        }
      }
      have_header = true;
      continue;
    }
    if (comment) continue;
    const auto cols = split(line, '\t');
    const auto get = [&](int c) {
      return c < static_cast<int>(cols.size()) ? cols[c] : std::string();
    };
    const std::string name = get(name_col);
    if (trim(name).empty()) {
      throw ParseError("MEDIC row without a disease name", lineno);
    }
    lex.add_entry(name);
    const std::string synonyms = get(syn_col);
    if (!trim(synonyms).empty()) {
      for (const auto& s : split(synonyms, '|')) lex.add_synonym(s, name);
    }
  }
  return lex;
}

std::vector<DictFeatureVector> token_features(
    std::span<const std::string> surfaces, const Lexicon& lex) {
  std::vector<std::string> norm;
  norm.reserve(surfaces.size());
  for (const auto& s : surfaces) norm.push_back(normalize_token(s));
  const std::size_t n = norm.size();
  std::vector<DictFeatureVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].solo = lex.is_name(norm[i]);
    out[i].abbreviation = lex.is_abbreviation(norm[i]);
    out[i].synonym = lex.in_synonym(norm[i]);
    if (!lex.starts_multiword(norm[i])) continue;
    std::string phrase = norm[i];
    for (std::size_t len = 2; len <= kMaxLexiconNgram && i + len <= n; ++len) {
      phrase += ' ';
      phrase += norm[i + len - 1];
      if (lex.is_name(phrase)) {
        for (std::size_t k = i; k < i + len; ++k) out[k].multiword_part = true;
      }
    }
  }
  return out;
}

std::vector<DictFeatureVector> token_features(const Sentence& sentence,
                                              const Lexicon& lex) {
  return token_features(sentence.surfaces(), lex);
}

}  // namespace dner
