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

#include "dner/corpus.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dner/errors.h"

namespace dner {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// ASCII punctuation only; UTF-8 continuation bytes count as word characters.
bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && u > 0x20 && !(c >= '0' && c <= '9') &&
         !(c >= 'a' && c <= 'z') && !(c >= 'A' && c <= 'Z');
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return fields;
}

std::optional<std::size_t> parse_offset(std::string_view s) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

void note(Diagnostics* diagnostics, const std::string& doc_id,
          std::string message) {
  if (diagnostics) diagnostics->push_back({doc_id, std::move(message)});
}

class PubtatorReader {
 public:
  explicit PubtatorReader(Diagnostics* diagnostics)
      : diagnostics_(diagnostics) {}

  void line(std::string_view text, std::size_t lineno) {
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (text.find_first_not_of(" \t") == std::string_view::npos) {
      finish();
      return;
    }
    const std::size_t bar = text.find('|');
    const std::size_t tab = text.find('\t');
    if (bar != std::string_view::npos && bar < tab && text.size() >= bar + 3 &&
        text[bar + 2] == '|' &&
        (text[bar + 1] == 't' || text[bar + 1] == 'a')) {
      text_line(text.substr(0, bar), text[bar + 1], text.substr(bar + 3),
                lineno);
    } else if (tab != std::string_view::npos) {
      annotation_line(text, lineno);
    } else {
      throw ParseError("expected 'PMID|t|', 'PMID|a|' or an annotation line",
                       lineno);
    }
  }

  std::vector<Document> finish_all() {
    finish();
    return std::move(docs_);
  }

 private:
  void text_line(std::string_view id, char kind, std::string_view body,
                 std::size_t lineno) {
    if (current_ && (current_->id != id || !current_->mentions.empty() ||
                     (kind == 't' && has_title_))) {
      finish();
    }
    if (!current_) {
      current_ = Document{std::string(id), "", "", {}};
      has_title_ = false;
    }
    if (kind == 't') {
      current_->title = std::string(body);
      has_title_ = true;
    } else {
      if (!has_title_) {
        throw ParseError("abstract line before title for PMID " +
                         std::string(id), lineno);
      }
      current_->abstract = std::string(body);
    }
  }

  void annotation_line(std::string_view text, std::size_t lineno) {
    const auto fields = split_tabs(text);
    // BC5CDR relation lines: PMID CID chemical disease.
    if (fields.size() == 4 && fields[1] == "CID") return;
    if (fields.size() < 5 || fields.size() > 7) {
      throw ParseError("annotation line has " + std::to_string(fields.size()) +
                           " fields, expected 5 to 7", lineno);
    }
    if (!current_) {
      throw ParseError("annotation line outside a document", lineno);
    }
    if (fields[0] != current_->id) {
      throw ParseError("annotation PMID " + std::string(fields[0]) +
                           " does not match document " + current_->id,
                       lineno);
    }
    const auto start = parse_offset(fields[1]);
    const auto end = parse_offset(fields[2]);
    if (!start || !end) {
      throw ParseError("non-numeric offset in annotation line", lineno);
    }
    Mention m;
    m.start = *start;
    m.end = *end;
    m.surface = std::string(fields[3]);
    m.entity_type = std::string(fields[4]);
    if (fields.size() > 5) m.concept_id = std::string(fields[5]);
    if (fields.size() > 6) m.extra = std::string(fields[6]);
    if (!text_cache_ || text_cache_id_ != current_->id) {
      text_cache_ = current_->text();
      text_cache_id_ = current_->id;
    }
    const std::string& doc_text = *text_cache_;
    if (m.start >= m.end || m.end > doc_text.size()) {
      note(diagnostics_, current_->id,
           "line " + std::to_string(lineno) + ": rejected mention [" +
               std::to_string(m.start) + "," + std::to_string(m.end) +
               ") outside text of length " + std::to_string(doc_text.size()));
      return;
    }
    const std::string slice = doc_text.substr(m.start, m.end - m.start);
    if (slice != m.surface) {
      note(diagnostics_, current_->id,
           "line " + std::to_string(lineno) + ": surface '" + m.surface +
               "' differs from text slice '" + slice + "', keeping slice");
      m.surface = slice;
    }
    current_->mentions.push_back(std::move(m));
  }

  void finish() {
    if (!current_) return;
    std::stable_sort(current_->mentions.begin(), current_->mentions.end(),
                     [](const Mention& a, const Mention& b) {
                       return std::tie(a.start, a.end) <
                              std::tie(b.start, b.end);
                     });
    docs_.push_back(std::move(*current_));
    current_.reset();
    text_cache_.reset();
  }

  Diagnostics* diagnostics_;
  std::vector<Document> docs_;
  std::optional<Document> current_;
  bool has_title_ = false;
  std::optional<std::string> text_cache_;
  std::string text_cache_id_;
};

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> kAbbrev = {
      "al",   "approx", "ca",  "cf",   "dr",   "e.g",  "eq",  "fig",
      "figs", "i.e",    "inc", "jr",   "ltd",  "mr",   "mrs", "ms",
      "no",   "nos",    "pp",  "prof", "ref",  "refs", "resp", "sr",
      "st",   "vol",    "vs",  "viz",  "sp",   "spp"};
  return kAbbrev;
}

bool is_terminal(const Token& t) {
  return t.surface == "." || t.surface == "!" || t.surface == "?";
}

bool starts_sentence(const Token& t) {
  const char c = t.surface.front();
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool crosses_mention(std::span<const Mention> mentions, std::size_t left_end,
                     std::size_t right_start) {
  return std::any_of(mentions.begin(), mentions.end(), [&](const Mention& m) {
    return m.start < left_end && m.end > right_start;
  });
}

}  // namespace

std::vector<std::string> Sentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<Document> parse_pubtator(std::istream& in,
                                     Diagnostics* diagnostics) {
  PubtatorReader reader(diagnostics);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) reader.line(line, ++lineno);
  return reader.finish_all();
}

std::vector<Document> parse_pubtator(std::string_view text,
                                     Diagnostics* diagnostics) {
  std::istringstream in{std::string(text)};
  return parse_pubtator(in, diagnostics);
}

void write_pubtator(std::ostream& out, std::span<const Document> docs) {
  for (const Document& d : docs) {
    out << d.id << "|t|" << d.title << '\n';
    out << d.id << "|a|" << d.abstract << '\n';
    for (const Mention& m : d.mentions) {
      out << d.id << '\t' << m.start << '\t' << m.end << '\t' << m.surface
          << '\t' << m.entity_type;
      if (!m.concept_id.empty() || !m.extra.empty()) out << '\t' << m.concept_id;
      if (!m.extra.empty()) out << '\t' << m.extra;
      out << '\n';
    }
    out << '\n';
  }
}

std::vector<Token> tokenize(std::string_view text, std::size_t base_offset) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t a, std::size_t b) {
    tokens.push_back(
        Token{std::string(text.substr(a, b - a)), base_offset + a, base_offset + b});
  };
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    // Chunk [i, j).
    std::size_t a = i;
    std::size_t b = j;
    while (a < b && is_punct(text[a])) {
      emit(a, a + 1);
      ++a;
    }
    std::size_t trail = b;
    while (trail > a && is_punct(text[trail - 1])) --trail;
    std::size_t piece = a;
    for (std::size_t k = a; k < trail; ++k) {
      if (text[k] == '-' || text[k] == '/') {
        if (k > piece) emit(piece, k);
        emit(k, k + 1);
        piece = k + 1;
      }
    }
    if (trail > piece) emit(piece, trail);
    for (std::size_t k = trail; k < b; ++k) emit(k, k + 1);
    i = j;
  }
  return tokens;
}

std::vector<Sentence> split_sentences(const Document& doc) {
  const std::string text = doc.text();
  const std::vector<Token> tokens = tokenize(text);
  const std::size_t title_end = doc.title.size();
  std::vector<Sentence> sentences;
  Sentence current{{}, doc.id, 0};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    current.tokens.push_back(tokens[i]);
    if (i + 1 == tokens.size()) break;
    const Token& t = tokens[i];
    const Token& next = tokens[i + 1];
    bool boundary = false;
    if (t.end <= title_end && next.start > title_end) {
      boundary = true;
    } else if (is_terminal(t) && next.start > t.end && starts_sentence(next)) {
      boundary = true;
      if (t.surface == "." && i > 0 && tokens[i - 1].end == t.start &&
          abbreviations().count(ascii_lower(tokens[i - 1].surface))) {
        boundary = false;
      }
    }
    if (boundary && crosses_mention(doc.mentions, t.end, next.start)) {
      boundary = false;
    }
    if (boundary) {
      sentences.push_back(std::move(current));
      current = Sentence{{}, doc.id, sentences.size()};
    }
  }
  if (!current.tokens.empty()) sentences.push_back(std::move(current));
  return sentences;
}

std::vector<Sentence> split_sentences(std::span<const Document> docs) {
  std::vector<Sentence> out;
  for (const Document& d : docs) {
    auto s = split_sentences(d);
    out.insert(out.end(), std::make_move_iterator(s.begin()),
               std::make_move_iterator(s.end()));
  }
  return out;
}

std::vector<Span> project_spans(const Sentence& sentence,
                                std::span<const Mention> mentions,
                                Diagnostics* diagnostics) {
  const auto& tokens = sentence.tokens;
  if (tokens.empty()) return {};
  std::vector<Span> candidates;
  for (const Mention& m : mentions) {
    if (m.end <= sentence.start() || m.start >= sentence.end()) continue;
    std::size_t first = tokens.size();
    std::size_t last = 0;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (tokens[k].end > m.start && tokens[k].start < m.end) {
        first = std::min(first, k);
        last = k;
      }
    }
    if (first == tokens.size()) {
      note(diagnostics, sentence.doc_id,
           "mention '" + m.surface + "' covers no token");
      continue;
    }
    if (m.start < sentence.start() || m.end > sentence.end()) {
      note(diagnostics, sentence.doc_id,
           "mention '" + m.surface + "' crosses a sentence boundary, clipped");
    } else if (tokens[first].start != m.start || tokens[last].end != m.end) {
      note(diagnostics, sentence.doc_id,
           "mention '" + m.surface + "' [" + std::to_string(m.start) + "," +
               std::to_string(m.end) + ") widened to token boundaries");
    }
    candidates.push_back(Span{first, last, m.entity_type});
  }
  // Longest first; ties resolved by position so the result is deterministic.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Span& a, const Span& b) {
                     const auto la = a.end_token - a.start_token;
                     const auto lb = b.end_token - b.start_token;
                     if (la != lb) return la > lb;
                     return a.start_token < b.start_token;
                   });
  std::vector<Span> kept;
  for (const Span& c : candidates) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const Span& k) {
      return c.start_token <= k.end_token && k.start_token <= c.end_token;
    });
    if (clash) {
      note(diagnostics, sentence.doc_id,
           "dropped overlapping mention at tokens [" +
               std::to_string(c.start_token) + "," +
               std::to_string(c.end_token) + "]");
    } else {
      kept.push_back(c);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

TagSequence project_mentions(const Sentence& sentence,
                             std::span<const Mention> mentions, Scheme scheme,
                             Diagnostics* diagnostics) {
  return encode_spans(sentence.size(),
                      project_spans(sentence, mentions, diagnostics), scheme);
}

CorpusStats corpus_stats(std::span<const Document> docs) {
  CorpusStats stats;
  std::unordered_set<std::string> unique;
  for (const Document& d : docs) {
    ++stats.n_abstracts;
    stats.n_sentences += split_sentences(d).size();
    stats.n_mentions += d.mentions.size();
    for (const Mention& m : d.mentions) unique.insert(ascii_lower(m.surface));
  }
  stats.n_unique_mentions = unique.size();
  return stats;
}

}  // namespace dner
