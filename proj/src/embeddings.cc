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

#include "dner/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "binary_io.h"
#include "dner/errors.h"
#include "dner/random.h"

namespace dner {
namespace {

constexpr char kTableMagic[8] = {'D', 'N', 'E', 'R', 'E', 'M', 'B', '\0'};
constexpr std::uint32_t kTableVersion = 1;

bool is_number(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != '-' && c != '%') {
      return false;
    }
  }
  return digit;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r')) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != '\r') {
      ++j;
    }
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  // std::from_chars for double is unavailable on older toolchains.
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

void fill_uniform(std::span<double> row, double bound, Rng& rng) {
  for (double& v : row) v = rng.uniform(-bound, bound);
}

}  // namespace

std::string normalize_token(std::string_view surface) {
  if (surface == EmbeddingTable::kNumWord || is_number(surface)) {
    return std::string(EmbeddingTable::kNumWord);
  }
  std::string out(surface);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Vocabulary word_vocabulary(std::span<const Sentence> sentences) {
  Vocabulary vocab;
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) vocab.insert(normalize_token(t.surface));
  }
  return vocab;
}

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  add(std::string(kUnkWord));
  add(std::string(kNumWord));
}

std::span<const double> EmbeddingTable::row(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * dim_, dim_);
}

std::span<double> EmbeddingTable::mutable_row(std::size_t i) {
  return std::span<double>(data_).subspan(i * dim_, dim_);
}

bool EmbeddingTable::contains(std::string_view normalized) const {
  return index_.count(std::string(normalized)) > 0;
}

std::size_t EmbeddingTable::index(std::string_view normalized) const {
  auto it = index_.find(std::string(normalized));
  return it == index_.end() ? kUnkRow : it->second;
}

std::size_t EmbeddingTable::add(const std::string& word) {
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (inserted) {
    words_.push_back(word);
    data_.resize(data_.size() + dim_, 0.0);
  }
  return it->second;
}

void EmbeddingTable::save(std::ostream& out) const {
  internal::ByteWriter w;
  w.raw(kTableMagic, sizeof kTableMagic);
  w.u32(kTableVersion);
  w.u64(dim_);
  w.u64(words_.size());
  for (const auto& word : words_) w.str(word);
  w.f64s(data_);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error("io", "failed to write embedding table");
}

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  if (bytes.size() < sizeof kTableMagic ||
      bytes.compare(0, sizeof kTableMagic,
                    std::string_view(kTableMagic, sizeof kTableMagic)) != 0) {
    throw CheckpointError("embedding cache: bad magic header");
  }
  internal::ByteReader r(std::string_view(bytes).substr(sizeof kTableMagic),
                         "embedding cache");
  const std::uint32_t version = r.u32();
  if (version != kTableVersion) {
    throw CheckpointError("embedding cache version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kTableVersion) + ")");
  }
  EmbeddingTable t;
  t.dim_ = r.u64();
  const std::uint64_t rows = r.u64();
  for (std::uint64_t i = 0; i < rows; ++i) {
    std::string word = r.str();
    t.index_.emplace(word, t.words_.size());
    t.words_.push_back(std::move(word));
  }
  t.data_ = r.f64s();
  if (t.dim_ == 0 || t.data_.size() != rows * t.dim_ || rows < 2 || !r.done()) {
    throw CheckpointError("embedding cache: inconsistent dim/vocab sizes");
  }
  return t;
}

double embedding_init_bound(std::size_t dim) {
  return std::sqrt(3.0 / static_cast<double>(dim));
}

EmbeddingTable load_word2vec_text(std::istream& in,
                                  const Vocabulary& restrict_to,
                                  std::size_t expected_dim,
                                  std::uint64_t seed) {
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  struct Found {
    std::vector<double> values;
    bool exact = false;
  };
  std::map<std::string, Found> found;
  std::vector<double> unk_vector;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    std::size_t header_count = 0;
    std::size_t header_dim = 0;
    if (lineno == 1 && fields.size() == 2 &&
        parse_size(fields[0], header_count) &&
        parse_size(fields[1], header_dim)) {
      dim = header_dim;
      continue;
    }
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim || dim == 0) {
      throw ParseError("vector has " + std::to_string(fields.size() - 1) +
                           " components, expected " + std::to_string(dim),
                       lineno);
    }
    const std::string_view word = fields[0];
    const bool is_unk = word == "UNK" || word == "<unk>" || word == "<UNK>";
    const std::string key = normalize_token(word);
    // Only the literal NUM row stands in for numbers, never e.g. "1999".
    const bool wanted = key == EmbeddingTable::kNumWord
                            ? word == EmbeddingTable::kNumWord
                            : restrict_to.count(key) > 0;
    if (!wanted && !is_unk) continue;
    values.assign(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(fields[k + 1], values[k])) {
        throw ParseError("malformed vector component '" +
                             std::string(fields[k + 1]) + "'",
                         lineno);
      }
    }
    if (is_unk) {
      if (unk_vector.empty()) unk_vector = values;
      continue;
    }
    const bool exact = word == key;
    auto it = found.find(key);
    if (it == found.end()) {
      found.emplace(key, Found{values, exact});
    } else if (exact && !it->second.exact) {
      it->second = Found{values, true};
    }
  }
  if (dim == 0) dim = expected_dim;
  if (dim == 0) {
    throw ConfigError("embedding file is empty and no dimension was configured");
  }
  if (expected_dim != 0 && dim != expected_dim) {
    throw ConfigError("embedding file has dimension " + std::to_string(dim) +
                      " but the configuration expects " +
                      std::to_string(expected_dim));
  }

  EmbeddingTable table(dim);
  Rng rng(seed);
  const double bound = embedding_init_bound(dim);
  if (!unk_vector.empty()) {
    std::copy(unk_vector.begin(), unk_vector.end(),
              table.mutable_row(EmbeddingTable::kUnkRow).begin());
  } else {
    fill_uniform(table.mutable_row(EmbeddingTable::kUnkRow), bound, rng);
  }
  auto num = found.find(std::string(EmbeddingTable::kNumWord));
  if (num != found.end()) {
    std::copy(num->second.values.begin(), num->second.values.end(),
              table.mutable_row(EmbeddingTable::kNumRow).begin());
  } else {
    fill_uniform(table.mutable_row(EmbeddingTable::kNumRow), bound, rng);
  }
  for (const auto& [word, f] : found) {
    if (word == EmbeddingTable::kNumWord) continue;
    const std::size_t row = table.add(word);
    std::copy(f.values.begin(), f.values.end(), table.mutable_row(row).begin());
  }
  return table;
}

EmbeddingTable random_table(const Vocabulary& vocab, std::size_t dim,
                            std::uint64_t seed) {
  EmbeddingTable table(dim);
  for (const auto& word : vocab) table.add(word);
  Rng rng(seed);
  const double bound = embedding_init_bound(dim);
  for (double& v : table.mutable_data()) v = rng.uniform(-bound, bound);
  return table;
}

std::vector<char32_t> utf8_codepoints(std::string_view text) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b < 0x80) {
      len = 1;
      cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
      cp = b & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(text[i + k]);
      if ((c & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t CharVocab::index(char32_t c) const {
  auto it = std::lower_bound(chars_.begin(), chars_.end(), c);
  if (it == chars_.end() || *it != c) return kUnknown;
  return static_cast<std::size_t>(it - chars_.begin()) + 1;
}

std::vector<std::size_t> CharVocab::indices(std::string_view word) const {
  std::vector<std::size_t> out;
  for (char32_t c : utf8_codepoints(word)) out.push_back(index(c));
  return out;
}

CharVocab CharVocab::from_chars(std::vector<char32_t> chars) {
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  CharVocab v;
  v.chars_ = std::move(chars);
  return v;
}

CharVocab build_char_vocab(std::span<const Sentence> corpus) {
  std::vector<char32_t> chars;
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) {
      for (char32_t c : utf8_codepoints(t.surface)) chars.push_back(c);
    }
  }
  return CharVocab::from_chars(std::move(chars));
}

}  // namespace dner
