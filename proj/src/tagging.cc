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

#include "dner/tagging.h"

#include <algorithm>
#include <optional>

#include "dner/errors.h"

namespace dner {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool prefix_in_scheme(char prefix, Scheme scheme) {
  switch (prefix) {
    case 'O':
    case 'B':
    case 'I':
      return true;
    case 'E':
    case 'S':
      return scheme == Scheme::kIobes;
    default:
      return false;
  }
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::kIob2 ? "IOB2" : "IOBES";
}

Scheme parse_scheme(std::string_view name) {
  const std::string n = lower(name);
  if (n == "iob2" || n == "bio") return Scheme::kIob2;
  if (n == "iobes" || n == "bioes") return Scheme::kIobes;
  throw TagError("unknown tagging scheme '" + std::string(name) + "'");
}

Tag Tag::parse(std::string_view symbol, Scheme scheme) {
  if (symbol == "O") return Tag{};
  if (symbol.size() < 3 || symbol[1] != '-' ||
      !prefix_in_scheme(symbol[0], scheme) || symbol[0] == 'O') {
    throw TagError("unknown tag '" + std::string(symbol) + "' for scheme " +
                   std::string(scheme_name(scheme)));
  }
  return Tag{symbol[0], std::string(symbol.substr(2))};
}

std::string Tag::str() const {
  if (prefix == 'O') return "O";
  return std::string(1, prefix) + "-" + type;
}

std::vector<std::string> TagSequence::symbols() const {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const Tag& t : tags) out.push_back(t.str());
  return out;
}

TagSequence TagSequence::parse(std::span<const std::string> symbols,
                               Scheme scheme) {
  TagSequence seq{scheme, {}};
  seq.tags.reserve(symbols.size());
  for (const auto& s : symbols) seq.tags.push_back(Tag::parse(s, scheme));
  return seq;
}

TagSequence encode_spans(std::size_t n_tokens, std::vector<Span> spans,
                         Scheme scheme) {
  std::sort(spans.begin(), spans.end());
  TagSequence seq{scheme, std::vector<Tag>(n_tokens)};
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const Span& s = spans[k];
    if (s.start_token > s.end_token || s.end_token >= n_tokens) {
      throw TagError("span [" + std::to_string(s.start_token) + "," +
                     std::to_string(s.end_token) + "] out of range for " +
                     std::to_string(n_tokens) + " tokens");
    }
    if (s.entity_type.empty()) throw TagError("span with empty entity type");
    if (k > 0 && spans[k - 1].end_token >= s.start_token) {
      const Span& p = spans[k - 1];
      throw TagError("overlapping spans [" + std::to_string(p.start_token) +
                     "," + std::to_string(p.end_token) + "] and [" +
                     std::to_string(s.start_token) + "," +
                     std::to_string(s.end_token) + "]");
    }
    for (std::size_t i = s.start_token; i <= s.end_token; ++i) {
      char prefix = 'I';
      if (i == s.start_token) {
        prefix = (scheme == Scheme::kIobes && s.start_token == s.end_token)
                     ? 'S'
                     : 'B';
      } else if (scheme == Scheme::kIobes && i == s.end_token) {
        prefix = 'E';
      }
      seq.tags[i] = Tag{prefix, s.entity_type};
    }
  }
  return seq;
}

namespace {

// Left-to-right repair shared by both schemes. `open` tracks the type of
// the run that the previous tag left unterminated.
std::vector<Tag> repair_tags(std::vector<Tag> tags, Scheme scheme) {
  std::optional<std::string> open;
  auto close_previous = [&](std::size_t i) {
    if (!open || scheme != Scheme::kIobes || i == 0) return;
    Tag& prev = tags[i - 1];
    if (prev.prefix == 'B') prev.prefix = 'S';
    if (prev.prefix == 'I') prev.prefix = 'E';
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    Tag& t = tags[i];
    if ((t.prefix == 'I' || t.prefix == 'E') && (!open || *open != t.type)) {
      t.prefix = 'B';
    }
    switch (t.prefix) {
      case 'B':
        close_previous(i);
        open = t.type;
        break;
      case 'I':
        break;
      case 'E':
        open.reset();
        break;
      default:  // O, S
        close_previous(i);
        open.reset();
        break;
    }
  }
  close_previous(tags.size());
  return tags;
}

}  // namespace

TagSequence repair(std::span<const std::string> raw, Scheme scheme) {
  return repair(TagSequence::parse(raw, scheme));
}

TagSequence repair(const TagSequence& tags) {
  for (const Tag& t : tags.tags) {
    if (!prefix_in_scheme(t.prefix, tags.scheme) ||
        (t.prefix == 'O') != t.type.empty()) {
      throw TagError("unknown tag '" + t.str() + "' for scheme " +
                     std::string(scheme_name(tags.scheme)));
    }
  }
  return TagSequence{tags.scheme, repair_tags(tags.tags, tags.scheme)};
}

bool is_valid(const TagSequence& seq) {
  const auto& tags = seq.tags;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag& t = tags[i];
    if (!prefix_in_scheme(t.prefix, seq.scheme)) return false;
    if ((t.prefix == 'O') != t.type.empty()) return false;
    const Tag* prev = i > 0 ? &tags[i - 1] : nullptr;
    const Tag* next = i + 1 < tags.size() ? &tags[i + 1] : nullptr;
    const bool continues = prev && prev->type == t.type &&
                           (prev->prefix == 'B' || prev->prefix == 'I');
    if ((t.prefix == 'I' || t.prefix == 'E') && !continues) return false;
    if (seq.scheme == Scheme::kIobes && (t.prefix == 'B' || t.prefix == 'I')) {
      const bool continued = next && next->type == t.type &&
                             (next->prefix == 'I' || next->prefix == 'E');
      if (!continued) return false;
    }
  }
  return true;
}

std::vector<Span> decode_tags(const TagSequence& input) {
  const TagSequence seq = is_valid(input) ? input : repair(input);
  std::vector<Span> spans;
  std::optional<Span> current;
  auto flush = [&] {
    if (current) spans.push_back(*current);
    current.reset();
  };
  for (std::size_t i = 0; i < seq.tags.size(); ++i) {
    const Tag& t = seq.tags[i];
    switch (t.prefix) {
      case 'B':
        flush();
        current = Span{i, i, t.type};
        break;
      case 'S':
        flush();
        spans.push_back(Span{i, i, t.type});
        break;
      case 'I':
        current->end_token = i;
        break;
      case 'E':
        current->end_token = i;
        flush();
        break;
      default:
        flush();
        break;
    }
  }
  flush();
  return spans;
}

TagSequence convert(const TagSequence& tags, Scheme target) {
  return encode_spans(tags.size(), decode_tags(tags), target);
}

TagInventory::TagInventory(Scheme scheme, std::vector<std::string> entity_types)
    : scheme_(scheme), types_(std::move(entity_types)) {
  tags_.push_back(Tag{});
  for (const auto& type : types_) {
    if (type.empty()) throw TagError("empty entity type in tag inventory");
    tags_.push_back(Tag{'B', type});
    tags_.push_back(Tag{'I', type});
    if (scheme_ == Scheme::kIobes) {
      tags_.push_back(Tag{'E', type});
      tags_.push_back(Tag{'S', type});
    }
  }
}

std::size_t TagInventory::index(const Tag& tag) const {
  auto it = std::find(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end()) {
    throw TagError("tag '" + tag.str() + "' is not in the inventory");
  }
  return static_cast<std::size_t>(it - tags_.begin());
}

std::vector<std::size_t> TagInventory::indices(const TagSequence& tags) const {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (const Tag& t : tags.tags) out.push_back(index(t));
  return out;
}

TagSequence TagInventory::sequence(std::span<const std::size_t> indices) const {
  TagSequence seq{scheme_, {}};
  seq.tags.reserve(indices.size());
  for (std::size_t i : indices) seq.tags.push_back(tag(i));
  return seq;
}

bool TagInventory::transition_allowed(std::size_t from, std::size_t to) const {
  const Tag& a = tag(from);
  const Tag& b = tag(to);
  const bool a_open = a.prefix == 'B' || a.prefix == 'I';
  const bool b_continues = b.prefix == 'I' || b.prefix == 'E';
  if (b_continues) return a_open && a.type == b.type;
  // b starts fresh (O, B, S): only legal if a closed its run.
  return scheme_ == Scheme::kIob2 || !a_open;
}

bool TagInventory::start_allowed(std::size_t to) const {
  const char p = tag(to).prefix;
  return p != 'I' && p != 'E';
}

bool TagInventory::stop_allowed(std::size_t from) const {
  const char p = tag(from).prefix;
  return scheme_ == Scheme::kIob2 || (p != 'B' && p != 'I');
}

}  // namespace dner
