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

// Segment representation schemes (IOB2, IOBES): encoding entity spans into
// per-token tags, decoding them back, converting between schemes and
// repairing structurally invalid tag sequences.

#ifndef DNER_TAGGING_H_
#define DNER_TAGGING_H_

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dner {

enum class Scheme { kIob2, kIobes };

std::string_view scheme_name(Scheme scheme);
// Accepts "iob2"/"IOB2"/"bio" and "iobes"/"IOBES"/"bioes".
Scheme parse_scheme(std::string_view name);

struct Tag {
  char prefix = 'O';  // one of O B I E S
  std::string type;   // empty iff prefix == 'O'

  static Tag outside() { return Tag{}; }
  // Throws TagError when the symbol is not in the scheme's inventory.
  static Tag parse(std::string_view symbol, Scheme scheme);
  std::string str() const;

  bool operator==(const Tag&) const = default;
};

struct TagSequence {
  Scheme scheme = Scheme::kIob2;
  std::vector<Tag> tags;

  std::size_t size() const { return tags.size(); }
  std::vector<std::string> symbols() const;
  static TagSequence parse(std::span<const std::string> symbols,
                           Scheme scheme);

  bool operator==(const TagSequence&) const = default;
};

// Token-level entity span, end inclusive.
struct Span {
  std::size_t start_token = 0;
  std::size_t end_token = 0;
  std::string entity_type;

  auto operator<=>(const Span&) const = default;
};

// Throws TagError on overlapping or out-of-range spans.
TagSequence encode_spans(std::size_t n_tokens, std::vector<Span> spans,
                         Scheme scheme);

// Maximal spans in left-to-right order. Invalid input is repaired first.
std::vector<Span> decode_tags(const TagSequence& tags);

TagSequence convert(const TagSequence& tags, Scheme target);

// Minimal local edits that make a tag sequence structurally valid:
//   - an I-/E- that does not continue a run of its type becomes B-;
//   - (IOBES) a run that is interrupted or hits the end of the sequence
//     has its last tag rewritten: B- becomes S-, I- becomes E-.
// Valid input is returned unchanged.
TagSequence repair(std::span<const std::string> raw, Scheme scheme);
TagSequence repair(const TagSequence& tags);

bool is_valid(const TagSequence& tags);

// Dense indexing of a scheme's tag inventory, used by the CRF. Index 0 is
// always O; each entity type then contributes B, I (and E, S for IOBES).
class TagInventory {
 public:
  TagInventory() = default;
  TagInventory(Scheme scheme, std::vector<std::string> entity_types);

  Scheme scheme() const { return scheme_; }
  const std::vector<std::string>& entity_types() const { return types_; }
  std::size_t size() const { return tags_.size(); }
  const Tag& tag(std::size_t index) const { return tags_.at(index); }
  std::size_t index(const Tag& tag) const;

  std::vector<std::size_t> indices(const TagSequence& tags) const;
  TagSequence sequence(std::span<const std::size_t> indices) const;

  // Structural legality of adjacent tags, used for optional hard masking.
  bool transition_allowed(std::size_t from, std::size_t to) const;
  bool start_allowed(std::size_t to) const;
  bool stop_allowed(std::size_t from) const;

 private:
  Scheme scheme_ = Scheme::kIob2;
  std::vector<std::string> types_;
  std::vector<Tag> tags_;
};

}  // namespace dner

#endif  // DNER_TAGGING_H_
