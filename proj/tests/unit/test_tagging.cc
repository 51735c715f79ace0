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

#include <functional>
#include <optional>

#include "doctest.h"
#include "dner/errors.h"
#include "dner/random.h"
#include "dner/tagging.h"
#include "test_util.h"

using namespace dner;
using testing::words;

namespace {

TagSequence seq(const std::string& symbols, Scheme scheme) {
  const auto w = words(symbols);
  return TagSequence::parse(w, scheme);
}

std::vector<Span> random_spans(std::size_t n, Rng& rng) {
  const char* types[] = {"Disease", "Modifier", "X"};
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < n) {
    if (rng.below(3) == 0) {
      const std::size_t len = 1 + rng.below(std::min<std::size_t>(4, n - i));
      spans.push_back(Span{i, i + len - 1, types[rng.below(3)]});
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

// Reference repair as three literal passes over the symbols:
//   1. an I-/E- that does not continue a B-/I- of its type becomes B-;
//   2. (IOBES) a B- not followed by I-/E- of its type becomes S-;
//   3. (IOBES) an I- not followed by I-/E- of its type becomes E-.
std::vector<std::string> oracle_repair(std::vector<std::string> tags,
                                       Scheme scheme) {
  const auto prefix = [&](std::size_t i) { return tags[i][0]; };
  const auto type = [&](std::size_t i) {
    return tags[i] == "O" ? std::string() : tags[i].substr(2);
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (prefix(i) != 'I' && prefix(i) != 'E') continue;
    const bool continues = i > 0 && (prefix(i - 1) == 'B' || prefix(i - 1) == 'I') &&
                           type(i - 1) == type(i);
    if (!continues) tags[i] = "B-" + type(i);
  }
  if (scheme == Scheme::kIob2) return tags;
  const auto continued = [&](std::size_t i) {
    return i + 1 < tags.size() && (prefix(i + 1) == 'I' || prefix(i + 1) == 'E') &&
           type(i + 1) == type(i);
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (prefix(i) == 'B' && !continued(i)) tags[i] = "S-" + type(i);
  }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (prefix(i) == 'I' && !continued(i)) tags[i] = "E-" + type(i);
  }
  return tags;
}

std::vector<std::string> inventory_symbols(Scheme scheme) {
  std::vector<std::string> out = {"O"};
  const std::string prefixes = scheme == Scheme::kIob2 ? "BI" : "BIES";
  for (const char* type : {"A", "B"}) {
    for (char p : prefixes) out.push_back(std::string(1, p) + "-" + type);
  }
  return out;
}

}  // namespace

TEST_CASE("scheme names") {
  CHECK(parse_scheme("iob2") == Scheme::kIob2);
  CHECK(parse_scheme("IOBES") == Scheme::kIobes);
  CHECK(scheme_name(Scheme::kIobes) == "IOBES");
  CHECK_THROWS_AS(parse_scheme("bilou"), TagError);
}

TEST_CASE("Tag::parse rejects symbols outside the scheme") {
  CHECK(Tag::parse("B-Disease", Scheme::kIob2) == Tag{'B', "Disease"});
  CHECK(Tag::parse("O", Scheme::kIob2) == Tag::outside());
  CHECK_THROWS_AS(Tag::parse("E-Disease", Scheme::kIob2), TagError);
  CHECK_THROWS_AS(Tag::parse("S-Disease", Scheme::kIob2), TagError);
  CHECK_THROWS_AS(Tag::parse("B-", Scheme::kIobes), TagError);
  CHECK_THROWS_AS(Tag::parse("X-Disease", Scheme::kIobes), TagError);
  CHECK_THROWS_AS(Tag::parse("O-Disease", Scheme::kIobes), TagError);
}

TEST_CASE("encode_spans on the example sentences") {
  const std::vector<Span> one = {{3, 4, "Disease"}};
  CHECK(encode_spans(9, one, Scheme::kIob2).symbols() ==
        words("O O O B-Disease I-Disease O O O O"));
  CHECK(encode_spans(9, one, Scheme::kIobes).symbols() ==
        words("O O O B-Disease E-Disease O O O O"));
  const std::vector<Span> two = {{0, 0, "Disease"}, {2, 4, "Disease"}};
  CHECK(encode_spans(5, two, Scheme::kIobes).symbols() ==
        words("S-Disease O B-Disease I-Disease E-Disease"));
  CHECK(encode_spans(0, {}, Scheme::kIob2).size() == 0);
}

TEST_CASE("encode_spans rejects overlap and out-of-range spans") {
  CHECK_THROWS_AS(encode_spans(5, {{0, 2, "A"}, {2, 3, "A"}}, Scheme::kIob2),
                  TagError);
  CHECK_THROWS_AS(encode_spans(3, {{1, 3, "A"}}, Scheme::kIob2), TagError);
  CHECK_THROWS_AS(encode_spans(3, {{2, 1, "A"}}, Scheme::kIob2), TagError);
}

TEST_CASE("adjacent spans of one type stay distinct") {
  const std::vector<Span> spans = {{0, 1, "A"}, {2, 2, "A"}};
  for (Scheme scheme : {Scheme::kIob2, Scheme::kIobes}) {
    CHECK(decode_tags(encode_spans(3, spans, scheme)) == spans);
  }
}

TEST_CASE("decode(encode(spans)) round trip over 1000 random sequences") {
  Rng rng(101);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = rng.below(25);
    const auto spans = random_spans(n, rng);
    for (Scheme scheme : {Scheme::kIob2, Scheme::kIobes}) {
      const TagSequence tags = encode_spans(n, spans, scheme);
      CHECK(is_valid(tags));
      CHECK(decode_tags(tags) == spans);
      const Scheme other = scheme == Scheme::kIob2 ? Scheme::kIobes : Scheme::kIob2;
      const TagSequence there = convert(tags, other);
      CHECK(there == encode_spans(n, spans, other));
      CHECK(convert(there, scheme) == tags);
    }
  }
}

TEST_CASE("repair examples") {
  CHECK(repair(words("O I-Disease I-Disease O"), Scheme::kIob2).symbols() ==
        words("O B-Disease I-Disease O"));
  CHECK(repair(words("B-A I-B"), Scheme::kIob2).symbols() == words("B-A B-B"));
  CHECK(repair(words("B-Disease O"), Scheme::kIobes).symbols() ==
        words("S-Disease O"));
  CHECK(repair(words("B-Disease I-Disease"), Scheme::kIobes).symbols() ==
        words("B-Disease E-Disease"));
  CHECK(repair(words("O E-Disease O"), Scheme::kIobes).symbols() ==
        words("O S-Disease O"));
  CHECK(repair(words("I-Disease E-Disease"), Scheme::kIobes).symbols() ==
        words("B-Disease E-Disease"));
  CHECK(repair(words("O E-A I-A"), Scheme::kIobes).symbols() == words("O B-A E-A"));
  CHECK_THROWS_AS(repair(words("O E-Disease"), Scheme::kIob2), TagError);
}

TEST_CASE("repair matches the reference on every sequence up to length 4") {
  for (Scheme scheme : {Scheme::kIob2, Scheme::kIobes}) {
    const auto alphabet = inventory_symbols(scheme);
    std::size_t checked = 0;
    std::vector<std::string> raw;
    std::function<void()> visit = [&] {
      INFO(testing::join(raw));
      const TagSequence fixed = repair(raw, scheme);
      CHECK(fixed.symbols() == oracle_repair(raw, scheme));
      CHECK(is_valid(fixed));
      CHECK(repair(fixed) == fixed);
      const TagSequence parsed = TagSequence::parse(raw, scheme);
      if (is_valid(parsed)) CHECK(fixed == parsed);
      ++checked;
      if (raw.size() == 4) return;
      for (const auto& s : alphabet) {
        raw.push_back(s);
        visit();
        raw.pop_back();
      }
    };
    visit();
    const std::size_t k = alphabet.size();
    CHECK(checked == 1 + k + k * k + k * k * k + k * k * k * k);
  }
}

TEST_CASE("is_valid") {
  CHECK(is_valid(seq("O B-A I-A O", Scheme::kIob2)));
  CHECK_FALSE(is_valid(seq("O I-A", Scheme::kIob2)));
  CHECK_FALSE(is_valid(seq("B-A I-B", Scheme::kIob2)));
  CHECK(is_valid(seq("S-A B-A E-A", Scheme::kIobes)));
  CHECK_FALSE(is_valid(seq("B-A O", Scheme::kIobes)));
  CHECK_FALSE(is_valid(seq("B-A I-A", Scheme::kIobes)));
  CHECK_FALSE(is_valid(seq("E-A", Scheme::kIobes)));
}

TEST_CASE("TagInventory layout and legality") {
  const TagInventory iob(Scheme::kIob2, {"Disease"});
  REQUIRE(iob.size() == 3);
  CHECK(iob.tag(0) == Tag::outside());
  CHECK(iob.tag(1).str() == "B-Disease");
  CHECK(iob.tag(2).str() == "I-Disease");
  CHECK(iob.start_allowed(1));
  CHECK_FALSE(iob.start_allowed(2));
  CHECK(iob.transition_allowed(1, 2));
  CHECK_FALSE(iob.transition_allowed(0, 2));
  CHECK(iob.stop_allowed(2));

  const TagInventory iobes(Scheme::kIobes, {"A", "B"});
  CHECK(iobes.size() == 9);
  const auto idx = [&](const char* s) {
    return iobes.index(Tag::parse(s, Scheme::kIobes));
  };
  CHECK_FALSE(iobes.stop_allowed(idx("B-A")));
  CHECK(iobes.stop_allowed(idx("E-A")));
  CHECK_FALSE(iobes.transition_allowed(idx("B-A"), idx("O")));
  CHECK_FALSE(iobes.transition_allowed(idx("B-A"), idx("E-B")));
  CHECK(iobes.transition_allowed(idx("I-A"), idx("E-A")));
  CHECK(iobes.transition_allowed(idx("S-A"), idx("B-B")));
  CHECK_THROWS_AS(iobes.index(Tag{'B', "C"}), TagError);

  const auto s = seq("O B-A E-A S-B", Scheme::kIobes);
  CHECK(iobes.sequence(iobes.indices(s)) == s);
}

TEST_CASE("legal transitions are exactly those of valid sequences") {
  for (Scheme scheme : {Scheme::kIob2, Scheme::kIobes}) {
    const TagInventory inv(scheme, {"A", "B"});
    for (std::size_t a = 0; a < inv.size(); ++a) {
      const char pa = inv.tag(a).prefix;
      CHECK(inv.start_allowed(a) == (pa != 'I' && pa != 'E'));
      CHECK(inv.stop_allowed(a) ==
            (scheme == Scheme::kIob2 || (pa != 'B' && pa != 'I')));
      for (std::size_t b = 0; b < inv.size(); ++b) {
        // Pad with legal starts/ends so only the a->b pair is in question.
        bool any_valid = false;
        for (std::size_t p = 0; p <= inv.size(); ++p) {
          for (std::size_t q = 0; q <= inv.size(); ++q) {
            TagSequence t{scheme, {}};
            if (p < inv.size()) t.tags.push_back(inv.tag(p));
            t.tags.push_back(inv.tag(a));
            t.tags.push_back(inv.tag(b));
            if (q < inv.size()) t.tags.push_back(inv.tag(q));
            any_valid = any_valid || is_valid(t);
          }
        }
        CHECK(inv.transition_allowed(a, b) == any_valid);
      }
    }
  }
}
