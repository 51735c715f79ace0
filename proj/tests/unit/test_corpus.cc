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

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dner/corpus.h"
#include "dner/errors.h"
#include "dner/random.h"
#include "test_util.h"

using namespace dner;

namespace {

Document make_doc(std::string id, std::string title, std::string abstract) {
  Document d;
  d.id = std::move(id);
  d.title = std::move(title);
  d.abstract = std::move(abstract);
  return d;
}

Mention mention_of(const Document& d, const std::string& surface,
                   const std::string& type = "Disease") {
  const std::string text = d.text();
  const auto at = text.find(surface);
  REQUIRE(at != std::string::npos);
  return Mention{at, at + surface.size(), surface, type, "", ""};
}

}  // namespace

TEST_CASE("parse_pubtator reads a minimal document") {
  const std::string text =
      "1|t|A\n1|a|colon carcinoma found.\n1\t2\t17\tcolon carcinoma\tDisease\tD003110\n";
  const auto docs = parse_pubtator(text);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].id == "1");
  REQUIRE(docs[0].mentions.size() == 1);
  CHECK(docs[0].mentions[0].surface == "colon carcinoma");
  CHECK(docs[0].mentions[0].concept_id == "D003110");
  CHECK(docs[0].text().substr(2, 15) == "colon carcinoma");
}

TEST_CASE("parse_pubtator accepts a block without annotations") {
  const auto docs = parse_pubtator("7|t|Title here.\n7|a|Nothing to see.\n\n");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].mentions.empty());
}

TEST_CASE("parse_pubtator skips relation lines and keeps extra columns") {
  const std::string text =
      "5|t|Drug X causes hepatitis.\n5|a|Rare.\n"
      "5\t14\t23\thepatitis\tDisease\tD006505\n"
      "5\tCID\tD000001\tD006505\n";
  const auto docs = parse_pubtator(text);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].mentions.size() == 1);
}

TEST_CASE("parse_pubtator rejects malformed lines with the line number") {
  CHECK_THROWS_WITH_AS(parse_pubtator("1|t|A\n1|a|B\n1\tx\t2\tA\tDisease\n"),
                       doctest::Contains("line 3"), ParseError);
  CHECK_THROWS_AS(parse_pubtator("1|t|A\n1|a|B\n1\t0\t1\tA\n"), ParseError);
  CHECK_THROWS_AS(parse_pubtator("1|t|A\n2|a|B\n"), ParseError);
}

TEST_CASE("parse_pubtator drops out-of-range mentions with a diagnostic") {
  Diagnostics diags;
  const auto docs =
      parse_pubtator("1|t|A\n1|a|B\n1\t0\t99\tA B\tDisease\tD1\n", &diags);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].mentions.empty());
  CHECK(diags.size() == 1);
}

TEST_CASE("parse_pubtator trusts offsets on a surface mismatch") {
  Diagnostics diags;
  const auto docs = parse_pubtator(
      "1|t|Colon cancer.\n1|a|B\n1\t0\t12\tcolon tumour\tDisease\tD1\n", &diags);
  REQUIRE(docs[0].mentions.size() == 1);
  CHECK(docs[0].mentions[0].surface == "Colon cancer");
  CHECK(diags.size() == 1);
}

TEST_CASE("write_pubtator round trip is field-wise identical") {
  const std::string text = testing::read_file(testing::data_path("toy_corpus.txt"));
  const auto docs = parse_pubtator(text);
  std::ostringstream out;
  write_pubtator(out, docs);
  CHECK(parse_pubtator(out.str()) == docs);
}

TEST_CASE("tokenize splits punctuation, hyphens and slashes with exact offsets") {
  const std::string text = "(BRCA1/2-linked) cancer, e.g. p53.";
  const auto tokens = tokenize(text, 100);
  std::vector<std::string> surfaces;
  for (const auto& t : tokens) {
    surfaces.push_back(t.surface);
    CHECK(text.substr(t.start - 100, t.end - t.start) == t.surface);
  }
  CHECK(surfaces == std::vector<std::string>{"(", "BRCA1", "/", "2", "-", "linked",
                                             ")", "cancer", ",", "e.g", ".",
                                             "p53", "."});
}

TEST_CASE("split_sentences on the nine-token example sentence") {
  const Document d =
      make_doc("1", "The risk of colorectal cancer was significantly high.", "");
  const auto sentences = split_sentences(d);
  REQUIRE(sentences.size() == 1);
  CHECK(sentences[0].size() == 9);
}

TEST_CASE("split_sentences breaks at terminal periods before capitals") {
  CHECK(split_sentences(make_doc("1", "A. B.", "")).size() == 2);
  CHECK(split_sentences(make_doc("1", "Title", "One. Two! 3 is next? no.")).size() ==
        4);
}

TEST_CASE("split_sentences keeps abbreviations and mentions intact") {
  CHECK(split_sentences(make_doc("1", "T", "Shown by Smith et al. In mice.")).size() ==
        2);
  Document d = make_doc("1", "T", "Type A. Syndrome is rare.");
  CHECK(split_sentences(d).size() == 3);
  d.mentions.push_back(mention_of(d, "A. Syndrome"));
  CHECK(split_sentences(d).size() == 2);
}

TEST_CASE("split_sentences separates title and abstract") {
  const auto s = split_sentences(make_doc("1", "no period in title", "lower case start."));
  CHECK(s.size() == 2);
}

TEST_CASE("sentence tokens reconstruct the source slice") {
  const auto docs = parse_pubtator(testing::read_file(testing::data_path("toy_corpus.txt")));
  for (const auto& d : docs) {
    const std::string text = d.text();
    for (const auto& s : split_sentences(d)) {
      std::string rebuilt;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) rebuilt += text.substr(s.tokens[i - 1].end,
                                      s.tokens[i].start - s.tokens[i - 1].end);
        rebuilt += s.tokens[i].surface;
      }
      CHECK(rebuilt == text.substr(s.start(), s.end() - s.start()));
    }
  }
}

TEST_CASE("project_mentions on the example sentence") {
  Document d = make_doc("1", "The risk of colorectal cancer was significantly high.", "");
  d.mentions.push_back(mention_of(d, "colorectal cancer"));
  const auto s = split_sentences(d).at(0);
  CHECK(project_mentions(s, d.mentions, Scheme::kIob2).symbols() ==
        testing::words("O O O B-Disease I-Disease O O O O"));
  CHECK(project_mentions(s, d.mentions, Scheme::kIobes).symbols() ==
        testing::words("O O O B-Disease E-Disease O O O O"));
  CHECK(project_mentions(s, {}, Scheme::kIob2).symbols() ==
        testing::words("O O O O O O O O O"));
}

TEST_CASE("project_spans widens mid-token boundaries and resolves overlaps") {
  Document d = make_doc("1", "Severe hepatotoxicity and liver failure occurred.", "");
  Mention partial = mention_of(d, "hepatotox");
  Mention outer = mention_of(d, "liver failure");
  Mention inner = mention_of(d, "failure");
  d.mentions = {partial, outer, inner};
  Diagnostics diags;
  const auto s = split_sentences(d).at(0);
  const auto spans = project_spans(s, d.mentions, &diags);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == Span{1, 1, "Disease"});
  CHECK(spans[1] == Span{3, 4, "Disease"});
  CHECK(diags.size() == 2);
}

TEST_CASE("projection recovers every token-aligned gold mention") {
  const auto docs = parse_pubtator(testing::read_file(testing::data_path("toy_corpus.txt")));
  std::size_t recovered = 0, total = 0;
  for (const auto& d : docs) {
    total += d.mentions.size();
    for (const auto& s : split_sentences(d)) {
      const auto tags = project_mentions(s, d.mentions, Scheme::kIobes);
      for (const auto& sp : decode_tags(tags)) {
        const std::size_t a = s.tokens[sp.start_token].start;
        const std::size_t b = s.tokens[sp.end_token].end;
        const bool gold = std::any_of(d.mentions.begin(), d.mentions.end(),
                                      [&](const Mention& m) {
                                        return m.start == a && m.end == b &&
                                               m.entity_type == sp.entity_type;
                                      });
        CHECK(gold);
        recovered += gold;
      }
    }
  }
  CHECK(recovered == total);
}

TEST_CASE("corpus_stats counts") {
  CHECK(corpus_stats({}) == CorpusStats{});
  Document a = make_doc("1", "cancer here.", "");
  a.mentions.push_back(mention_of(a, "cancer"));
  Document b = make_doc("2", "More Cancer.", "");
  b.mentions.push_back(mention_of(b, "Cancer"));
  const std::vector<Document> docs = {a, b};
  const CorpusStats s = corpus_stats(docs);
  CHECK(s.n_abstracts == 2);
  CHECK(s.n_mentions == 2);
  CHECK(s.n_unique_mentions == 1);

  auto toy = parse_pubtator(testing::read_file(testing::data_path("toy_corpus.txt")));
  const CorpusStats toy_stats = corpus_stats(toy);
  CHECK(toy_stats == CorpusStats{5, 10, 15, 14});
  Rng rng(3);
  rng.shuffle(toy);
  CHECK(corpus_stats(toy) == toy_stats);
}

TEST_CASE("NCBI training split statistics (needs DNER_NCBI_TRAIN)") {
  const char* path = std::getenv("DNER_NCBI_TRAIN");
  if (path == nullptr) {
    MESSAGE("DNER_NCBI_TRAIN not set; corpus check skipped");
    return;
  }
  std::ifstream in(path);
  REQUIRE(in);
  const CorpusStats s = corpus_stats(parse_pubtator(in));
  CHECK(s.n_abstracts == 593);
  CHECK(s.n_mentions == 5145);
  CHECK(s.n_unique_mentions == 1710);
  CHECK(s.n_sentences >= 5548);
  CHECK(s.n_sentences <= 5774);
}
