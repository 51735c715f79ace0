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

// Acceptance run: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dner/crf.h"
#include "dner/embeddings.h"
#include "dner/evaluate.h"
#include "dner/gradcheck.h"
#include "dner/pipeline.h"
#include "dner/random.h"
#include "dner/tagging.h"
#include "normalize_cases.h"
#include "test_util.h"

using namespace dner;
using ad::Tensor;

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

Outcome fail(std::string why) { return {Outcome::kFail, std::move(why)}; }
Outcome pass(std::string note = {}) { return {Outcome::kPass, std::move(note)}; }

std::vector<TagPath> all_paths(std::size_t T, std::size_t m) {
  std::vector<TagPath> out;
  TagPath p(m, 0);
  while (true) {
    out.push_back(p);
    std::size_t i = m;
    while (i > 0 && ++p[i - 1] == T) p[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

double brute_score(const Tensor& s, const Tensor& tr, const TagPath& y) {
  const std::size_t T = s.rows();
  double total = tr.at(T, y.front()) + tr.at(y.back(), T + 1);
  for (std::size_t i = 0; i < y.size(); ++i) total += s.at(y[i], i);
  for (std::size_t i = 1; i < y.size(); ++i) total += tr.at(y[i - 1], y[i]);
  return total;
}

Outcome decoding_example() {
  std::ifstream in(testing::data_path("decoding_example.txt"));
  if (!in) return fail("fixture missing");
  const CrfFixture f = parse_fixture(in);
  if (f.paths.size() != 2) return fail("expected two listed paths");
  const double a = global_score(f.emissions, f.transitions, f.paths[0]);
  const double b = global_score(f.emissions, f.transitions, f.paths[1]);
  if (a != 36.0 || b != 34.0) {
    return fail("scores " + std::to_string(a) + " " + std::to_string(b));
  }
  const TagPath best = viterbi_decode(f.emissions, f.transitions);
  if (best != f.paths[0]) return fail("viterbi chose " + f.path_string(best));
  return pass(f.path_string(best));
}

Outcome crf_enumeration() {
  Rng rng(2024);
  for (int c = 0; c < 200; ++c) {
    const std::size_t T = 1 + rng.below(3), m = 1 + rng.below(5);
    Tensor s({T, m});
    for (double& v : s.data()) v = rng.uniform(-3, 3);
    Tensor tr = make_transitions(T);
    for (double& v : tr.data()) {
      if (std::isfinite(v)) v = rng.uniform(-3, 3);
    }
    const auto paths = all_paths(T, m);
    std::vector<double> scores;
    std::size_t best = 0;
    for (std::size_t k = 0; k < paths.size(); ++k) {
      scores.push_back(brute_score(s, tr, paths[k]));
      if (scores[k] > scores[best]) best = k;
    }
    double acc = 0;
    for (double v : scores) acc += std::exp(v - scores[best]);
    const double z = scores[best] + std::log(acc);
    if (std::abs(log_partition(s, tr) - z) >= 1e-9) {
      return fail("log Z off on instance " + std::to_string(c));
    }
    if (viterbi_decode(s, tr) != paths[best]) {
      return fail("argmax differs on instance " + std::to_string(c));
    }
  }
  return pass("200 instances");
}

Outcome gradients() {
  double worst = 0;
  std::string where;
  for (const char* suite : {"model", "crf", "encoder"}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      for (const auto& r : run_gradient_suite(suite, seed)) {
        if (r.max_rel_error > worst) worst = r.max_rel_error, where = r.suite + "/" + r.parameter;
      }
    }
  }
  std::ostringstream msg;
  msg << "max rel error " << worst << " at " << where;
  return worst < 1e-4 ? pass(msg.str()) : fail(msg.str());
}

std::vector<Span> random_spans(std::size_t n, Rng& rng) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < n;) {
    if (rng.below(3) == 0) {
      const std::size_t len = 1 + rng.below(std::min<std::size_t>(4, n - i));
      spans.push_back(Span{i, i + len - 1, rng.below(2) ? "Disease" : "X"});
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

Outcome scheme_properties() {
  Rng rng(5);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = rng.below(25);
    const auto spans = random_spans(n, rng);
    for (Scheme scheme : {Scheme::kIob2, Scheme::kIobes}) {
      const Scheme other = scheme == Scheme::kIob2 ? Scheme::kIobes : Scheme::kIob2;
      const TagSequence tags = encode_spans(n, spans, scheme);
      if (decode_tags(tags) != spans) return fail("round trip failed");
      if (decode_tags(convert(tags, other)) != spans) return fail("conversion moved spans");
    }
  }
  std::size_t checked = 0;
  for (Scheme scheme : {Scheme::kIob2, Scheme::kIobes}) {
    std::vector<std::string> alphabet = {"O"};
    for (char p : std::string(scheme == Scheme::kIob2 ? "BI" : "BIES")) {
      alphabet.push_back(std::string(1, p) + "-Disease");
    }
    std::vector<std::string> raw;
    bool ok = true;
    std::function<void()> visit = [&] {
      const TagSequence fixed = repair(raw, scheme);
      ok = ok && is_valid(fixed) && repair(fixed) == fixed;
      ++checked;
      if (raw.size() == 4) return;
      for (const auto& s : alphabet) {
        raw.push_back(s);
        visit();
        raw.pop_back();
      }
    };
    visit();
    if (!ok) return fail("repair not valid or not idempotent");
  }
  return pass(std::to_string(checked) + " repaired sequences");
}

ModelConfig toy_config() {
  ModelConfig c;
  c.apply_text(testing::read_file(testing::data_path("toy.conf")));
  return c;
}

std::vector<Document> toy_docs() {
  return parse_pubtator(testing::read_file(testing::data_path("toy_corpus.txt")));
}

Model train_toy(const ModelConfig& config) {
  std::istringstream vectors(testing::read_file(testing::data_path("toy_vectors.txt")));
  std::istringstream medic(testing::read_file(testing::data_path("toy_medic.tsv")));
  TrainingInputs in;
  in.train = toy_docs();
  in.embeddings = &vectors;
  in.medic = &medic;
  return train(config, std::move(in));
}

Outcome toy_overfit() {
  const ModelConfig c = toy_config();
  if (c.epochs > 200) return fail("toy config exceeds 200 epochs");
  if (c.flags() != std::array<bool, 4>{true, true, true, true}) {
    return fail("toy config must enable every component");
  }
  Model m = train_toy(c);
  const Dataset data = make_dataset(toy_docs(), c);
  const double f1 = score_entities(data.gold, m.predict_spans(data.sentences)).f1();
  std::ostringstream msg;
  msg << "f1=" << f1 << " after " << c.epochs << " epochs";
  return f1 == 1.0 ? pass(msg.str()) : fail(msg.str());
}

Outcome evaluator() {
  const std::vector<Span> gold = {{0, 0, "Disease"}, {3, 4, "Disease"}, {7, 9, "Disease"}};
  const std::vector<Span> pred = {{0, 0, "Disease"}, {3, 4, "Disease"},
                                  {5, 5, "Disease"}, {7, 8, "Disease"}};
  const EvalReport r = score_sentence(gold, pred);
  if (!(r == EvalReport{2, 2, 1}) || r.precision() != 0.5 || r.recall() != 2.0 / 3.0 ||
      r.f1() != 4.0 / 7.0) {
    return fail("worked example mismatch");
  }
  // Micro-averaging: corpus counts are sums of sentence counts.
  Rng rng(9);
  for (int c = 0; c < 100; ++c) {
    std::vector<std::vector<Span>> g, p;
    EvalReport sum;
    for (std::size_t i = 0, n = 1 + rng.below(10); i < n; ++i) {
      g.push_back(random_spans(10, rng));
      p.push_back(random_spans(10, rng));
      sum += score_sentence(g.back(), p.back());
    }
    if (!(score_entities(g, p) == sum)) return fail("corpus score is not micro-averaged");
  }
  return pass("P=1/2 R=2/3 F1=4/7");
}

Outcome corpus_statistics() {
  const char* path = std::getenv("DNER_NCBI_TRAIN");
  if (path == nullptr) return {Outcome::kSkip, "DNER_NCBI_TRAIN not set"};
  std::ifstream in(path);
  if (!in) return fail(std::string("cannot open ") + path);
  const CorpusStats s = corpus_stats(parse_pubtator(in));
  std::ostringstream msg;
  msg << s.n_abstracts << " abstracts, " << s.n_mentions << " mentions, "
      << s.n_unique_mentions << " unique, " << s.n_sentences << " sentences";
  const bool ok = s.n_abstracts == 593 && s.n_mentions == 5145 &&
                  s.n_unique_mentions == 1710 &&
                  std::abs(static_cast<double>(s.n_sentences) - 5661.0) <= 0.02 * 5661.0;
  return ok ? pass(msg.str()) : fail(msg.str());
}

std::string checkpoint_bytes(Model& m) {
  std::ostringstream out;
  m.save(out);
  return out.str();
}

Outcome determinism() {
  ModelConfig c = toy_config();
  c.epochs = 10;
  Model a = train_toy(c);
  Model b = train_toy(c);
  const std::string x = checkpoint_bytes(a), y = checkpoint_bytes(b);
  if (x != y) return fail("checkpoints differ");
  return pass(std::to_string(x.size()) + " identical bytes");
}

Outcome normalization() {
  std::size_t n = 0;
  for (const auto& c : testing::kNormalizeCases) {
    if (normalize_token(c.in) != c.out) {
      return fail(std::string("\"") + c.in + "\" -> \"" + normalize_token(c.in) + "\"");
    }
    ++n;
  }
  return pass(std::to_string(n) + " cases");
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0 means unbounded
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "decoding example scores 36/34 and Viterbi", 1, decoding_example},
      {2, "log-partition and Viterbi match enumeration", 10, crf_enumeration},
      {3, "analytic gradients match finite differences", 30, gradients},
      {4, "tagging scheme round trip, conversion and repair", 0, scheme_properties},
      {5, "toy corpus reaches training F1 = 1.0", 300, toy_overfit},
      {6, "exact-match evaluator", 0, evaluator},
      {7, "NCBI training split statistics", 0, corpus_statistics},
      {8, "same seed gives bit-identical checkpoints", 0, determinism},
      {9, "token normalization table", 0, normalization},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.kind == Outcome::kPass && c.limit_seconds > 0 && secs > c.limit_seconds) {
      o = fail("took longer than " + std::to_string(static_cast<int>(c.limit_seconds)) + "s");
    }
    const char* label = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n", label, c.id, c.name, secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
    failures += o.kind == Outcome::kFail;
  }
  return failures == 0 ? 0 : 1;
}
