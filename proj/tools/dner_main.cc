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

// dner: disease NER toolkit command line.
//
// Exit codes: 0 success, 1 domain error ("error: <kind>: <message>" on
// stderr), 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dner/corpus.h"
#include "dner/crf.h"
#include "dner/errors.h"
#include "dner/evaluate.h"
#include "dner/gradcheck.h"
#include "dner/pipeline.h"
#include "dner/tagging.h"

namespace {

using namespace dner;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  return in;
}

std::vector<Document> read_corpus(const std::string& path) {
  std::ifstream in = open_input(path);
  Diagnostics diagnostics;
  auto docs = parse_pubtator(in, &diagnostics);
  for (const auto& d : diagnostics) {
    std::cerr << "warning: " << path << ": document " << d.doc_id << ": "
              << d.message << "\n";
  }
  return docs;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- convert-sr ------------------------------------------------------------

Scheme detect_scheme(const std::vector<std::vector<std::string>>& sentences) {
  for (const auto& tags : sentences) {
    for (const auto& t : tags) {
      if (t.size() > 1 && (t[0] == 'E' || t[0] == 'S') && t[1] == '-') {
        return Scheme::kIobes;
      }
    }
  }
  return Scheme::kIob2;
}

void convert_stream(std::istream& in, std::ostream& out, Scheme target,
                    const std::string& from) {
  // Each sentence is a block of "token tag" lines; blank lines separate.
  struct Block {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
  };
  std::vector<Block> blocks(1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (!blocks.back().tokens.empty()) blocks.emplace_back();
      continue;
    }
    const auto cut = line.find_last_of(" \t");
    if (cut == std::string::npos || cut == 0) {
      throw ParseError("expected '<token> <tag>'", lineno);
    }
    const auto end = line.find_last_not_of(" \t", cut);
    blocks.back().tokens.push_back(line.substr(0, end + 1));
    blocks.back().tags.push_back(line.substr(cut + 1));
  }
  if (blocks.back().tokens.empty()) blocks.pop_back();
  std::vector<std::vector<std::string>> all_tags;
  for (const auto& b : blocks) all_tags.push_back(b.tags);
  const Scheme source = from == "auto" ? detect_scheme(all_tags) : parse_scheme(from);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k) out << "\n";
    const TagSequence converted = convert(repair(blocks[k].tags, source), target);
    const auto symbols = converted.symbols();
    for (std::size_t t = 0; t < symbols.size(); ++t) {
      out << blocks[k].tokens[t] << "\t" << symbols[t] << "\n";
    }
  }
}

// ---- evaluate --------------------------------------------------------------

EvalReport evaluate_files(const std::string& gold_path,
                          const std::string& pred_path,
                          const ModelConfig& config) {
  const auto gold_docs = filter_types(read_corpus(gold_path), config);
  const auto pred_docs = filter_types(read_corpus(pred_path), config);
  std::map<std::string, const Document*> pred_by_id;
  for (const auto& d : pred_docs) pred_by_id[d.id] = &d;
  for (const auto& d : pred_docs) {
    const bool known = std::any_of(gold_docs.begin(), gold_docs.end(),
                                   [&](const Document& g) { return g.id == d.id; });
    if (!known) {
      throw Error("evaluate", "predicted document " + d.id +
                                  " does not occur in the gold file");
    }
  }
  std::vector<std::vector<Span>> gold, pred;
  for (const auto& doc : gold_docs) {
    const auto it = pred_by_id.find(doc.id);
    const std::vector<Mention> none;
    const std::vector<Mention>& predicted =
        it == pred_by_id.end() ? none : it->second->mentions;
    for (const auto& s : split_sentences(doc)) {
      gold.push_back(project_spans(s, doc.mentions));
      pred.push_back(project_spans(s, predicted));
    }
  }
  return score_entities(gold, pred);
}

// ---- decode-fixture --------------------------------------------------------

std::string decode_fixture(const std::string& path) {
  std::ifstream in = open_input(path);
  const CrfFixture fx = parse_fixture(in);
  std::string out;
  for (const auto& p : fx.paths) {
    out += number(global_score(fx.emissions, fx.transitions, p)) + " ";
  }
  out += "selected=" + fx.path_string(viterbi_decode(fx.emissions, fx.transitions));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disease named-entity recognition toolkit"};
  app.require_subcommand(1);

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus counts of a PubTator file");
  std::string stats_path;
  stats->add_option("corpus", stats_path, "PubTator file")->required();

  // convert-sr
  auto* conv = app.add_subcommand(
      "convert-sr", "Convert a two-column CoNLL stream between IOB2 and IOBES");
  std::string conv_to, conv_from = "auto";
  conv->add_option("--to", conv_to, "Target scheme (iob2 or iobes)")->required();
  conv->add_option("--from", conv_from, "Source scheme (auto, iob2, iobes)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a tagger");
  std::string train_path, dev_path, emb_path, medic_path, config_path, out_path;
  bool quiet = false;
  train_cmd->add_option("--train", train_path, "Training PubTator file")->required();
  train_cmd->add_option("--dev", dev_path, "Development PubTator file");
  train_cmd->add_option("--embeddings", emb_path, "word2vec text vectors")
      ->envname("DNER_EMBEDDINGS");
  train_cmd->add_option("--medic", medic_path, "MEDIC vocabulary TSV")
      ->envname("DNER_MEDIC");
  train_cmd->add_option("--out", out_path, "Checkpoint to write")->required();
  train_cmd->add_flag("-q,--quiet", quiet, "No progress output");

  // Every configuration key is also a train flag.
  std::map<std::string, std::string> overrides;
  train_cmd->add_option("--config", config_path, "key=value configuration file")
      ->envname("DNER_CONFIG");
  for (const auto& key : ModelConfig::keys()) {
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + key;
    if (dashed != key) names += ",--" + dashed;
    train_cmd->add_option_function<std::string>(
        names, [&overrides, key](const std::string& v) { overrides[key] = v; },
        "Configuration value (default " + ModelConfig().get(key) + ")");
  }

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "Tag documents with a checkpoint");
  std::string model_path, input_path, text, output_path;
  std::size_t threads = 0;
  pred_cmd->add_option("--model", model_path, "Checkpoint")->required();
  auto* input_opt = pred_cmd->add_option("--input", input_path, "PubTator input");
  auto* text_opt = pred_cmd->add_option("--text", text, "Raw text to tag");
  input_opt->excludes(text_opt);
  pred_cmd->add_option("--output", output_path, "Output file (default stdout)");
  pred_cmd->add_option("--threads", threads, "Decoding threads");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Entity-level scores");
  std::string gold_path, pred_path;
  std::string keep_types, collapse_to = "Disease";
  eval_cmd->add_option("--gold", gold_path, "Gold PubTator file")->required();
  eval_cmd->add_option("--pred", pred_path, "Predicted PubTator file")->required();
  eval_cmd->add_option("--keep-types,--keep_types", keep_types,
                       "Comma-separated types to score (default all)");
  eval_cmd->add_option("--collapse-to,--collapse_to", collapse_to,
                       "Rename scored types to this (empty keeps names)");

  // decode-fixture
  auto* fixture_cmd = app.add_subcommand(
      "decode-fixture", "Score the listed paths of a CRF fixture and decode it");
  std::string fixture_path;
  fixture_cmd->add_option("fixture", fixture_path, "Fixture file")->required();

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suites");
  std::vector<std::string> suites;
  std::uint64_t grad_seed = 7;
  double tolerance = 1e-4;
  grad_cmd->add_option("--suite", suites, "Suites to run (default all)");
  grad_cmd->add_option("--seed", grad_seed, "Seed of the random instances");
  grad_cmd->add_option("--tolerance", tolerance, "Largest accepted relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (stats->parsed()) {
      const auto docs = read_corpus(stats_path);
      const CorpusStats s = corpus_stats(docs);
      std::cout << "abstracts=" << s.n_abstracts << "\n"
                << "sentences=" << s.n_sentences << "\n"
                << "mentions=" << s.n_mentions << "\n"
                << "unique_mentions=" << s.n_unique_mentions << "\n";
    } else if (conv->parsed()) {
      convert_stream(std::cin, std::cout, parse_scheme(conv_to), conv_from);
    } else if (train_cmd->parsed()) {
      ModelConfig config;
      if (!config_path.empty()) {
        std::ifstream in = open_input(config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        config.apply_text(ss.str());
      }
      for (const auto& [key, value] : overrides) config.set(key, value);
      config.validate();
      TrainingInputs inputs;
      inputs.train = read_corpus(train_path);
      if (!dev_path.empty()) inputs.dev = read_corpus(dev_path);
      std::unique_ptr<std::ifstream> emb, medic;
      if (!emb_path.empty() && config.use_pretrained) {
        emb = std::make_unique<std::ifstream>(open_input(emb_path));
        inputs.embeddings = emb.get();
      }
      if (!medic_path.empty() && config.use_dictionary) {
        medic = std::make_unique<std::ifstream>(open_input(medic_path));
        inputs.medic = medic.get();
      }
      if (!quiet) {
        inputs.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
        inputs.progress = [](const EpochReport& r) {
          std::fprintf(stderr, "epoch %zu loss=%.6f", r.epoch, r.mean_loss);
          if (r.dev_f1 >= 0) std::fprintf(stderr, " dev_f1=%.4f", r.dev_f1);
          std::fprintf(stderr, " time=%.1fs\n", r.seconds);
        };
      }
      Model model = train(config, std::move(inputs));
      model.save_file(out_path);
      std::cout << "best_epoch=" << model.metadata.best_epoch << "\n"
                << "best_dev_f1=" << number(model.metadata.best_dev_f1) << "\n"
                << "final_loss=" << number(model.metadata.loss_curve.back())
                << "\n";
    } else if (pred_cmd->parsed()) {
      Model model = Model::load_file(model_path);
      if (threads > 0) model.config.threads = threads;
      std::vector<Document> docs;
      if (!text.empty() || text_opt->count() > 0) {
        Document d;
        d.id = "0";
        d.title = text;
        docs.push_back(d);
      } else if (!input_path.empty()) {
        docs = read_corpus(input_path);
      } else {
        throw ConfigError("predict needs --input or --text");
      }
      const auto result = predict(model, docs);
      if (output_path.empty()) {
        write_pubtator(std::cout, result);
      } else {
        std::ofstream out(output_path, std::ios::binary);
        if (!out) throw Error("io", "cannot open '" + output_path + "' for writing");
        write_pubtator(out, result);
      }
    } else if (eval_cmd->parsed()) {
      ModelConfig config;
      config.keep_types = keep_types;
      config.collapse_to = collapse_to;
      const EvalReport r = evaluate_files(gold_path, pred_path, config);
      std::cout << format_report(r) << "\n" << key_value_report(r);
    } else if (fixture_cmd->parsed()) {
      std::cout << decode_fixture(fixture_path) << "\n";
    } else if (grad_cmd->parsed()) {
      if (suites.empty()) suites = gradient_suites();
      std::size_t failures = 0;
      for (const auto& suite : suites) {
        for (const auto& r : run_gradient_suite(suite, grad_seed)) {
          const bool ok = r.max_rel_error < tolerance;
          failures += ok ? 0 : 1;
          std::printf("%-8s %-20s checked=%-4zu max_rel_error=%.3e %s\n",
                      r.suite.c_str(), r.parameter.c_str(), r.checked,
                      r.max_rel_error, ok ? "ok" : "FAIL");
        }
      }
      if (failures > 0) {
        throw Error("gradcheck", std::to_string(failures) +
                                     " parameter(s) exceed the tolerance");
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
