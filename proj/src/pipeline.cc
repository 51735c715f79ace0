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

#include "dner/pipeline.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "binary_io.h"
#include "dner/errors.h"

namespace dner {
namespace {

constexpr char kMagic[8] = {'D', 'N', 'E', 'R', 'C', 'K', 'P', 'T'};

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

std::string format_double(double v) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string tmp(value);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + tmp + "'");
  }
  return v;
}

bool parse_flag(std::string_view key, std::string_view value) {
  std::string v(value);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" +
                    std::string(value) + "'");
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = std::min(s.find(',', pos), s.size());
    std::string item = trim(s.substr(pos, next - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = next + 1;
  }
  return out;
}

void write_tensor(internal::ByteWriter& w, const ad::Parameter& p) {
  w.str(p.name);
  w.u64(p.value.rank());
  for (std::size_t d : p.value.shape()) w.u64(d);
  w.f64s(p.value.data());
}

void write_strings(internal::ByteWriter& w, const auto& strings) {
  w.u64(strings.size());
  for (const auto& s : strings) w.str(s);
}

std::vector<std::string> read_strings(internal::ByteReader& r) {
  const std::uint64_t n = r.u64();
  std::vector<std::string> out;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(r.str());
  return out;
}

std::string parameter_norms(const ad::ParameterList& params) {
  std::string out;
  for (const ad::Parameter* p : params) {
    double sq = 0.0;
    for (double g : p->grad.data()) sq += g * g;
    if (!out.empty()) out += ", ";
    out += p->name + "=" + format_double(std::sqrt(sq));
  }
  return out;
}

}  // namespace

// ---- configuration ---------------------------------------------------------

const std::vector<std::string>& ModelConfig::keys() {
  static const std::vector<std::string> k = {
      "epochs",          "dropout",         "batch_size",
      "optimizer",       "learning_rate",   "learning_decay",
      "clip_norm",       "char_lstm_units", "word_lstm_units",
      "char_dim",        "word_dim",        "scheme",
      "v1_dictionary",   "v2_pretrained",   "v3_crf",
      "v4_chars",        "mask_transitions", "seed",
      "keep_types",      "collapse_to",     "threads"};
  return k;
}

std::string ModelConfig::get(std::string_view key) const {
  if (key == "epochs") return std::to_string(epochs);
  if (key == "dropout") return format_double(dropout);
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "optimizer") return optimizer;
  if (key == "learning_rate") return format_double(learning_rate);
  if (key == "learning_decay") return format_double(learning_decay);
  if (key == "clip_norm") return format_double(clip_norm);
  if (key == "char_lstm_units") return std::to_string(char_lstm_units);
  if (key == "word_lstm_units") return std::to_string(word_lstm_units);
  if (key == "char_dim") return std::to_string(char_dim);
  if (key == "word_dim") return std::to_string(word_dim);
  if (key == "scheme") return std::string(scheme_name(scheme));
  if (key == "v1_dictionary") return use_dictionary ? "1" : "0";
  if (key == "v2_pretrained") return use_pretrained ? "1" : "0";
  if (key == "v3_crf") return use_crf ? "1" : "0";
  if (key == "v4_chars") return use_chars ? "1" : "0";
  if (key == "mask_transitions") return mask_transitions ? "1" : "0";
  if (key == "seed") return std::to_string(seed);
  if (key == "keep_types") return keep_types;
  if (key == "collapse_to") return collapse_to;
  if (key == "threads") return std::to_string(threads);
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

void ModelConfig::set(std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (key == "epochs") {
    epochs = parse_count(key, value);
  } else if (key == "dropout") {
    dropout = parse_real(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_count(key, value);
  } else if (key == "optimizer") {
    optimizer = value;
  } else if (key == "learning_rate") {
    learning_rate = parse_real(key, value);
  } else if (key == "learning_decay") {
    learning_decay = parse_real(key, value);
  } else if (key == "clip_norm") {
    clip_norm = parse_real(key, value);
  } else if (key == "char_lstm_units") {
    char_lstm_units = parse_count(key, value);
  } else if (key == "word_lstm_units") {
    word_lstm_units = parse_count(key, value);
  } else if (key == "char_dim") {
    char_dim = parse_count(key, value);
  } else if (key == "word_dim") {
    word_dim = parse_count(key, value);
  } else if (key == "scheme") {
    try {
      scheme = parse_scheme(value);
    } catch (const Error& e) {
      throw ConfigError("scheme: " + std::string(e.what()));
    }
  } else if (key == "v1_dictionary") {
    use_dictionary = parse_flag(key, value);
  } else if (key == "v2_pretrained") {
    use_pretrained = parse_flag(key, value);
  } else if (key == "v3_crf") {
    use_crf = parse_flag(key, value);
  } else if (key == "v4_chars") {
    use_chars = parse_flag(key, value);
  } else if (key == "mask_transitions") {
    mask_transitions = parse_flag(key, value);
  } else if (key == "seed") {
    seed = parse_count(key, value);
  } else if (key == "keep_types") {
    keep_types = value;
  } else if (key == "collapse_to") {
    collapse_to = value;
  } else if (key == "threads") {
    threads = parse_count(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

void ModelConfig::validate() const {
  const auto positive = [](const char* key, std::size_t v) {
    if (v == 0) throw ConfigError(std::string(key) + " must be positive");
  };
  positive("epochs", epochs);
  positive("batch_size", batch_size);
  positive("char_lstm_units", char_lstm_units);
  positive("word_lstm_units", word_lstm_units);
  positive("char_dim", char_dim);
  positive("word_dim", word_dim);
  positive("threads", threads);
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout must be in [0, 1), got " + format_double(dropout));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(learning_decay > 0.0)) throw ConfigError("learning_decay must be positive");
  if (optimizer != "adam") {
    throw ConfigError("optimizer '" + optimizer + "' is not supported (only adam)");
  }
}

std::string ModelConfig::to_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + "=" + get(key) + "\n";
  return out;
}

void ModelConfig::apply_text(std::string_view text) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    const std::string line = trim(text.substr(pos, next - pos));
    pos = next + 1;
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

EncoderConfig ModelConfig::encoder() const {
  EncoderConfig e;
  e.char_dim = char_dim;
  e.char_hidden = char_lstm_units;
  e.word_dim = word_dim;
  e.word_hidden = word_lstm_units;
  e.use_chars = use_chars;
  e.use_dict = use_dictionary;
  e.dropout = dropout;
  return e;
}

// ---- datasets --------------------------------------------------------------

std::vector<Document> filter_types(std::vector<Document> docs,
                                   const ModelConfig& config) {
  const auto keep = split_commas(config.keep_types);
  const std::set<std::string> kept(keep.begin(), keep.end());
  for (Document& d : docs) {
    std::vector<Mention> out;
    for (Mention& m : d.mentions) {
      if (!kept.empty() && kept.count(m.entity_type) == 0) continue;
      if (!config.collapse_to.empty()) m.entity_type = config.collapse_to;
      out.push_back(std::move(m));
    }
    d.mentions = std::move(out);
  }
  return docs;
}

Dataset make_dataset(std::vector<Document> docs, const ModelConfig& config) {
  Dataset ds;
  ds.docs = filter_types(std::move(docs), config);
  for (const Document& d : ds.docs) {
    for (Sentence& s : split_sentences(d)) {
      ds.gold.push_back(project_spans(s, d.mentions, &ds.diagnostics));
      ds.sentences.push_back(std::move(s));
    }
  }
  return ds;
}

// ---- model -----------------------------------------------------------------

Model Model::create(const ModelConfig& config, std::vector<std::string> types,
                    EmbeddingTable words, CharVocab chars, Lexicon lexicon,
                    Rng& rng) {
  config.validate();
  Model m;
  m.config = config;
  m.inventory = TagInventory(config.scheme, std::move(types));
  m.words = std::move(words);
  m.chars = std::move(chars);
  m.lexicon = std::move(lexicon);
  Rng encoder_rng = rng.fork();
  Rng projection_rng = rng.fork();
  m.encoder = EncoderParams::init(config.encoder(), m.chars.size(), m.words,
                                  encoder_rng);
  m.projection = EmissionProjection::init(
      m.inventory.size(), 2 * config.word_lstm_units, projection_rng);
  ad::Tensor tr = make_transitions(m.inventory.size());
  if (config.mask_transitions) mask_transitions(tr, m.inventory);
  m.transitions = ad::Parameter("transitions", std::move(tr));
  return m;
}

ad::ParameterList Model::parameters() {
  ad::ParameterList out = encoder.parameters();
  out.push_back(&projection.weight);
  out.push_back(&projection.bias);
  out.push_back(&transitions);
  return out;
}

SentenceInput Model::input(std::span<const std::string> surfaces) const {
  return prepare_input(surfaces, words, chars, lexicon);
}

ad::Var Model::emissions(ad::Graph& g, const SentenceInput& in, bool training,
                         Rng& rng) {
  const auto ctx = contextual_representation(g, encoder, config.encoder(), in,
                                             training, rng);
  return project(g.param(projection.weight), g.param(projection.bias), ctx);
}

ad::Var Model::loss(ad::Graph& g, const SentenceInput& in,
                    std::span<const std::size_t> gold, bool training,
                    Rng& rng) {
  ad::Var s = emissions(g, in, training, rng);
  if (config.use_crf) return nll_loss(s, g.param(transitions), gold);
  return local_loss(s, gold);
}

TagSequence Model::tag(const SentenceInput& in) {
  ad::Graph g;
  Rng unused(0);
  const ad::Tensor& s = emissions(g, in, false, unused).value();
  const TagPath path =
      config.use_crf ? viterbi_decode(s, transitions.value) : local_decode(s);
  return repair(inventory.sequence(path));
}

std::vector<Span> Model::spans(const Sentence& sentence) {
  const auto surfaces = sentence.surfaces();
  return decode_tags(tag(input(surfaces)));
}

std::vector<std::vector<Span>> Model::predict_spans(
    std::span<const Sentence> sentences) {
  std::vector<std::vector<Span>> out(sentences.size());
  const std::size_t workers =
      std::min<std::size_t>(std::max<std::size_t>(config.threads, 1),
                            std::max<std::size_t>(sentences.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i) out[i] = spans(sentences[i]);
    return out;
  }
  // Inference only reads parameters, so sentences can be decoded in parallel.
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < sentences.size(); i += workers) {
          out[i] = spans(sentences[i]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---- checkpoints -----------------------------------------------------------

void Model::save(std::ostream& out) {
  internal::ByteWriter w;
  w.str(config.to_text());
  write_strings(w, inventory.entity_types());
  w.u64(words.dim());
  write_strings(w, words.words());
  w.u64(chars.chars().size());
  for (char32_t c : chars.chars()) w.u32(static_cast<std::uint32_t>(c));
  write_strings(w, lexicon.entries());
  w.u64(lexicon.synonyms().size());
  for (const auto& [syn, canonical] : lexicon.synonyms()) {
    w.str(syn);
    w.str(canonical);
  }
  write_strings(w, lexicon.abbreviations());
  const auto params = parameters();
  w.u64(params.size());
  for (const ad::Parameter* p : params) write_tensor(w, *p);
  w.u64(metadata.best_epoch);
  w.f64(metadata.best_dev_f1);
  w.f64s(metadata.loss_curve);
  w.f64s(metadata.dev_f1_curve);

  const std::string& payload = w.bytes();
  internal::ByteWriter file;
  file.raw(kMagic, sizeof kMagic);
  file.u32(kCheckpointVersion);
  file.u64(payload.size());
  file.raw(payload.data(), payload.size());
  file.u32(static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size()))));
  out.write(file.bytes().data(),
            static_cast<std::streamsize>(file.bytes().size()));
  if (!out) throw Error("io", "failed to write checkpoint");
}

Model Model::load(std::istream& in) {
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  if (bytes.size() < sizeof kMagic ||
      bytes.compare(0, sizeof kMagic, std::string_view(kMagic, sizeof kMagic)) !=
          0) {
    throw CheckpointError("not a checkpoint (bad magic header)");
  }
  internal::ByteReader header(std::string_view(bytes).substr(sizeof kMagic),
                              "checkpoint header");
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " is not supported (expected version " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t length = header.u64();
  const std::size_t offset = sizeof kMagic + 4 + 8;
  if (length > bytes.size() - offset || bytes.size() - offset - length < 4) {
    throw CheckpointError(
        "checkpoint is truncated: checksum/length check failed (header "
        "declares " +
        std::to_string(length) + " payload bytes, file has " +
        std::to_string(bytes.size() - offset) + " after the header)");
  }
  const std::string_view payload = std::string_view(bytes).substr(offset, length);
  internal::ByteReader tail(std::string_view(bytes).substr(offset + length),
                            "checkpoint checksum");
  const std::uint32_t stored = tail.u32();
  const auto actual = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));
  if (stored != actual || !tail.done()) {
    throw CheckpointError("checkpoint checksum mismatch (file is corrupt)");
  }

  internal::ByteReader r(payload, "checkpoint payload");
  ModelConfig config;
  config.apply_text(r.str());
  std::vector<std::string> types = read_strings(r);
  const std::uint64_t dim = r.u64();
  EmbeddingTable words(dim);
  for (const auto& word : read_strings(r)) words.add(word);
  std::vector<char32_t> char_list(r.u64());
  for (char32_t& c : char_list) c = r.u32();
  auto entries_list = read_strings(r);
  std::map<std::string, std::string> synonyms;
  const std::uint64_t n_syn = r.u64();
  for (std::uint64_t i = 0; i < n_syn; ++i) {
    std::string syn = r.str();
    synonyms.emplace(std::move(syn), r.str());
  }
  auto abbreviations_list = read_strings(r);
  Lexicon lexicon = Lexicon::from_parts(
      {entries_list.begin(), entries_list.end()}, std::move(synonyms),
      {abbreviations_list.begin(), abbreviations_list.end()});

  Rng unused(0);
  Model m = Model::create(config, std::move(types), std::move(words),
                          CharVocab::from_chars(std::move(char_list)),
                          std::move(lexicon), unused);
  const auto params = m.parameters();
  if (r.u64() != params.size()) {
    throw CheckpointError("checkpoint parameter count does not match the model");
  }
  for (ad::Parameter* p : params) {
    const std::string name = r.str();
    std::vector<std::size_t> shape(r.u64());
    for (std::size_t& d : shape) d = r.u64();
    std::vector<double> data = r.f64s();
    if (name != p->name || shape != p->value.shape()) {
      throw CheckpointError("checkpoint parameter '" + name + "' " +
                            ad::shape_str(shape) + " does not match '" +
                            p->name + "' " + p->value.shape_str());
    }
    p->value = ad::Tensor(std::move(shape), std::move(data));
  }
  m.metadata.best_epoch = r.u64();
  m.metadata.best_dev_f1 = r.f64();
  m.metadata.loss_curve = r.f64s();
  m.metadata.dev_f1_curve = r.f64s();
  if (!r.done()) throw CheckpointError("checkpoint has trailing payload bytes");
  return m;
}

void Model::save_file(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot open '" + path + "' for writing");
  save(out);
}

Model Model::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  return load(in);
}

// ---- training --------------------------------------------------------------

Model train(const ModelConfig& config, TrainingInputs inputs) {
  config.validate();
  const auto log = [&](const std::string& msg) {
    if (inputs.log) inputs.log(msg);
  };
  Dataset train_set = make_dataset(std::move(inputs.train), config);
  Dataset dev_set = make_dataset(std::move(inputs.dev), config);
  if (train_set.sentences.empty()) {
    throw TrainingError("training corpus contains no sentences");
  }
  for (const Dataset* ds : {&train_set, &dev_set}) {
    for (const Diagnostic& d : ds->diagnostics) {
      log("warning: document " + d.doc_id + ": " + d.message);
    }
  }

  std::vector<std::string> types;
  if (!config.collapse_to.empty()) {
    types.push_back(config.collapse_to);
  } else {
    std::set<std::string> seen;
    for (const auto& spans : train_set.gold) {
      for (const Span& s : spans) seen.insert(s.entity_type);
    }
    types.assign(seen.begin(), seen.end());
  }
  if (types.empty()) {
    throw TrainingError("training corpus has no mentions of the kept types");
  }

  Vocabulary vocab = word_vocabulary(train_set.sentences);
  vocab.merge(word_vocabulary(dev_set.sentences));
  EmbeddingTable words;
  if (config.use_pretrained) {
    if (inputs.embeddings == nullptr) {
      throw ConfigError(
          "v2_pretrained is on but no embedding file was given");
    }
    words = load_word2vec_text(*inputs.embeddings, vocab, config.word_dim,
                               config.seed);
    log("embeddings: " + std::to_string(words.rows() - 2) + " of " +
        std::to_string(vocab.size()) + " corpus words found");
  } else {
    words = random_table(vocab, config.word_dim, config.seed);
  }
  Lexicon lexicon;
  if (config.use_dictionary) {
    if (inputs.medic != nullptr) {
      lexicon = load_medic(*inputs.medic);
      log("lexicon: " + std::to_string(lexicon.size()) + " names, " +
          std::to_string(lexicon.synonyms().size()) + " synonyms");
    } else {
      log("warning: v1_dictionary is on but no MEDIC file was given; "
          "dictionary features will be all zero");
    }
  }

  Rng master(config.seed);
  Model model = Model::create(config, std::move(types), std::move(words),
                              build_char_vocab(train_set.sentences),
                              std::move(lexicon), master);
  Rng shuffle_rng = master.fork();
  Rng dropout_rng = master.fork();

  const std::size_t n = train_set.sentences.size();
  std::vector<SentenceInput> examples;
  std::vector<TagPath> gold;
  examples.reserve(n);
  gold.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sentence& s = train_set.sentences[i];
    examples.push_back(model.input(s.surfaces()));
    gold.push_back(model.inventory.indices(
        encode_spans(s.size(), train_set.gold[i], config.scheme)));
  }

  ad::ParameterList params = model.parameters();
  ad::AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  adam_config.decay = config.learning_decay;
  adam_config.clip_norm = config.clip_norm;
  ad::Adam adam(adam_config, params);
  std::vector<ad::Tensor> best;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    // Shuffle, then group by length so batches hold similar sentences, then
    // shuffle the batch order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return examples[a].size() < examples[b].size();
                     });
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < n; i += config.batch_size) {
      batches.emplace_back(order.begin() + i,
                           order.begin() + std::min(n, i + config.batch_size));
    }
    shuffle_rng.shuffle(batches);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      ad::zero_grad(params);
      const double weight = 1.0 / static_cast<double>(batch.size());
      try {
        for (std::size_t i : batch) {
          ad::Graph g;
          ad::Var l = model.loss(g, examples[i], gold[i], true, dropout_rng);
          epoch_loss += l.value()[0];
          g.backward(ad::scale(l, weight));
        }
      } catch (const NonFiniteError& e) {
        throw TrainingError("epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(b + 1) + ": " + e.what() +
                            "; gradient norms: " + parameter_norms(params));
      }
      const double norm = ad::clip_grad_norm(params, config.clip_norm);
      if (!std::isfinite(norm)) {
        throw TrainingError("epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(b + 1) +
                            ": non-finite gradient norm; gradient norms: " +
                            parameter_norms(params));
      }
      adam.step(epoch);
    }
    const double mean_loss = epoch_loss / static_cast<double>(n);
    model.metadata.loss_curve.push_back(mean_loss);

    EpochReport report;
    report.epoch = epoch + 1;
    report.mean_loss = mean_loss;
    if (!dev_set.sentences.empty()) {
      const double f1 =
          score_entities(dev_set.gold, model.predict_spans(dev_set.sentences))
              .f1();
      model.metadata.dev_f1_curve.push_back(f1);
      report.dev_f1 = f1;
      if (f1 > model.metadata.best_dev_f1) {
        model.metadata.best_dev_f1 = f1;
        model.metadata.best_epoch = epoch + 1;
        best.clear();
        for (const ad::Parameter* p : params) best.push_back(p->value);
      }
    } else {
      model.metadata.best_epoch = epoch + 1;
    }
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    if (inputs.progress) inputs.progress(report);
  }
  if (!best.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best[k];
  }
  for (ad::Parameter* p : params) p->zero_grad();
  return model;
}

std::vector<Document> predict(Model& model, std::span<const Document> docs) {
  std::vector<Document> out;
  std::vector<Sentence> sentences;
  std::vector<std::size_t> owner;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Document clean = docs[d];
    clean.mentions.clear();
    for (Sentence& s : split_sentences(clean)) {
      sentences.push_back(std::move(s));
      owner.push_back(d);
    }
    out.push_back(std::move(clean));
  }
  const auto spans = model.predict_spans(sentences);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Document& doc = out[owner[i]];
    const std::string text = doc.text();
    for (const Span& sp : spans[i]) {
      Mention m;
      m.start = sentences[i].tokens[sp.start_token].start;
      m.end = sentences[i].tokens[sp.end_token].end;
      m.surface = text.substr(m.start, m.end - m.start);
      m.entity_type = sp.entity_type;
      doc.mentions.push_back(std::move(m));
    }
  }
  for (Document& doc : out) {
    std::stable_sort(doc.mentions.begin(), doc.mentions.end(),
                     [](const Mention& a, const Mention& b) {
                       return std::tie(a.start, a.end) < std::tie(b.start, b.end);
                     });
  }
  return out;
}

}  // namespace dner
