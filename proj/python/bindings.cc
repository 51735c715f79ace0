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

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dner/corpus.h"
#include "dner/crf.h"
#include "dner/embeddings.h"
#include "dner/errors.h"
#include "dner/evaluate.h"
#include "dner/pipeline.h"
#include "dner/tagging.h"

namespace py = pybind11;
using namespace dner;

namespace {

using Matrix = std::vector<std::vector<double>>;

ad::Tensor to_tensor(const Matrix& rows) {
  const std::size_t r = rows.size(), c = r ? rows[0].size() : 0;
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return ad::Tensor::matrix(r, c, std::move(flat));
}

Scheme scheme_of(const std::string& name) { return parse_scheme(name); }

std::ifstream open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

}  // namespace

PYBIND11_MODULE(_dner, m) {
  m.doc() = "BiLSTM-CRF disease mention recognition";

  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<ShapeError>(m, "ShapeError", error);
  py::register_exception<NonFiniteError>(m, "NonFiniteError", error);
  py::register_exception<TagError>(m, "TagError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<CheckpointError>(m, "CheckpointError", error);
  py::register_exception<TrainingError>(m, "TrainingError", error);

  py::class_<Mention>(m, "Mention")
      .def(py::init<>())
      .def_readwrite("start", &Mention::start)
      .def_readwrite("end", &Mention::end)
      .def_readwrite("surface", &Mention::surface)
      .def_readwrite("entity_type", &Mention::entity_type)
      .def_readwrite("concept_id", &Mention::concept_id)
      .def("__repr__", [](const Mention& x) {
        return "Mention(" + std::to_string(x.start) + ", " + std::to_string(x.end) + ", '" +
               x.surface + "', '" + x.entity_type + "')";
      });

  py::class_<Document>(m, "Document")
      .def(py::init<>())
      .def(py::init([](std::string id, std::string title, std::string abstract) {
             return Document{std::move(id), std::move(title), std::move(abstract), {}};
           }),
           py::arg("id"), py::arg("title"), py::arg("abstract") = "")
      .def_readwrite("id", &Document::id)
      .def_readwrite("title", &Document::title)
      .def_readwrite("abstract", &Document::abstract)
      .def_readwrite("mentions", &Document::mentions)
      .def_property_readonly("text", &Document::text);

  py::class_<Span>(m, "Span")
      .def(py::init<std::size_t, std::size_t, std::string>(), py::arg("start_token"),
           py::arg("end_token"), py::arg("entity_type"))
      .def_readwrite("start_token", &Span::start_token)
      .def_readwrite("end_token", &Span::end_token)
      .def_readwrite("entity_type", &Span::entity_type)
      .def(py::self == py::self)
      .def("__repr__", [](const Span& s) {
        return "Span(" + std::to_string(s.start_token) + ", " + std::to_string(s.end_token) +
               ", '" + s.entity_type + "')";
      });

  py::class_<CorpusStats>(m, "CorpusStats")
      .def_readonly("n_abstracts", &CorpusStats::n_abstracts)
      .def_readonly("n_sentences", &CorpusStats::n_sentences)
      .def_readonly("n_mentions", &CorpusStats::n_mentions)
      .def_readonly("n_unique_mentions", &CorpusStats::n_unique_mentions);

  py::class_<EvalReport>(m, "EvalReport")
      .def(py::init<>())
      .def_readwrite("true_positives", &EvalReport::true_positives)
      .def_readwrite("false_positives", &EvalReport::false_positives)
      .def_readwrite("false_negatives", &EvalReport::false_negatives)
      .def_property_readonly("precision", &EvalReport::precision)
      .def_property_readonly("recall", &EvalReport::recall)
      .def_property_readonly("f1", &EvalReport::f1)
      .def("__str__", &key_value_report);

  m.def("parse_pubtator",
        [](const std::string& text) { return parse_pubtator(std::string_view(text)); },
        py::arg("text"));
  m.def("corpus_stats",
        [](const std::vector<Document>& docs) { return corpus_stats(docs); });
  m.def("tokenize", [](const std::string& text) {
    std::vector<std::string> out;
    for (const Token& t : tokenize(text)) out.push_back(t.surface);
    return out;
  });
  m.def("normalize_token", &normalize_token);

  m.def("encode_spans",
        [](std::size_t n, std::vector<Span> spans, const std::string& scheme) {
          return encode_spans(n, std::move(spans), scheme_of(scheme)).symbols();
        },
        py::arg("n_tokens"), py::arg("spans"), py::arg("scheme") = "iobes");
  m.def("decode_tags",
        [](const std::vector<std::string>& tags, const std::string& scheme) {
          return decode_tags(TagSequence::parse(tags, scheme_of(scheme)));
        },
        py::arg("tags"), py::arg("scheme") = "iobes");
  m.def("convert",
        [](const std::vector<std::string>& tags, const std::string& from,
           const std::string& to) {
          return convert(TagSequence::parse(tags, scheme_of(from)), scheme_of(to)).symbols();
        },
        py::arg("tags"), py::arg("source"), py::arg("target"));
  m.def("repair",
        [](const std::vector<std::string>& tags, const std::string& scheme) {
          return repair(tags, scheme_of(scheme)).symbols();
        },
        py::arg("tags"), py::arg("scheme") = "iobes");

  // Emissions are [T][m]; transitions are [T+2][T+2] with START and STOP last.
  m.def("global_score",
        [](const Matrix& s, const Matrix& tr, const std::vector<std::size_t>& path) {
          return global_score(to_tensor(s), to_tensor(tr), path);
        },
        py::arg("emissions"), py::arg("transitions"), py::arg("path"));
  m.def("log_partition", [](const Matrix& s, const Matrix& tr) {
    return log_partition(to_tensor(s), to_tensor(tr));
  }, py::arg("emissions"), py::arg("transitions"));
  m.def("viterbi_decode", [](const Matrix& s, const Matrix& tr) {
    return viterbi_decode(to_tensor(s), to_tensor(tr));
  }, py::arg("emissions"), py::arg("transitions"));

  m.def("score_entities",
        [](const std::vector<std::vector<Span>>& gold,
           const std::vector<std::vector<Span>>& pred) { return score_entities(gold, pred); },
        py::arg("gold"), py::arg("predicted"));

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def(py::init([](const py::kwargs& kw) {
        ModelConfig c;
        for (const auto& [k, v] : kw) {
          c.set(py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
        }
        c.validate();
        return c;
      }))
      .def_static("keys", &ModelConfig::keys)
      .def("get", [](const ModelConfig& c, const std::string& k) { return c.get(k); })
      .def("set", [](ModelConfig& c, const std::string& k, py::object v) {
        c.set(k, py::str(v).cast<std::string>());
      })
      .def("apply_text", [](ModelConfig& c, const std::string& t) { c.apply_text(t); })
      .def("to_text", &ModelConfig::to_text)
      .def("validate", &ModelConfig::validate);

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load_file, py::arg("path"))
      .def("save", &Model::save_file, py::arg("path"))
      .def_property_readonly("config", [](const Model& x) { return x.config; })
      .def_property_readonly("loss_curve", [](const Model& x) { return x.metadata.loss_curve; })
      .def_property_readonly("best_epoch", [](const Model& x) { return x.metadata.best_epoch; })
      .def("predict",
           [](Model& x, const std::vector<Document>& docs) {
             py::gil_scoped_release release;
             return predict(x, docs);
           })
      .def("predict_text", [](Model& x, const std::string& text) {
        Document d;
        d.id = "0";
        d.title = text;
        py::gil_scoped_release release;
        return predict(x, std::vector<Document>{d}).front().mentions;
      });

  m.def(
      "train",
      [](const ModelConfig& config, const std::vector<Document>& train_docs,
         std::optional<std::string> embeddings, std::optional<std::string> medic,
         const std::vector<Document>& dev) {
        std::optional<std::ifstream> vec, lex;
        TrainingInputs in;
        in.train = train_docs;
        in.dev = dev;
        if (embeddings) in.embeddings = &vec.emplace(open(*embeddings));
        if (medic) in.medic = &lex.emplace(open(*medic));
        py::gil_scoped_release release;
        return train(config, std::move(in));
      },
      py::arg("config"), py::arg("train"), py::arg("embeddings") = py::none(),
      py::arg("medic") = py::none(), py::arg("dev") = std::vector<Document>{});
}
