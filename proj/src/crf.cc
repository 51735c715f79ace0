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

#include "dner/crf.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <sstream>

#include "dner/errors.h"

namespace dner {
namespace {

using ad::Tensor;
using ad::Var;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_pair(const Tensor& s, const Tensor& tr) {
  if (s.rank() != 2 || s.rows() == 0 || s.cols() == 0) {
    throw ShapeError("emission matrix must be [T x m] with T, m >= 1, got " +
                     s.shape_str());
  }
  const std::size_t n = s.rows() + 2;
  if (tr.rank() != 2 || tr.rows() != n || tr.cols() != n) {
    throw ShapeError("transition matrix " + tr.shape_str() +
                     " does not match emissions " + s.shape_str());
  }
}

void check_path(const Tensor& s, std::span<const std::size_t> path) {
  if (path.size() != s.cols()) {
    throw ShapeError("tag path of length " + std::to_string(path.size()) +
                     " for " + std::to_string(s.cols()) + " positions");
  }
  for (std::size_t y : path) {
    if (y >= s.rows()) {
      throw TagError("tag index " + std::to_string(y) + " outside 0.." +
                     std::to_string(s.rows() - 1));
    }
  }
}

// alpha[t][j]: log-sum of all prefixes ending in tag j at position t.
std::vector<std::vector<double>> forward_scores(const Tensor& s,
                                                const Tensor& tr) {
  const std::size_t T = s.rows(), m = s.cols(), start = start_state(T);
  std::vector<std::vector<double>> alpha(m, std::vector<double>(T));
  std::vector<double> buf(T);
  for (std::size_t j = 0; j < T; ++j) alpha[0][j] = tr.at(start, j) + s.at(j, 0);
  for (std::size_t t = 1; t < m; ++t) {
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t i = 0; i < T; ++i) buf[i] = alpha[t - 1][i] + tr.at(i, j);
      alpha[t][j] = ad::logsumexp(buf) + s.at(j, t);
    }
  }
  return alpha;
}

// beta[t][i]: log-sum of all suffixes after position t given tag i at t.
std::vector<std::vector<double>> backward_scores(const Tensor& s,
                                                 const Tensor& tr) {
  const std::size_t T = s.rows(), m = s.cols(), stop = stop_state(T);
  std::vector<std::vector<double>> beta(m, std::vector<double>(T));
  std::vector<double> buf(T);
  for (std::size_t i = 0; i < T; ++i) beta[m - 1][i] = tr.at(i, stop);
  for (std::size_t t = m - 1; t-- > 0;) {
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t j = 0; j < T; ++j) {
        buf[j] = tr.at(i, j) + s.at(j, t + 1) + beta[t + 1][j];
      }
      beta[t][i] = ad::logsumexp(buf);
    }
  }
  return beta;
}

double finish(const std::vector<double>& last, const Tensor& tr) {
  const std::size_t T = last.size(), stop = stop_state(T);
  std::vector<double> buf(T);
  for (std::size_t j = 0; j < T; ++j) buf[j] = last[j] + tr.at(j, stop);
  return ad::logsumexp(buf);
}

double parse_number(const std::string& field, std::size_t lineno) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || std::isnan(v)) {
    throw ParseError("bad score '" + field + "'", lineno);
  }
  return v;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

Tensor make_transitions(std::size_t n_tags) {
  const std::size_t n = n_tags + 2;
  Tensor tr({n, n});
  const std::size_t start = start_state(n_tags), stop = stop_state(n_tags);
  for (std::size_t k = 0; k < n; ++k) {
    tr.at(k, start) = kNegInf;
    tr.at(stop, k) = kNegInf;
  }
  tr.at(start, stop) = kNegInf;
  return tr;
}

void mask_transitions(Tensor& tr, const TagInventory& inventory) {
  const std::size_t T = inventory.size();
  if (tr.rows() != T + 2) {
    throw ShapeError("transition matrix " + tr.shape_str() + " for " +
                     std::to_string(T) + " tags");
  }
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = 0; j < T; ++j) {
      if (!inventory.transition_allowed(i, j)) tr.at(i, j) = kNegInf;
    }
    if (!inventory.start_allowed(i)) tr.at(start_state(T), i) = kNegInf;
    if (!inventory.stop_allowed(i)) tr.at(i, stop_state(T)) = kNegInf;
  }
}

EmissionProjection EmissionProjection::init(std::size_t n_tags,
                                            std::size_t input, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(n_tags + input));
  Tensor w({n_tags, input});
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return EmissionProjection{ad::Parameter("proj.weight", std::move(w)),
                            ad::Parameter("proj.bias", Tensor({n_tags}))};
}

Var project(Var weight, Var bias, std::span<const Var> contextual) {
  return ad::add_bias(ad::matmul(weight, ad::stack_columns(contextual)), bias);
}

double global_score(const Tensor& s, const Tensor& tr,
                    std::span<const std::size_t> path) {
  check_pair(s, tr);
  check_path(s, path);
  const std::size_t T = s.rows();
  double score = tr.at(start_state(T), path[0]);
  for (std::size_t t = 0; t < path.size(); ++t) {
    score += s.at(path[t], t);
    const std::size_t next =
        t + 1 < path.size() ? path[t + 1] : stop_state(T);
    score += tr.at(path[t], next);
  }
  return score;
}

double log_partition(const Tensor& s, const Tensor& tr) {
  check_pair(s, tr);
  return finish(forward_scores(s, tr).back(), tr);
}

Var nll_loss(Var s_var, Var tr_var, std::span<const std::size_t> gold) {
  ad::Graph& g = s_var.graph();
  const Tensor& s = s_var.value();
  const Tensor& tr = tr_var.value();
  check_pair(s, tr);
  check_path(s, gold);
  const double value = log_partition(s, tr) - global_score(s, tr, gold);
  const std::size_t is = s_var.id(), itr = tr_var.id();
  TagPath path(gold.begin(), gold.end());
  return g.emit(
      Tensor::scalar(value), g.requires_grad(is) || g.requires_grad(itr),
      [is, itr, path](ad::Graph& g, std::size_t self) {
        const double up = g.grad(self)[0];
        const Tensor& s = g.value(is);
        const Tensor& tr = g.value(itr);
        const std::size_t T = s.rows(), m = s.cols();
        const std::size_t start = start_state(T), stop = stop_state(T);
        const auto alpha = forward_scores(s, tr);
        const auto beta = backward_scores(s, tr);
        const double log_z = finish(alpha.back(), tr);
        if (g.requires_grad(is)) {
          Tensor& gs = g.grad(is);
          for (std::size_t t = 0; t < m; ++t) {
            for (std::size_t j = 0; j < T; ++j) {
              gs.at(j, t) += up * std::exp(alpha[t][j] + beta[t][j] - log_z);
            }
            gs.at(path[t], t) -= up;
          }
        }
        if (g.requires_grad(itr)) {
          Tensor& gtr = g.grad(itr);
          for (std::size_t j = 0; j < T; ++j) {
            gtr.at(start, j) += up * std::exp(alpha[0][j] + beta[0][j] - log_z);
            gtr.at(j, stop) +=
                up * std::exp(alpha[m - 1][j] + beta[m - 1][j] - log_z);
          }
          for (std::size_t t = 0; t + 1 < m; ++t) {
            for (std::size_t i = 0; i < T; ++i) {
              for (std::size_t j = 0; j < T; ++j) {
                const double lp = alpha[t][i] + tr.at(i, j) + s.at(j, t + 1) +
                                  beta[t + 1][j] - log_z;
                gtr.at(i, j) += up * std::exp(lp);
              }
            }
          }
          gtr.at(start, path[0]) -= up;
          for (std::size_t t = 0; t + 1 < m; ++t) {
            gtr.at(path[t], path[t + 1]) -= up;
          }
          gtr.at(path[m - 1], stop) -= up;
        }
      },
      "nll_loss");
}

Var nll_loss_composite(Var s, Var tr, std::span<const std::size_t> gold) {
  check_pair(s.value(), tr.value());
  check_path(s.value(), gold);
  const std::size_t T = s.value().rows(), m = s.value().cols(), n = T + 2;
  const std::size_t start = start_state(T), stop = stop_state(T);
  const auto trans = [&](std::size_t i, std::size_t j) {
    return ad::pick(tr, i * n + j);
  };
  const auto emit = [&](std::size_t j, std::size_t t) {
    return ad::pick(s, j * m + t);
  };
  std::vector<Var> alpha(T);
  for (std::size_t j = 0; j < T; ++j) alpha[j] = ad::add(trans(start, j), emit(j, 0));
  for (std::size_t t = 1; t < m; ++t) {
    std::vector<Var> next(T);
    for (std::size_t j = 0; j < T; ++j) {
      std::vector<Var> terms(T);
      for (std::size_t i = 0; i < T; ++i) terms[i] = ad::add(alpha[i], trans(i, j));
      next[j] = ad::add(ad::logsumexp(ad::concat(terms)), emit(j, t));
    }
    alpha = std::move(next);
  }
  std::vector<Var> last(T);
  for (std::size_t j = 0; j < T; ++j) last[j] = ad::add(alpha[j], trans(j, stop));
  Var log_z = ad::logsumexp(ad::concat(last));

  Var score = trans(start, gold[0]);
  for (std::size_t t = 0; t < m; ++t) {
    score = ad::add(score, emit(gold[t], t));
    score = ad::add(score, trans(gold[t], t + 1 < m ? gold[t + 1] : stop));
  }
  return ad::sub(log_z, score);
}

Var local_loss(Var s, std::span<const std::size_t> gold) {
  check_path(s.value(), gold);
  const std::size_t m = s.value().cols();
  std::vector<Var> terms;
  terms.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    Var col = ad::column(s, t);
    terms.push_back(ad::sub(ad::logsumexp(col), ad::pick(col, gold[t])));
  }
  return ad::scale(ad::sum(ad::concat(terms)), 1.0 / static_cast<double>(m));
}

TagPath viterbi_decode(const Tensor& s, const Tensor& tr) {
  check_pair(s, tr);
  const std::size_t T = s.rows(), m = s.cols();
  std::vector<double> delta(T), next(T), buf(T);
  std::vector<std::vector<std::size_t>> back(m, std::vector<std::size_t>(T));
  for (std::size_t j = 0; j < T; ++j) {
    delta[j] = tr.at(start_state(T), j) + s.at(j, 0);
  }
  for (std::size_t t = 1; t < m; ++t) {
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t i = 0; i < T; ++i) buf[i] = delta[i] + tr.at(i, j);
      const std::size_t best = ad::argmax(buf);
      back[t][j] = best;
      next[j] = buf[best] + s.at(j, t);
    }
    delta.swap(next);
  }
  for (std::size_t j = 0; j < T; ++j) buf[j] = delta[j] + tr.at(j, stop_state(T));
  TagPath path(m);
  path[m - 1] = ad::argmax(buf);
  for (std::size_t t = m - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  return path;
}

TagPath local_decode(const Tensor& s) {
  if (s.rank() != 2 || s.rows() == 0) {
    throw ShapeError("emission matrix must be [T x m], got " + s.shape_str());
  }
  TagPath path(s.cols());
  std::vector<double> col(s.rows());
  for (std::size_t t = 0; t < s.cols(); ++t) {
    for (std::size_t j = 0; j < s.rows(); ++j) col[j] = s.at(j, t);
    path[t] = ad::argmax(col);
  }
  return path;
}

std::string CrfFixture::path_string(std::span<const std::size_t> path) const {
  std::string out = "(";
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (t) out += ",";
    out += tags.at(path[t]);
  }
  return out + ")";
}

CrfFixture parse_fixture(std::istream& in) {
  CrfFixture fx;
  enum class Section { kNone, kEmissions, kTransitions } section =
      Section::kNone;
  std::vector<std::vector<double>> emission_rows;
  std::vector<bool> emission_seen;
  std::vector<bool> transition_seen;
  const auto tag_index = [&](const std::string& name, std::size_t lineno) {
    auto it = std::find(fx.tags.begin(), fx.tags.end(), name);
    if (it == fx.tags.end()) throw ParseError("unknown tag '" + name + "'", lineno);
    return static_cast<std::size_t>(it - fx.tags.begin());
  };
  const auto need_header = [&](std::size_t lineno) {
    if (fx.tags.empty() || fx.tokens.empty()) {
      throw ParseError("'tags' and 'tokens' must come first", lineno);
    }
    if (fx.emissions.size() == 0) {
      const std::size_t T = fx.tags.size();
      fx.emissions = Tensor({T, fx.tokens.size()});
      fx.transitions = make_transitions(T);
      emission_seen.assign(T, false);
      transition_seen.assign(T + 1, false);
    }
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto w = words(line);
    if (w.empty() || w[0].front() == '#') continue;
    const std::string& key = w[0];
    if (key == "tags") {
      fx.tags.assign(w.begin() + 1, w.end());
    } else if (key == "tokens") {
      fx.tokens.assign(w.begin() + 1, w.end());
    } else if (key == "emissions") {
      need_header(lineno);
      section = Section::kEmissions;
    } else if (key == "transitions") {
      need_header(lineno);
      section = Section::kTransitions;
    } else if (key == "path") {
      need_header(lineno);
      TagPath p;
      for (std::size_t k = 1; k < w.size(); ++k) p.push_back(tag_index(w[k], lineno));
      if (p.size() != fx.tokens.size()) {
        throw ParseError("path length differs from token count", lineno);
      }
      fx.paths.push_back(std::move(p));
    } else if (section == Section::kEmissions) {
      const std::size_t row = tag_index(key, lineno);
      if (w.size() != fx.tokens.size() + 1) {
        throw ParseError("emission row needs one score per token", lineno);
      }
      for (std::size_t t = 0; t < fx.tokens.size(); ++t) {
        fx.emissions.at(row, t) = parse_number(w[t + 1], lineno);
      }
      emission_seen[row] = true;
    } else if (section == Section::kTransitions) {
      const std::size_t T = fx.tags.size();
      const std::size_t row =
          key == "START" ? start_state(T) : tag_index(key, lineno);
      if (w.size() != T + 2) {
        throw ParseError("transition row needs " + std::to_string(T + 1) +
                             " scores (tags then STOP)",
                         lineno);
      }
      for (std::size_t j = 0; j <= T; ++j) {
        const std::size_t col = j < T ? j : stop_state(T);
        if (row == start_state(T) && col == stop_state(T)) continue;
        fx.transitions.at(row, col) = parse_number(w[j + 1], lineno);
      }
      transition_seen[row == start_state(T) ? T : row] = true;
    } else {
      throw ParseError("unexpected line '" + key + "'", lineno);
    }
  }
  if (fx.emissions.size() == 0) throw ParseError("fixture has no score tables");
  for (std::size_t k = 0; k < emission_seen.size(); ++k) {
    if (!emission_seen[k]) throw ParseError("missing emission row " + fx.tags[k]);
  }
  for (std::size_t k = 0; k < transition_seen.size(); ++k) {
    if (!transition_seen[k]) {
      throw ParseError("missing transition row " +
                       (k < fx.tags.size() ? fx.tags[k] : std::string("START")));
    }
  }
  return fx;
}

}  // namespace dner
