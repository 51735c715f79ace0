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

#include "dner/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dner/errors.h"
#include "dner/random.h"

namespace dner::ad {
namespace {

std::size_t numel(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() +
                   " and " + b.shape_str());
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got shape " + t.shape_str());
  }
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Builds an elementwise unary op whose derivative is expressed through the
// output value.
template <typename F, typename DF>
Var unary(Var a, const char* op, F f, DF df_from_output) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id();
  return g.emit(std::move(y), g.requires_grad(ia),
                [ia, df_from_output](Graph& g, std::size_t self) {
                  const Tensor& out = g.value(self);
                  const Tensor& gy = g.grad(self);
                  Tensor& gx = g.grad(ia);
                  for (std::size_t i = 0; i < gx.size(); ++i) {
                    gx[i] += gy[i] * df_from_output(out[i]);
                  }
                },
                op);
}

}  // namespace

// ---- Tensor ----------------------------------------------------------------

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != numel(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + ad::shape_str(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str());
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_str() const { return ad::shape_str(shape_); }

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// ---- parameters ------------------------------------------------------------

void zero_grad(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

double grad_norm(const ParameterList& params) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad.data()) {
      if (std::isfinite(g)) sq += g * g;
    }
  }
  return std::sqrt(sq);
}

double clip_grad_norm(const ParameterList& params, double max_norm) {
  const double norm = grad_norm(params);
  if (max_norm > 0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad.data()) g *= factor;
    }
  }
  return norm;
}

// ---- Graph -----------------------------------------------------------------

const Tensor& Var::value() const { return graph_->value(id_); }
const Tensor& Var::grad() const { return graph_->grad(id_); }

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
  nodes_.push_back(Node{{}, {}, &p, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::emit(Tensor value, bool requires_grad, BackwardFn backward,
                const char* op) {
  if (!value.all_finite()) {
    throw NonFiniteError(std::string(op) + " produced a non-finite value");
  }
  nodes_.push_back(Node{std::move(value), {}, nullptr, requires_grad,
                        requires_grad ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Tensor& Graph::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (n.grad.shape() != value(id).shape() || n.grad.size() != value(id).size()) {
    n.grad = Tensor(value(id).shape());
  }
  return n.grad;
}

void Graph::backward(Var loss) {
  if (loss.value().size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     loss.value().shape_str());
  }
  grad(loss.id())[0] += 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
    n.backward(*this, id);
  }
}

// ---- operations ------------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = a.graph();
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank("matmul", A, 2);
  require_rank("matmul", B, 2);
  if (A.cols() != B.rows()) shape_error("matmul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.emit(
      std::move(C), g.requires_grad(ia) || g.requires_grad(ib),
      [ia, ib, m, k, n](Graph& g, std::size_t self) {
        const Tensor& gc = g.grad(self);
        if (g.requires_grad(ia)) {
          const Tensor& B = g.value(ib);
          Tensor& ga = g.grad(ia);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              for (std::size_t j = 0; j < n; ++j) s += gc.at(i, j) * B.at(p, j);
              ga.at(i, p) += s;
            }
        }
        if (g.requires_grad(ib)) {
          const Tensor& A = g.value(ia);
          Tensor& gb = g.grad(ib);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = A.at(i, p);
              for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += aip * gc.at(i, j);
            }
        }
      },
      "matmul");
}

Var matvec(Var w, Var x) {
  Graph& g = w.graph();
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  require_rank("matvec", W, 2);
  require_rank("matvec", X, 1);
  if (W.cols() != X.size()) shape_error("matvec", W, X);
  const std::size_t m = W.rows(), k = W.cols();
  Tensor y({m});
  const double* wd = W.data().data();
  const double* xd = X.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    const double* row = wd + i * k;
    for (std::size_t p = 0; p < k; ++p) s += row[p] * xd[p];
    y[i] = s;
  }
  const std::size_t iw = w.id(), ix = x.id();
  return g.emit(
      std::move(y), g.requires_grad(iw) || g.requires_grad(ix),
      [iw, ix, m, k](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        const Tensor& W = g.value(iw);
        const Tensor& X = g.value(ix);
        if (g.requires_grad(iw)) {
          double* gw = g.grad(iw).data().data();
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = gy[i];
            if (gi == 0.0) continue;
            double* row = gw + i * k;
            for (std::size_t p = 0; p < k; ++p) row[p] += gi * X[p];
          }
        }
        if (g.requires_grad(ix)) {
          Tensor& gx = g.grad(ix);
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = gy[i];
            if (gi == 0.0) continue;
            const double* row = W.data().data() + i * k;
            for (std::size_t p = 0; p < k; ++p) gx[p] += gi * row[p];
          }
        }
      },
      "matvec");
}

namespace {

template <typename F, typename GA, typename GB>
Var binary(Var a, Var b, const char* op, F f, GA grad_a, GB grad_b) {
  Graph& g = a.graph();
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) shape_error(op, A, B);
  Tensor y(A.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(A[i], B[i]);
  const std::size_t ia = a.id(), ib = b.id();
  return g.emit(std::move(y), g.requires_grad(ia) || g.requires_grad(ib),
                [ia, ib, grad_a, grad_b](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  const Tensor& A = g.value(ia);
                  const Tensor& B = g.value(ib);
                  if (g.requires_grad(ia)) {
                    Tensor& ga = g.grad(ia);
                    for (std::size_t i = 0; i < ga.size(); ++i)
                      ga[i] += gy[i] * grad_a(A[i], B[i]);
                  }
                  if (g.requires_grad(ib)) {
                    Tensor& gb = g.grad(ib);
                    for (std::size_t i = 0; i < gb.size(); ++i)
                      gb[i] += gy[i] * grad_b(A[i], B[i]);
                  }
                },
                op);
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var scale(Var a, double factor) {
  Graph& g = a.graph();
  Tensor y = a.value();
  for (double& v : y.data()) v *= factor;
  const std::size_t ia = a.id();
  return g.emit(std::move(y), g.requires_grad(ia),
                [ia, factor](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  Tensor& ga = g.grad(ia);
                  for (std::size_t i = 0; i < ga.size(); ++i)
                    ga[i] += gy[i] * factor;
                },
                "scale");
}

Var add_bias(Var m, Var bias) {
  Graph& g = m.graph();
  const Tensor& M = m.value();
  const Tensor& b = bias.value();
  require_rank("add_bias", M, 2);
  require_rank("add_bias", b, 1);
  if (M.rows() != b.size()) shape_error("add_bias", M, b);
  Tensor y = M;
  for (std::size_t r = 0; r < M.rows(); ++r)
    for (std::size_t c = 0; c < M.cols(); ++c) y.at(r, c) += b[r];
  const std::size_t im = m.id(), ib = bias.id();
  return g.emit(std::move(y), g.requires_grad(im) || g.requires_grad(ib),
                [im, ib](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  if (g.requires_grad(im)) {
                    Tensor& gm = g.grad(im);
                    for (std::size_t i = 0; i < gm.size(); ++i) gm[i] += gy[i];
                  }
                  if (g.requires_grad(ib)) {
                    Tensor& gb = g.grad(ib);
                    for (std::size_t r = 0; r < gy.rows(); ++r)
                      for (std::size_t c = 0; c < gy.cols(); ++c)
                        gb[r] += gy.at(r, c);
                  }
                },
                "add_bias");
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid", [](double x) { return stable_sigmoid(x); },
      [](double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double y) { return 1.0 - y * y; });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Graph& g = parts.front().graph();
  std::vector<double> out;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.value().rank() > 1) require_rank("concat", p.value(), 1);
    offsets.push_back(out.size());
    ids.push_back(p.id());
    rg = rg || g.requires_grad(p.id());
    out.insert(out.end(), p.value().data().begin(), p.value().data().end());
  }
  return g.emit(Tensor::vector(std::move(out)), rg,
                [ids, offsets](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  for (std::size_t k = 0; k < ids.size(); ++k) {
                    if (!g.requires_grad(ids[k])) continue;
                    Tensor& gp = g.grad(ids[k]);
                    for (std::size_t i = 0; i < gp.size(); ++i)
                      gp[i] += gy[offsets[k] + i];
                  }
                },
                "concat");
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  Graph& g = v.graph();
  const Tensor& x = v.value();
  require_rank("slice", x, 1);
  if (offset + length > x.size()) {
    throw ShapeError("slice [" + std::to_string(offset) + ", +" +
                     std::to_string(length) + ") out of range for shape " +
                     x.shape_str());
  }
  std::vector<double> out(x.data().begin() + offset,
                          x.data().begin() + offset + length);
  const std::size_t iv = v.id();
  return g.emit(Tensor::vector(std::move(out)), g.requires_grad(iv),
                [iv, offset](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  Tensor& gx = g.grad(iv);
                  for (std::size_t i = 0; i < gy.size(); ++i)
                    gx[offset + i] += gy[i];
                },
                "slice");
}

Var lookup(Graph& g, Parameter& table, std::size_t row) {
  const Tensor& T = table.value;
  require_rank("lookup", T, 2);
  if (row >= T.rows()) {
    throw ShapeError("lookup row " + std::to_string(row) +
                     " out of range for table " + T.shape_str());
  }
  const std::size_t dim = T.cols();
  std::vector<double> out(T.data().begin() + row * dim,
                          T.data().begin() + (row + 1) * dim);
  if (table.grad.shape() != T.shape()) table.grad = Tensor(T.shape());
  Parameter* p = &table;
  return g.emit(Tensor::vector(std::move(out)), true,
                [p, row, dim](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  double* gt = p->grad.data().data() + row * dim;
                  for (std::size_t i = 0; i < dim; ++i) gt[i] += gy[i];
                },
                "lookup");
}

Var apply_mask(Var a, std::vector<double> mask) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  if (mask.size() != x.size()) {
    throw ShapeError("apply_mask: mask of length " +
                     std::to_string(mask.size()) + " for shape " +
                     x.shape_str());
  }
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  const std::size_t ia = a.id();
  return g.emit(std::move(y), g.requires_grad(ia),
                [ia, mask = std::move(mask)](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  Tensor& ga = g.grad(ia);
                  for (std::size_t i = 0; i < ga.size(); ++i)
                    ga[i] += gy[i] * mask[i];
                },
                "apply_mask");
}

Var dropout(Var a, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " +
                      std::to_string(rate));
  }
  if (!training || rate == 0.0) return a;
  const double keep = 1.0 / (1.0 - rate);
  std::vector<double> mask(a.value().size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep;
  return apply_mask(a, std::move(mask));
}

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Var logsumexp(Var v) {
  Graph& g = v.graph();
  const Tensor& x = v.value();
  require_rank("logsumexp", x, 1);
  if (x.size() == 0) throw ShapeError("logsumexp of an empty vector");
  const double y = logsumexp(x.data());
  const std::size_t iv = v.id();
  return g.emit(Tensor::scalar(y), g.requires_grad(iv),
                [iv](Graph& g, std::size_t self) {
                  const double gy = g.grad(self)[0];
                  const double out = g.value(self)[0];
                  const Tensor& x = g.value(iv);
                  Tensor& gx = g.grad(iv);
                  for (std::size_t i = 0; i < x.size(); ++i)
                    gx[i] += gy * std::exp(x[i] - out);
                },
                "logsumexp");
}

Var max(Var v) {
  Graph& g = v.graph();
  const Tensor& x = v.value();
  require_rank("max", x, 1);
  if (x.size() == 0) throw ShapeError("max of an empty vector");
  const std::size_t best = argmax(x.data());
  const std::size_t iv = v.id();
  return g.emit(Tensor::scalar(x[best]), g.requires_grad(iv),
                [iv, best](Graph& g, std::size_t self) {
                  g.grad(iv)[best] += g.grad(self)[0];
                },
                "max");
}

Var pick(Var v, std::size_t i) {
  Graph& g = v.graph();
  const Tensor& x = v.value();
  if (i >= x.size()) {
    throw ShapeError("pick index " + std::to_string(i) + " out of range for " +
                     x.shape_str());
  }
  const std::size_t iv = v.id();
  return g.emit(Tensor::scalar(x[i]), g.requires_grad(iv),
                [iv, i](Graph& g, std::size_t self) {
                  g.grad(iv)[i] += g.grad(self)[0];
                },
                "pick");
}

Var sum(Var a) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  const double s = std::accumulate(x.data().begin(), x.data().end(), 0.0);
  const std::size_t ia = a.id();
  return g.emit(Tensor::scalar(s), g.requires_grad(ia),
                [ia](Graph& g, std::size_t self) {
                  const double gy = g.grad(self)[0];
                  for (double& v : g.grad(ia).data()) v += gy;
                },
                "sum");
}

Var stack_columns(std::span<const Var> columns) {
  if (columns.empty()) throw ShapeError("stack_columns of zero vectors");
  Graph& g = columns.front().graph();
  const std::size_t d = columns.front().value().size();
  const std::size_t n = columns.size();
  Tensor y({d, n});
  std::vector<std::size_t> ids;
  bool rg = false;
  for (std::size_t j = 0; j < n; ++j) {
    const Tensor& c = columns[j].value();
    require_rank("stack_columns", c, 1);
    if (c.size() != d) shape_error("stack_columns", columns.front().value(), c);
    for (std::size_t i = 0; i < d; ++i) y.at(i, j) = c[i];
    ids.push_back(columns[j].id());
    rg = rg || g.requires_grad(columns[j].id());
  }
  return g.emit(std::move(y), rg,
                [ids, d](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  for (std::size_t j = 0; j < ids.size(); ++j) {
                    if (!g.requires_grad(ids[j])) continue;
                    Tensor& gc = g.grad(ids[j]);
                    for (std::size_t i = 0; i < d; ++i) gc[i] += gy.at(i, j);
                  }
                },
                "stack_columns");
}

Var column(Var m, std::size_t j) {
  Graph& g = m.graph();
  const Tensor& M = m.value();
  require_rank("column", M, 2);
  if (j >= M.cols()) {
    throw ShapeError("column " + std::to_string(j) + " out of range for " +
                     M.shape_str());
  }
  std::vector<double> out(M.rows());
  for (std::size_t i = 0; i < M.rows(); ++i) out[i] = M.at(i, j);
  const std::size_t im = m.id();
  return g.emit(Tensor::vector(std::move(out)), g.requires_grad(im),
                [im, j](Graph& g, std::size_t self) {
                  const Tensor& gy = g.grad(self);
                  Tensor& gm = g.grad(im);
                  for (std::size_t i = 0; i < gy.size(); ++i) gm.at(i, j) += gy[i];
                },
                "column");
}

// ---- Adam ------------------------------------------------------------------

Adam::Adam(AdamConfig config, const ParameterList& params)
    : config_(config), params_(params) {
  for (const Parameter* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

double Adam::effective_rate(std::size_t epoch) const {
  return config_.learning_rate *
         std::pow(config_.decay, static_cast<double>(epoch));
}

void Adam::step(std::size_t epoch) {
  ++steps_;
  const double lr = effective_rate(epoch);
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    std::vector<double>& w = params_[k]->value.data();
    const std::vector<double>& grad = params_[k]->grad.data();
    std::vector<double>& m = m_[k];
    std::vector<double>& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = grad[i];
      // Masked entries (e.g. -inf transitions) carry no gradient.
      if (!std::isfinite(w[i]) || !std::isfinite(gi)) continue;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace dner::ad
