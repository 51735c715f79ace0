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

// Tape-based reverse-mode automatic differentiation over dense 64-bit
// tensors, plus the Adam optimizer.
//
// A Graph records every operation applied to its Vars. Parameters live
// outside the graph and are referenced, not copied: backward() accumulates
// directly into Parameter::grad, so one graph per sentence can be built and
// discarded while gradients pile up across a batch.
//
//   Graph g;
//   Var w = g.param(weights);
//   Var y = tanh(matvec(w, g.constant(x)));
//   g.backward(sum(y));

#ifndef DNER_AUTODIFF_H_
#define DNER_AUTODIFF_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dner {
class Rng;
}

namespace dner::ad {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }
  double item() const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  void fill(double v);
  std::string shape_str() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_str(const std::vector<std::size_t>& shape);

// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

using ParameterList = std::vector<Parameter*>;

void zero_grad(const ParameterList& params);
// L2 norm over the finite gradient entries of all parameters.
double grad_norm(const ParameterList& params);
// Rescales all gradients so their global norm is at most `max_norm`.
// Returns the norm before clipping.
double clip_grad_norm(const ParameterList& params, double max_norm);

class Graph;

class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  const std::vector<std::size_t>& shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Graph& graph() const { return *graph_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf whose gradient is kept on the node (read back through Var::grad).
  Var variable(Tensor value);
  // Leaf aliasing `p`; its gradient accumulates into p.grad.
  Var param(Parameter& p);

  // Records an op result. `backward` receives the graph and the result's
  // id and must accumulate into the inputs' gradients. Throws
  // NonFiniteError when `value` has NaN/Inf entries.
  Var emit(Tensor value, bool requires_grad, BackwardFn backward,
           const char* op);

  // Seeds d(loss)/d(loss) = 1 and propagates. Gradients on parameters are
  // added to, never reset.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const;
  // Gradient buffer of node `id`, allocated as zeros on first use.
  Tensor& grad(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// ---- operations ----------------------------------------------------------
// Shape mismatches throw ShapeError naming both shapes.

Var matmul(Var a, Var b);        // [m,k] x [k,n] -> [m,n]
Var matvec(Var w, Var x);        // [m,k] x [k] -> [m]
Var add(Var a, Var b);           // same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);           // elementwise
Var scale(Var a, double factor);
// Adds bias [r] to every column of [r,c] (broadcast over the sequence axis).
Var add_bias(Var m, Var bias);
Var sigmoid(Var a);
Var tanh(Var a);
Var concat(std::span<const Var> parts);  // vectors or scalars -> vector
Var slice(Var v, std::size_t offset, std::size_t length);
// Row `row` of a [rows, dim] parameter table; backward touches only that row.
Var lookup(Graph& g, Parameter& table, std::size_t row);
Var apply_mask(Var a, std::vector<double> mask);  // elementwise constant
// Inverted dropout. Identity when !training or rate == 0.
Var dropout(Var a, double rate, bool training, Rng& rng);
Var logsumexp(Var v);            // vector -> scalar
Var max(Var v);                  // vector -> scalar; gradient to argmax
Var pick(Var v, std::size_t i);  // flat (row-major) element -> scalar
Var sum(Var a);                  // any -> scalar
Var stack_columns(std::span<const Var> columns);  // n vectors [d] -> [d,n]
Var column(Var m, std::size_t j);

// Lowest index among the maxima.
std::size_t argmax(std::span<const double> v);
double logsumexp(std::span<const double> v);

// ---- optimizer -----------------------------------------------------------

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay = 0.9;       // multiplied into the rate once per epoch
  double clip_norm = 5.0;   // <= 0 disables clipping
};

// Adam with bias correction. Effective rate is
// learning_rate * decay^epoch.
class Adam {
 public:
  Adam(AdamConfig config, const ParameterList& params);

  // One update from the current gradients. Gradients are left intact.
  void step(std::size_t epoch);
  double effective_rate(std::size_t epoch) const;
  std::uint64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  ParameterList params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t steps_ = 0;
};

}  // namespace dner::ad

#endif  // DNER_AUTODIFF_H_
