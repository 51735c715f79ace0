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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "dner/autodiff.h"
#include "dner/errors.h"
#include "dner/gradcheck.h"
#include "dner/random.h"

using namespace dner;
using namespace dner::ad;

namespace {

Parameter random_param(const std::string& name, std::vector<std::size_t> shape,
                       Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.5, 1.5);
  return Parameter(name, std::move(t));
}

// Contracts an op output of any shape with fixed random weights so the
// scalar loss depends on every output entry.
Var contract(Var out, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(out.value().size());
  for (double& x : w) x = rng.uniform(-1.0, 1.0);
  return sum(apply_mask(out, w));
}

double max_error(const std::vector<GradCheckResult>& results) {
  double e = 0;
  for (const auto& r : results) e = std::max(e, r.max_rel_error);
  return e;
}

}  // namespace

TEST_CASE("analytic examples") {
  Graph g;
  CHECK(sigmoid(g.constant(Tensor::scalar(0.0))).value().item() == 0.5);
  CHECK(logsumexp(g.constant(Tensor::vector({0.0, 0.0}))).value().item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  Var a = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  Var b = g.constant(Tensor::matrix(3, 1, {1, 0, -1}));
  const Var ab = matmul(a, b);
  CHECK(ab.shape() == std::vector<std::size_t>{2, 1});
  CHECK(ab.value().data() == std::vector<double>{-2, -2});
}

TEST_CASE("backward examples") {
  {
    Graph g;
    Var x = g.variable(Tensor::scalar(3.0));
    g.backward(mul(x, x));
    CHECK(x.grad().item() == 6.0);
  }
  {
    Graph g;
    Var x = g.variable(Tensor::scalar(0.0));
    g.backward(sigmoid(x));
    CHECK(x.grad().item() == 0.25);
  }
  {
    Parameter used("used", Tensor::vector({1, 2}));
    Parameter unused("unused", Tensor::vector({3}));
    Graph g;
    g.param(unused);
    g.backward(sum(g.param(used)));
    CHECK(used.grad.data() == std::vector<double>{1, 1});
    CHECK(unused.grad.data() == std::vector<double>{0});
  }
}

TEST_CASE("shape and value errors") {
  Graph g;
  Var m = g.constant(Tensor({2, 3}));
  Var v = g.constant(Tensor({2}));
  CHECK_THROWS_WITH_AS(matvec(m, v), doctest::Contains("[2x3]"), ShapeError);
  CHECK_THROWS_AS(add(v, g.constant(Tensor({3}))), ShapeError);
  CHECK_THROWS_AS(g.backward(v), ShapeError);
  CHECK_THROWS_AS(mul(g.constant(Tensor::scalar(1e300)), g.constant(Tensor::scalar(1e300))),
                  NonFiniteError);
  Rng rng(1);
  CHECK_THROWS_AS(dropout(v, 1.0, true, rng), ConfigError);
  CHECK_THROWS_AS(pick(m, 6), ShapeError);
}

TEST_CASE("every op matches central differences") {
  Rng rng(11);
  Parameter a = random_param("a", {3, 4}, rng);
  Parameter b = random_param("b", {4, 2}, rng);
  Parameter x = random_param("x", {4}, rng);
  Parameter y = random_param("y", {4}, rng);
  Parameter bias = random_param("bias", {3}, rng);
  Parameter table = random_param("table", {5, 4}, rng);
  GradCheckOptions opt;

  const std::vector<std::pair<const char*, LossFn>> cases = {
      {"matmul", [&](Graph& g) { return contract(matmul(g.param(a), g.param(b)), 1); }},
      {"matvec", [&](Graph& g) { return contract(matvec(g.param(a), g.param(x)), 2); }},
      {"add", [&](Graph& g) { return contract(add(g.param(x), g.param(y)), 3); }},
      {"sub", [&](Graph& g) { return contract(sub(g.param(x), g.param(y)), 4); }},
      {"mul", [&](Graph& g) { return contract(mul(g.param(x), g.param(y)), 5); }},
      {"scale", [&](Graph& g) { return contract(scale(g.param(x), -2.5), 6); }},
      {"add_bias",
       [&](Graph& g) { return contract(add_bias(g.param(a), g.param(bias)), 7); }},
      {"sigmoid", [&](Graph& g) { return contract(sigmoid(g.param(a)), 8); }},
      {"tanh", [&](Graph& g) { return contract(tanh(g.param(a)), 9); }},
      {"concat",
       [&](Graph& g) {
         const Var parts[] = {g.param(x), pick(g.param(y), 2), g.param(bias)};
         return contract(concat(parts), 10);
       }},
      {"slice", [&](Graph& g) { return contract(slice(g.param(x), 1, 2), 11); }},
      {"lookup",
       [&](Graph& g) {
         return contract(add(lookup(g, table, 3), lookup(g, table, 3)), 12);
       }},
      {"logsumexp", [&](Graph& g) { return logsumexp(g.param(x)); }},
      {"max", [&](Graph& g) { return max(g.param(y)); }},
      {"pick", [&](Graph& g) { return pick(g.param(a), 7); }},
      {"sum", [&](Graph& g) { return sum(g.param(a)); }},
      {"stack_columns",
       [&](Graph& g) {
         const Var cols[] = {g.param(x), g.param(y), g.param(x)};
         return contract(stack_columns(cols), 13);
       }},
      {"column", [&](Graph& g) { return contract(column(g.param(a), 2), 14); }},
  };
  for (const auto& [name, loss] : cases) {
    INFO(name);
    const auto results =
        check_gradients(name, loss, {&a, &b, &x, &y, &bias, &table}, opt);
    CHECK(max_error(results) < 1e-6);
  }
}

TEST_CASE("composite five-parameter graph matches central differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto results = run_gradient_suite("autodiff", seed);
    CHECK(results.size() == 5);
    CHECK(max_error(results) < 1e-6);
  }
}

TEST_CASE("gradients accumulate across graphs") {
  Parameter p("p", Tensor::vector({1.0, -2.0}));
  for (int k = 0; k < 3; ++k) {
    Graph g;
    g.backward(sum(mul(g.param(p), g.param(p))));
  }
  CHECK(p.grad.data() == std::vector<double>{6.0, -12.0});
  zero_grad({&p});
  CHECK(p.grad.data() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("logsumexp is shift invariant and stable") {
  Rng rng(5);
  for (int c = 0; c < 100; ++c) {
    std::vector<double> v(1 + rng.below(8));
    for (double& x : v) x = rng.uniform(-50, 50);
    const double shift = rng.uniform(-500, 500);
    std::vector<double> w = v;
    for (double& x : w) x += shift;
    CHECK(std::abs(logsumexp(std::span<const double>(w)) -
                   (logsumexp(std::span<const double>(v)) + shift)) < 1e-10);
  }
  const std::vector<double> big = {1000.0, 1000.0};
  CHECK(logsumexp(std::span<const double>(big)) ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> with_ninf = {0.0, ninf};
  CHECK(logsumexp(std::span<const double>(with_ninf)) == 0.0);
}

TEST_CASE("argmax picks the lowest index on ties") {
  const std::vector<double> v = {1, 3, 3, 2};
  CHECK(argmax(std::span<const double>(v)) == 1);
}

TEST_CASE("dropout") {
  Rng rng(17);
  Graph g;
  Tensor ones({10000}, 1.0);
  Var x = g.constant(ones);
  CHECK(dropout(x, 0.0, true, rng).value() == ones);
  CHECK(dropout(x, 0.5, false, rng).value() == ones);
  const Tensor out = dropout(x, 0.5, true, rng).value();
  std::size_t zeros = 0;
  for (double v : out.data()) {
    if (v == 0.0) ++zeros;
    else CHECK(v == 2.0);
  }
  CHECK(std::abs(zeros / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("Adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Parameter p("p", Tensor::vector({1.0, 2.0}));
    Adam adam(AdamConfig{}, {&p});
    adam.step(0);
    CHECK(p.value.data() == std::vector<double>{1.0, 2.0});
  }
  SUBCASE("one step on x^2 descends") {
    Parameter p("x", Tensor::scalar(1.0));
    AdamConfig config;
    config.learning_rate = 0.1;
    Adam adam(config, {&p});
    Graph g;
    Var x = g.param(p);
    g.backward(mul(x, x));
    adam.step(0);
    CHECK(p.value.item() < 1.0);
    CHECK(p.value.item() == doctest::Approx(0.9).epsilon(1e-6));
  }
  SUBCASE("500 steps on (x-3)^2 converge") {
    Parameter p("x", Tensor::scalar(0.0));
    AdamConfig config;
    config.learning_rate = 0.05;
    config.decay = 1.0;
    Adam adam(config, {&p});
    for (int step = 0; step < 500; ++step) {
      zero_grad({&p});
      Graph g;
      Var d = sub(g.param(p), g.constant(Tensor::scalar(3.0)));
      g.backward(mul(d, d));
      adam.step(0);
    }
    CHECK(std::abs(p.value.item() - 3.0) < 1e-2);
    CHECK(adam.steps() == 500);
  }
  SUBCASE("rate decays per epoch") {
    Parameter p("x", Tensor::scalar(0.0));
    Adam adam(AdamConfig{}, {&p});
    CHECK(adam.effective_rate(0) == 0.001);
    CHECK(adam.effective_rate(2) == doctest::Approx(0.001 * 0.81).epsilon(1e-15));
  }
}

TEST_CASE("clip_grad_norm") {
  Parameter a("a", Tensor::vector({0, 0}));
  Parameter b("b", Tensor::vector({0}));
  a.grad.data() = {3, 0};
  b.grad.data() = {4};
  CHECK(grad_norm({&a, &b}) == 5.0);
  CHECK(clip_grad_norm({&a, &b}, 1.0) == 5.0);
  CHECK(grad_norm({&a, &b}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.grad[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(clip_grad_norm({&a, &b}, 10.0) == doctest::Approx(1.0));
  CHECK(a.grad[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("forward values and updates are deterministic") {
  auto run = [] {
    Rng rng(23);
    Parameter w = random_param("w", {4, 4}, rng);
    Parameter v = random_param("v", {4}, rng);
    Adam adam(AdamConfig{}, {&w, &v});
    std::vector<double> trace;
    for (int k = 0; k < 5; ++k) {
      zero_grad({&w, &v});
      Graph g;
      Var h = dropout(tanh(matvec(g.param(w), g.param(v))), 0.3, true, rng);
      Var loss = logsumexp(h);
      trace.push_back(loss.value().item());
      g.backward(loss);
      adam.step(k);
    }
    trace.insert(trace.end(), w.value.data().begin(), w.value.data().end());
    return trace;
  };
  CHECK(run() == run());
}
