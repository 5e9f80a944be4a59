#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "wavegraph/adam.hpp"
#include "wavegraph/error.hpp"
#include "wavegraph/gradcheck.hpp"
#include "wavegraph/layers.hpp"
#include "wavegraph/ops.hpp"

using namespace wavegraph;
using wavegraph::testing::random_tensor;

TEST_CASE("dense_forward examples") {
  SUBCASE("identity layer with W = I, b = 0 passes input through") {
    DenseLayer layer(Tensor({2, 2}, {1, 0, 0, 1}, true), Tensor::zeros({1, 2}, true),
                     Activation::identity);
    const auto y = layer.forward(Tensor({1, 2}, {1, 2}));
    CHECK(y.at(0, 0) == 1.0);
    CHECK(y.at(0, 1) == 2.0);
  }
  SUBCASE("sigmoid of zero pre-activation is one half") {
    DenseLayer layer(Tensor::zeros({3, 4}, true), Tensor::zeros({1, 4}, true),
                     Activation::sigmoid);
    const auto y = layer.forward(Tensor({2, 3}, {1, 2, 3, -4, 5, 6}));
    for (double v : y.values()) CHECK(v == 0.5);
  }
  SUBCASE("elu of [-1, 0, 1]") {
    DenseLayer layer(Tensor({1, 3}, {-1, 0, 1}, true), Tensor::zeros({1, 3}, true),
                     Activation::elu);
    const auto y = layer.forward(Tensor({1, 1}, {1}));
    CHECK(y.at(0, 0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
    CHECK(y.at(0, 1) == 0.0);
    CHECK(y.at(0, 2) == 1.0);
  }
  SUBCASE("input width mismatch is rejected") {
    Rng rng(1);
    DenseLayer layer(3, 2, Activation::tanh, rng);
    CHECK_THROWS_AS(layer.forward(Tensor::zeros({1, 2})), InvalidInput);
  }
}

TEST_CASE("glorot initialization stays in bounds and biases start at zero") {
  Rng rng(3);
  DenseLayer layer(10, 5, Activation::tanh, rng);
  const double bound = std::sqrt(6.0 / 15.0);
  for (double w : layer.weight().values()) CHECK(std::abs(w) <= bound);
  for (double b : layer.bias().values()) CHECK(b == 0.0);
  CHECK(layer.parameter_count() == 55);
}

TEST_CASE("softsign examples") {
  const auto y = softsign(Tensor({1, 3}, {0, 1, -3}));
  CHECK(y.at(0, 0) == 0.0);
  CHECK(y.at(0, 1) == 0.5);
  CHECK(y.at(0, 2) == -0.75);
}

TEST_CASE("cross entropy examples") {
  const auto one = Tensor::filled({1, 1}, 1.0);
  CHECK(bce_loss(Tensor({1, 1}, {0.5}), one, one).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const auto perfect = bce_loss(Tensor({1, 2}, {1.0, 0.0}), Tensor({1, 2}, {1, 0}),
                                Tensor::filled({1, 2}, 1.0));
  CHECK(perfect.item() >= 0.0);
  CHECK(perfect.item() <= 2e-12);
  const auto l = bce_loss(Tensor({1, 2}, {0.9, 0.1}), Tensor({1, 2}, {1, 0}),
                          Tensor::filled({1, 2}, 1.0));
  CHECK(l.item() == doctest::Approx(-std::log(0.9)).epsilon(1e-14));
  CHECK_THROWS_AS(bce_loss(Tensor({1, 1}, {0.5}), one, Tensor::zeros({1, 1})), InvalidInput);
}

TEST_CASE("mse examples") {
  const auto y = Tensor({1, 2}, {1, 3});
  const auto t = Tensor::zeros({1, 2});
  CHECK(mse_loss(y, y, Tensor::filled({1, 2}, 1.0)).item() == 0.0);
  CHECK(mse_loss(y, t, Tensor::filled({1, 2}, 1.0)).item() == 5.0);
  CHECK(mse_loss(y, t, Tensor({1, 2}, {1, 0})).item() == 1.0);
  CHECK_THROWS_AS(mse_loss(y, t, Tensor::zeros({1, 2})), InvalidInput);
}

TEST_CASE("backward examples") {
  SUBCASE("gradient of sum(x W) with respect to W broadcasts x") {
    auto w = Tensor({2, 3}, {1, 2, 3, 4, 5, 6}, true);
    const auto x = Tensor({1, 2}, {7, -2});
    backward(sum(matmul(x, w)));
    const std::vector<double> expect{7, 7, 7, -2, -2, -2};
    for (std::size_t i = 0; i < 6; ++i) CHECK(w.grad()[i] == expect[i]);
  }
  SUBCASE("d/dw sigmoid(w)^2 at w = 0 is 0.25") {
    auto w = Tensor({1, 1}, {0.0}, true);
    const auto s = sigmoid(w);
    backward(mul(s, s));
    CHECK(w.grad()[0] == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("a tape can only be consumed once") {
    auto w = Tensor({1, 1}, {0.3}, true);
    const auto loss = sum(tanh(w));
    backward(loss);
    CHECK_THROWS_AS(backward(loss), InvalidInput);
  }
  SUBCASE("detached losses are rejected") {
    CHECK_THROWS_AS(backward(sum(Tensor({1, 1}, {1.0}))), InvalidInput);
  }
  SUBCASE("parameters accumulate across tapes") {
    auto w = Tensor({1, 1}, {2.0}, true);
    backward(scale(w, 3.0));
    backward(scale(w, 3.0));
    CHECK(w.grad()[0] == 6.0);
  }
  SUBCASE("no tape is recorded under NoGradGuard") {
    auto w = Tensor({1, 1}, {2.0}, true);
    NoGradGuard guard;
    CHECK_FALSE(scale(w, 2.0).requires_grad());
  }
}

namespace {

using OpFactory = std::function<Tensor(const std::vector<Tensor>&)>;

struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  OpFactory build;
  double lo = -1.5;
  double hi = 1.5;
};

// Reduces an op output to a scalar with fixed random weights so that every
// output element contributes a distinct gradient.
Tensor reduce(const Tensor& y, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(y, random_tensor(y.shape(), rng, -1.0, 1.0, false)));
}

}  // namespace

TEST_CASE("every op matches central differences on 20 seeds") {
  const Index idx{2, 0, 2, 1};
  const Index seg{0, 1, 1, 0, 1};
  const std::vector<OpCase> cases = {
      {"matmul", {{3, 4}, {4, 2}}, [](auto& t) { return matmul(t[0], t[1]); }},
      {"add", {{2, 3}, {2, 3}}, [](auto& t) { return add(t[0], t[1]); }},
      {"sub", {{2, 3}, {2, 3}}, [](auto& t) { return sub(t[0], t[1]); }},
      {"mul", {{2, 3}, {2, 3}}, [](auto& t) { return mul(t[0], t[1]); }},
      {"div", {{2, 3}, {2, 3}}, [](auto& t) { return div(t[0], t[1]); }, 0.5, 2.0},
      {"add_row", {{3, 2}, {1, 2}}, [](auto& t) { return add_row(t[0], t[1]); }},
      {"mul_row", {{3, 2}, {1, 2}}, [](auto& t) { return mul_row(t[0], t[1]); }},
      {"one_minus", {{2, 2}}, [](auto& t) { return one_minus(t[0]); }},
      {"sigmoid", {{2, 3}}, [](auto& t) { return sigmoid(t[0]); }},
      {"tanh", {{2, 3}}, [](auto& t) { return tanh(t[0]); }},
      {"elu", {{2, 3}}, [](auto& t) { return elu(t[0]); }},
      {"softsign", {{2, 3}}, [](auto& t) { return softsign(t[0]); }},
      {"exp", {{2, 3}}, [](auto& t) { return exp(t[0]); }},
      {"concat_cols", {{2, 1}, {2, 3}}, [](auto& t) { return concat_cols(t); }},
      {"concat_rows", {{1, 3}, {2, 3}}, [](auto& t) { return concat_rows(t); }},
      {"gather_rows", {{3, 2}}, [idx](auto& t) { return gather_rows(t[0], idx); }},
      {"scatter_add_rows", {{4, 2}}, [idx](auto& t) { return scatter_add_rows(t[0], idx, 3); }},
      {"replace_rows",
       {{4, 2}, {2, 2}},
       [](auto& t) { return replace_rows(t[0], Index{3, 1}, t[1]); }},
      {"segment_softmax", {{5, 3}}, [seg](auto& t) { return segment_softmax(t[0], seg, 2); }},
      {"bce_loss",
       {{2, 3}},
       [](auto& t) {
         return bce_loss(t[0], Tensor({2, 3}, {1, 0, 1, 0, 0, 1}),
                         Tensor({2, 3}, {1, 1, 0, 1, 1, 1}));
       },
       0.05, 0.95},
      {"mse_loss",
       {{2, 3}},
       [](auto& t) {
         return mse_loss(t[0], Tensor({2, 3}, {1, 0, 1, 0, 0, 1}),
                         Tensor({2, 3}, {1, 1, 0, 1, 1, 1}));
       }},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed * 31 + 1);
      std::vector<Tensor> inputs;
      ParameterList params;
      for (std::size_t k = 0; k < c.shapes.size(); ++k) {
        inputs.push_back(random_tensor(c.shapes[k], rng, c.lo, c.hi));
        params.push_back({"in" + std::to_string(k), inputs.back()});
      }
      const auto report = grad_check([&] { return reduce(c.build(inputs), seed); }, params);
      CHECK(report.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("segment_softmax rows sum to one per segment and column") {
  Rng rng(5);
  const Index seg{0, 2, 2, 1, 2, 0};
  const auto a = segment_softmax(random_tensor({6, 4}, rng, -30.0, 30.0, false), seg, 3);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t c = 0; c < 4; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < seg.size(); ++i) {
        if (seg[i] == s) total += a.at(i, c);
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("segment_softmax equals exp followed by normalization") {
  Rng rng(9);
  const Index seg{0, 0, 1};
  const auto z = random_tensor({3, 2}, rng, -2.0, 2.0, false);
  const auto a = segment_softmax(z, seg, 2);
  const auto e = exp(z);
  for (std::size_t c = 0; c < 2; ++c) {
    const double d = e.at(0, c) + e.at(1, c);
    CHECK(a.at(0, c) == doctest::Approx(e.at(0, c) / d).epsilon(1e-14));
    CHECK(a.at(1, c) == doctest::Approx(e.at(1, c) / d).epsilon(1e-14));
    CHECK(a.at(2, c) == 1.0);
  }
}

TEST_CASE("forward evaluation is bit-deterministic") {
  auto run = [] {
    Rng rng(123);
    DenseLayer layer(4, 3, Activation::elu, rng);
    const auto x = random_tensor({5, 4}, rng, -1.0, 1.0, false);
    return wavegraph::testing::copy_values(softsign(layer.forward(x)));
  };
  CHECK(run() == run());
}

TEST_CASE("adam examples") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    auto w = Tensor({1, 2}, {0.3, -0.7}, true);
    Adam opt({{"w", w}});
    w.mutable_grad()[0] = 0.0;
    opt.step();
    CHECK(w.values()[0] == 0.3);
    CHECK(w.values()[1] == -0.7);
    CHECK(opt.steps() == 1);
  }
  SUBCASE("first step with unit gradient moves by the learning rate") {
    auto w = Tensor({1, 1}, {0.0}, true);
    Adam opt({{"w", w}}, AdamConfig{1e-3});
    w.mutable_grad()[0] = 1.0;
    opt.step();
    CHECK(w.values()[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  }
  SUBCASE("constant gradient gives monotone drift bounded by the learning rate") {
    auto w = Tensor({1, 1}, {0.0}, true);
    Adam opt({{"w", w}}, AdamConfig{1e-3});
    double prev = 0.0;
    for (int i = 0; i < 200; ++i) {
      w.mutable_grad()[0] = 0.5;
      opt.step();
      const double now = w.values()[0];
      CHECK(now < prev);
      CHECK(prev - now <= 1e-3 * (1.0 + 1e-9));
      prev = now;
    }
  }
  SUBCASE("non-finite gradient aborts the step") {
    auto w = Tensor({1, 2}, {1.0, 2.0}, true);
    Adam opt({{"w", w}});
    w.mutable_grad()[1] = std::nan("");
    CHECK_THROWS_AS(opt.step(), NumericError);
    CHECK(w.values()[0] == 1.0);
    CHECK(opt.steps() == 0);
  }
}

TEST_CASE("grad_check on an identity dense layer is exact") {
  Rng rng(11);
  DenseLayer layer(3, 2, Activation::identity, rng);
  ParameterList params;
  layer.collect("dense", params);
  const auto x = random_tensor({4, 3}, rng, -1.0, 1.0, false);
  const auto report = grad_check([&] { return sum(layer.forward(x)); }, params);
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-8);
}
