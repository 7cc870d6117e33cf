#include <doctest.h>

#include <sstream>

#include "amelnav/nn/adam.hpp"
#include "amelnav/nn/cost.hpp"
#include "amelnav/nn/gaussian.hpp"
#include "amelnav/nn/mlp.hpp"
#include "test_util.hpp"

using namespace amelnav;
using namespace amelnav::nn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("identity single layer is the identity map") {
  RandomEngine rng(1);
  Mlp net(MlpSpec::dense({3, 3}, Activation::None, Activation::None), rng);
  net.params().weights[0] = MatrixXd::Identity(3, 3);
  net.params().biases[0].setZero();
  const VectorXd x = (VectorXd(3) << 0.3, -1.2, 2.5).finished();
  CHECK((net.forward(x) - x).norm() == doctest::Approx(0.0));
}

TEST_CASE("layer norm maps constant inputs to the shift") {
  RandomEngine rng(2);
  Mlp net(MlpSpec::dense({4, 4}, Activation::None, Activation::None, true), rng);
  net.params().weights[0] = MatrixXd::Identity(4, 4);
  net.params().biases[0].setConstant(3.7);  // constant pre-LN vector
  const VectorXd out = net.forward(VectorXd::Zero(4));
  CHECK(out.norm() == doctest::Approx(0.0));
}

TEST_CASE("layer norm output has zero mean per sample before the affine") {
  RandomEngine rng(3);
  Mlp net(MlpSpec::dense({6, 8}, Activation::LeakyReLU, Activation::None, true), rng);
  const MatrixXd x = testutil::random_matrix(6, 5, rng);
  const MatrixXd out = net.forward(x);  // gain 1, shift 0 at init
  for (int i = 0; i < 5; ++i) CHECK(std::abs(out.col(i).mean()) < 1e-6);
}

TEST_CASE("tanh outputs stay strictly inside (-1, 1)") {
  RandomEngine rng(4);
  Mlp net(MlpSpec::dense({5, 16, 7}, Activation::LeakyReLU, Activation::Tanh), rng);
  const MatrixXd out = net.forward(10.0 * testutil::random_matrix(5, 32, rng));
  CHECK((out.array().abs() < 1.0).all());
}

TEST_CASE("batched forward equals stacked per-sample forwards") {
  RandomEngine rng(5);
  Mlp net(MlpSpec::dense({4, 9, 3}, Activation::LeakyReLU, Activation::Tanh, true), rng);
  const MatrixXd x = testutil::random_matrix(4, 7, rng);
  const MatrixXd batch = net.forward(x);
  for (int i = 0; i < 7; ++i) {
    const VectorXd single = net.forward(x.col(i));
    CHECK((batch.col(i) - single).norm() < 1e-12);
  }
}

namespace {

// Loss <g, out> + 0.5*||out||^2 through a net rebuilt from flat parameters.
double net_loss(const MlpSpec& spec, const VectorXd& flat, const MatrixXd& x,
                const MatrixXd& g) {
  RandomEngine rng(0);
  Mlp net(spec, rng);
  net.params().unflatten(flat);
  const MatrixXd out = net.forward(x);
  return (g.array() * out.array()).sum() + 0.5 * out.squaredNorm();
}

void check_backward(const MlpSpec& spec, std::uint64_t seed) {
  RandomEngine rng(seed);
  for (int trial = 0; trial < 25; ++trial) {
    Mlp net(spec, rng);
    MatrixXd x, g;
    // Keep pre-activations away from the LeakyReLU kink so the central
    // difference is valid.
    do {
      x = testutil::random_matrix(spec.input_dim(), 4, rng);
    } while (testutil::kink_margin(net, x) < 1e-3);
    g = testutil::random_matrix(spec.output_dim(), 4, rng);

    MlpCache cache;
    const MatrixXd out = net.forward(x, &cache);
    ParamSet grads = ParamSet::zeros(spec);
    const MatrixXd d_out = g + out;
    const MatrixXd d_in = net.backward(cache, d_out, &grads);

    const VectorXd theta = net.params().flatten();
    auto f = [&](const VectorXd& t) { return net_loss(spec, t, x, g); };
    const double worst =
        testutil::check_gradient(f, theta, grads.flatten(), rng, 10);
    CHECK(worst < 1e-4);

    // Input gradient against finite differences as well.
    for (int c = 0; c < 4; ++c) {
      const int r = rng.uniform_int(spec.input_dim());
      const int col = rng.uniform_int(4);
      MatrixXd xp = x, xm = x;
      xp(r, col) += 1e-5;
      xm(r, col) -= 1e-5;
      Mlp probe(spec, rng);
      probe.params().unflatten(theta);
      auto eval = [&](const MatrixXd& xx) {
        const MatrixXd o = probe.forward(xx);
        return (g.array() * o.array()).sum() + 0.5 * o.squaredNorm();
      };
      const double numeric = (eval(xp) - eval(xm)) / 2e-5;
      CHECK(testutil::rel_error(d_in(r, col), numeric) < 1e-4);
    }
  }
}

}  // namespace

TEST_CASE("backward matches finite differences for every layer type") {
  check_backward(MlpSpec::dense({3, 6, 2}, Activation::LeakyReLU, Activation::None), 10);
  check_backward(MlpSpec::dense({4, 5, 3}, Activation::Tanh, Activation::Tanh), 11);
  check_backward(MlpSpec::dense({3, 7, 4}, Activation::LeakyReLU, Activation::Tanh, true), 12);
  check_backward(MlpSpec::dense({5, 6, 6}, Activation::LeakyReLU, Activation::None,
                                false, OutputHead::MeanAndLogStd), 13);
}

TEST_CASE("zero output gradient yields zero parameter gradients") {
  RandomEngine rng(20);
  const auto spec = MlpSpec::dense({4, 8, 3}, Activation::LeakyReLU, Activation::Tanh, true);
  Mlp net(spec, rng);
  MlpCache cache;
  net.forward(testutil::random_matrix(4, 6, rng), &cache);
  ParamSet grads = ParamSet::zeros(spec);
  net.backward(cache, MatrixXd::Zero(3, 6), &grads);
  CHECK(grads.flatten().norm() == doctest::Approx(0.0));
}

TEST_CASE("gradient of a batch sum equals the sum of per-sample gradients") {
  RandomEngine rng(21);
  const auto spec = MlpSpec::dense({3, 5, 2}, Activation::LeakyReLU, Activation::None);
  Mlp net(spec, rng);
  const MatrixXd x = testutil::random_matrix(3, 5, rng);
  const MatrixXd g = testutil::random_matrix(2, 5, rng);

  MlpCache cache;
  net.forward(x, &cache);
  ParamSet batch_grads = ParamSet::zeros(spec);
  net.backward(cache, g, &batch_grads);

  ParamSet sum_grads = ParamSet::zeros(spec);
  for (int i = 0; i < 5; ++i) {
    MlpCache c;
    net.forward(x.col(i), &c);
    net.backward(c, g.col(i), &sum_grads);
  }
  CHECK((batch_grads.flatten() - sum_grads.flatten()).norm() < 1e-12);
}

TEST_CASE("adam first step has magnitude ~lr and is deterministic") {
  const auto spec = MlpSpec::dense({1, 1}, Activation::None, Activation::None);
  RandomEngine rng(30);
  Mlp net(spec, rng);
  ParamSet grads = ParamSet::zeros(spec);
  grads.weights[0](0, 0) = 0.5;

  AdamState opt(spec, {.lr = 1e-3});
  const double before = net.params().weights[0](0, 0);
  AdamState opt_clone = opt;
  Mlp net_clone = net;

  opt.step(net.params(), grads);
  const double delta = net.params().weights[0](0, 0) - before;
  CHECK(std::abs(std::abs(delta) - 1e-3) < 1e-6 * 1e-3);
  CHECK(delta < 0.0);  // descends against a positive gradient

  // Cloned state reproduces the identical update.
  opt_clone.step(net_clone.params(), grads);
  CHECK(net_clone.params().weights[0](0, 0) == net.params().weights[0](0, 0));
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  const auto spec = MlpSpec::dense({3, 4, 2}, Activation::LeakyReLU, Activation::None);
  RandomEngine rng(31);
  Mlp net(spec, rng);
  const VectorXd before = net.params().flatten();
  AdamState opt(spec, {});
  const ParamSet zero = ParamSet::zeros(spec);
  for (int i = 0; i < 50; ++i) opt.step(net.params(), zero);
  CHECK((net.params().flatten() - before).norm() == doctest::Approx(0.0));
}

TEST_CASE("adam skips non-finite gradients") {
  const auto spec = MlpSpec::dense({2, 2}, Activation::None, Activation::None);
  RandomEngine rng(32);
  Mlp net(spec, rng);
  const VectorXd before = net.params().flatten();
  ParamSet grads = ParamSet::zeros(spec);
  grads.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  AdamState opt(spec, {});
  CHECK_FALSE(opt.step(net.params(), grads));
  CHECK((net.params().flatten() - before).norm() == 0.0);
}

TEST_CASE("polyak mixing") {
  const auto spec = MlpSpec::dense({2, 2}, Activation::None, Activation::None);
  ParamSet target = ParamSet::zeros(spec);
  ParamSet online = ParamSet::zeros(spec);
  online.weights[0].setConstant(1.0);
  online.biases[0].setConstant(1.0);

  SUBCASE("mix 0.005") {
    polyak_update(target, online, 0.005);
    CHECK(target.weights[0](0, 0) == doctest::Approx(0.005));
  }
  SUBCASE("mix 1 is a hard copy") {
    polyak_update(target, online, 1.0);
    CHECK((target.flatten() - online.flatten()).norm() == 0.0);
  }
  SUBCASE("repeated updates contract geometrically") {
    const double mix = 0.25;
    const int k = 20;
    for (int i = 0; i < k; ++i) polyak_update(target, online, mix);
    const double expected_gap = std::pow(1.0 - mix, k);
    CHECK(std::abs((1.0 - target.weights[0](0, 0)) - expected_gap) < 1e-12);
  }
}

TEST_CASE("gaussian sampling") {
  SUBCASE("zero noise returns the mean") {
    const VectorXd mu = (VectorXd(3) << 0.2, -0.7, 1.5).finished();
    const auto s = gaussian_sample(mu, VectorXd::Zero(3), VectorXd::Zero(3));
    CHECK((s.value - mu).norm() == doctest::Approx(0.0));
  }
  SUBCASE("logstd clamp keeps the log-density finite") {
    const VectorXd mu = VectorXd::Zero(2);
    const VectorXd logstd = (VectorXd(2) << -500.0, 300.0).finished();
    const auto s = gaussian_sample(mu, logstd, VectorXd::Ones(2));
    CHECK(std::isfinite(s.log_density));
    CHECK(s.value[0] == doctest::Approx(std::exp(kLogStdMin)));
    CHECK(s.value[1] == doctest::Approx(std::exp(kLogStdMax)));
  }
  SUBCASE("empirical mean of 1e5 samples is close to mu") {
    RandomEngine rng(40);
    const double mu = 0.35, sigma = 0.8;
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += mu + sigma * rng.normal();
    const double err = std::abs(acc / n - mu);
    CHECK(err < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
  }
  SUBCASE("squashed log-density matches the direct change-of-variables form") {
    RandomEngine rng(41);
    for (int t = 0; t < 200; ++t) {
      const VectorXd mu = testutil::random_matrix(4, 1, rng);
      const VectorXd logstd = testutil::random_matrix(4, 1, rng);
      const VectorXd noise = testutil::random_matrix(4, 1, rng, 2.0);
      const auto s = gaussian_sample_squashed(mu, logstd, noise);
      const auto base = gaussian_sample(mu, logstd, noise);
      double direct = base.log_density;
      for (int i = 0; i < 4; ++i)
        direct -= std::log(1.0 - sq(std::tanh(base.value[i])));
      CHECK(testutil::rel_error(s.log_density, direct) < 1e-9);
      CHECK((s.value.array().abs() < 1.0).all());
    }
  }
}

TEST_CASE("cost counting reproduces the published vanilla model sizes") {
  // DQN: 18 inputs, [64, 64], 9 actions.
  const auto dqn = MlpSpec::dense({18, 64, 64, 9}, Activation::LeakyReLU,
                                  Activation::None);
  CHECK(count_cost(dqn).flops == 5824);
  CHECK(count_cost(dqn).params == 5961);

  // SAC evaluation path: actor (Gaussian head) plus one critic.
  const auto sac_actor = MlpSpec::dense({18, 256, 256, 8}, Activation::LeakyReLU,
                                        Activation::None, false,
                                        OutputHead::MeanAndLogStd);
  const auto sac_critic = MlpSpec::dense({22, 256, 256, 1}, Activation::LeakyReLU,
                                         Activation::None);
  CHECK(count_cost(sac_actor).flops + count_cost(sac_critic).flops == 143616);
  CHECK(count_cost(sac_actor).params + count_cost(sac_critic).params == 144649);

  // TD3 evaluation path.
  const auto td3_actor = MlpSpec::dense({18, 400, 300, 4}, Activation::LeakyReLU,
                                        Activation::Tanh);
  const auto td3_critic = MlpSpec::dense({22, 400, 300, 1}, Activation::LeakyReLU,
                                         Activation::None);
  CHECK(count_cost(td3_actor).flops + count_cost(td3_critic).flops == 257500);
  CHECK(count_cost(td3_actor).params + count_cost(td3_critic).params == 258905);
}

TEST_CASE("cost counting is additive over independent models") {
  RandomEngine rng(50);
  Mlp a(MlpSpec::dense({5, 8, 2}, Activation::LeakyReLU, Activation::None), rng);
  Mlp b(MlpSpec::dense({7, 3, 4}, Activation::Tanh, Activation::Tanh, true), rng);
  const auto ra = count_cost(a.spec());
  const auto rb = count_cost(b.spec());
  const auto combined = count_cost(std::vector<const Mlp*>{&a, &b});
  CHECK(combined.flops == ra.flops + rb.flops);
  CHECK(combined.params == ra.params + rb.params);
}

TEST_CASE("parameter checkpoints round-trip bit-exactly") {
  RandomEngine rng(60);
  const auto spec = MlpSpec::dense({6, 12, 4}, Activation::LeakyReLU,
                                   Activation::Tanh, true,
                                   OutputHead::MeanAndLogStd);
  Mlp net(spec, rng);
  std::stringstream ss;
  net.save(ss);
  const Mlp loaded = Mlp::load(ss);
  CHECK(loaded.spec() == net.spec());
  CHECK((loaded.params().flatten() - net.params().flatten()).norm() == 0.0);
  // Bitwise: re-serialize and compare bytes.
  std::stringstream ss2;
  loaded.save(ss2);
  CHECK(ss.str() == ss2.str());
}
