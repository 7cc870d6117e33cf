#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amelnav/harness/agent_stack.hpp"
#include "amelnav/srl/amelpred.hpp"
#include "grad_suite.hpp"

using namespace amelnav;
using namespace amelnav::srl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SrlConfig small_config(SrlVariant variant) {
  SrlConfig cfg;
  cfg.variant = variant;
  cfg.latent_dim = 4;
  cfg.hidden = 8;
  return cfg;
}

}  // namespace

TEST_CASE("deterministic encoding is bounded and repeatable") {
  AmelPred model(small_config(SrlVariant::Det), 5, 2, 1);
  RandomEngine rng(2);
  for (int i = 0; i < 100; ++i) {
    const VectorXd obs = testutil::random_matrix(5, 1, rng, 3.0);
    const VectorXd z1 = model.encode(obs, false);
    const VectorXd z2 = model.encode(obs, true);
    CHECK((z1 - z2).norm() == 0.0);  // no sampling in the deterministic path
    CHECK((z1.array().abs() < 1.0).all());
  }
}

TEST_CASE("stochastic encoding with zero noise is tanh of the mean") {
  AmelPred model(small_config(SrlVariant::Sto), 5, 2, 3);
  RandomEngine rng(4);
  const MatrixXd obs = testutil::random_matrix(5, 3, rng);
  const auto enc = model.encode_with_noise(obs, MatrixXd::Zero(4, 3));
  CHECK((enc.z - enc.mu.array().tanh().matrix()).norm() == 0.0);

  // Exploitation encoding matches the zero-noise code.
  const VectorXd z_exploit = model.encode(obs.col(0), true);
  CHECK((z_exploit - enc.z.col(0)).norm() < 1e-15);
}

TEST_CASE("predicted next codes are tanh-bounded for the deterministic head") {
  AmelPred model(small_config(SrlVariant::Det), 5, 2, 5);
  RandomEngine rng(6);
  const MatrixXd z = testutil::random_matrix(4, 6, rng, 0.9);
  const MatrixXd a = testutil::random_matrix(2, 6, rng);
  const MatrixXd pred = model.predict_next(z, a);
  CHECK(pred.rows() == 4);
  CHECK(pred.cols() == 6);  // one prediction per transition
  CHECK((pred.array().abs() < 1.0).all());
}

TEST_CASE("prediction-loss gradient w.r.t. the latent code matches FD") {
  RandomEngine rng(7);
  for (SrlVariant variant : {SrlVariant::Det, SrlVariant::Sto}) {
    AmelPred model(small_config(variant), 5, 2, rng.raw());
    const MatrixXd a = testutil::random_matrix(2, 4, rng);
    const MatrixXd next_obs = testutil::random_matrix(5, 4, rng);

    EncodeResult enc;
    enc.z = testutil::random_matrix(4, 4, rng, 0.8);
    const auto parts = model.prediction_loss_parts(enc, a, next_obs);

    for (int c = 0; c < 10; ++c) {
      const int r = rng.uniform_int(4), col = rng.uniform_int(4);
      EncodeResult up = enc, dn = enc;
      up.z(r, col) += 1e-5;
      dn.z(r, col) -= 1e-5;
      const double numeric = (model.prediction_loss_parts(up, a, next_obs).loss -
                              model.prediction_loss_parts(dn, a, next_obs).loss) /
                             2e-5;
      CHECK(testutil::rel_error(parts.d_z(r, col), numeric) < 1e-4);
    }
  }
}

TEST_CASE("infonce loss") {
  SUBCASE("uniform similarities give ln N") {
    MatrixXd p(3, 4), t(3, 4);
    for (int i = 0; i < 4; ++i) {
      p.col(i) << 1.0, 0.5, -0.25;
      t.col(i) << -0.3, 0.8, 0.1;
    }
    CHECK(infonce_loss(p, t, 0.1) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
  }
  SUBCASE("sharp softmax with aligned positives approaches zero") {
    const MatrixXd eye = MatrixXd::Identity(4, 4);
    CHECK(infonce_loss(eye, eye, 0.005) < 1e-6);
    CHECK(infonce_loss(eye, eye, 0.005) >= 0.0);
  }
  SUBCASE("matches a brute-force softmax cross-entropy") {
    RandomEngine rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + rng.uniform_int(6);
      const MatrixXd p = testutil::random_matrix(5, n, rng);
      const MatrixXd t = testutil::random_matrix(5, n, rng);
      const double temp = rng.uniform(0.05, 1.0);

      double brute = 0.0;
      for (int i = 0; i < n; ++i) {
        double denom = 0.0, positive = 0.0;
        for (int j = 0; j < n; ++j) {
          const double sim =
              t.col(j).normalized().dot(p.col(i).normalized()) / temp;
          denom += std::exp(sim);
          if (j == i) positive = std::exp(sim);
        }
        brute -= std::log(positive / denom);
      }
      brute /= n;
      const double loss = infonce_loss(p, t, temp);
      CHECK(std::abs(loss - brute) < 1e-10);
      CHECK(loss >= 0.0);
    }
  }
  SUBCASE("a batch of one is rejected") {
    const MatrixXd one = MatrixXd::Ones(3, 1);
    CHECK_THROWS(infonce_loss(one, one, 0.1));
  }
}

TEST_CASE("kl loss") {
  SUBCASE("KL(P || P) is zero") {
    RandomEngine rng(9);
    const MatrixXd mu = testutil::random_matrix(4, 3, rng);
    const MatrixXd ls = testutil::random_matrix(4, 3, rng);
    CHECK(std::abs(kl_loss(mu, ls, mu, ls)) < 1e-12);
  }
  SUBCASE("unit mean shift in one dimension is 0.5") {
    const MatrixXd mu_p = MatrixXd::Zero(1, 1), ls = MatrixXd::Zero(1, 1);
    const MatrixXd mu_q = MatrixXd::Ones(1, 1);
    CHECK(kl_loss(mu_p, ls, mu_q, ls) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("non-negative and consistent with a Monte-Carlo estimate") {
    RandomEngine rng(10);
    const double mu_p = 0.3, ls_p = -0.2, mu_q = -0.5, ls_q = 0.4;
    const MatrixXd mp = MatrixXd::Constant(1, 1, mu_p);
    const MatrixXd lp = MatrixXd::Constant(1, 1, ls_p);
    const MatrixXd mq = MatrixXd::Constant(1, 1, mu_q);
    const MatrixXd lq = MatrixXd::Constant(1, 1, ls_q);
    const double analytic = kl_loss(mp, lp, mq, lq);
    CHECK(analytic >= 0.0);

    const int n = 100000;
    const double sigma_p = std::exp(ls_p), sigma_q = std::exp(ls_q);
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = mu_p + sigma_p * rng.normal();
      const double log_p = -0.5 * sq((x - mu_p) / sigma_p) - ls_p;
      const double log_q = -0.5 * sq((x - mu_q) / sigma_q) - ls_q;
      const double v = log_p - log_q;
      acc += v;
      acc2 += v * v;
    }
    const double mc = acc / n;
    const double se = std::sqrt((acc2 / n - mc * mc) / n);
    CHECK(std::abs(mc - analytic) < 3.0 * se);
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS(kl_loss(MatrixXd::Zero(2, 1), MatrixXd::Zero(2, 1),
                         MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1)));
  }
}

TEST_CASE("l2 loss variant") {
  SUBCASE("identical inputs give zero") {
    const MatrixXd z = MatrixXd::Random(4, 3);
    CHECK(l2_loss(z, z) == 0.0);
  }
  SUBCASE("unit difference in one of L dims gives 1/L") {
    MatrixXd p = MatrixXd::Zero(4, 1), t = MatrixXd::Zero(4, 1);
    p(2, 0) = 1.0;
    CHECK(l2_loss(p, t) == doctest::Approx(0.25));
  }
  SUBCASE("the online-target loss ignores the EMA encoder entirely") {
    AmelPred model(small_config(SrlVariant::L2OnlineTarget), 5, 2, 11);
    RandomEngine rng(12);
    const MatrixXd obs = testutil::random_matrix(5, 4, rng);
    const MatrixXd next_obs = testutil::random_matrix(5, 4, rng);
    const MatrixXd a = testutil::random_matrix(2, 4, rng);
    const auto enc = model.encode_train(obs);
    const double loss_before = model.prediction_loss_parts(enc, a, next_obs).loss;

    // Garbage in the target encoder must not change the online-target loss.
    AmelPred scrambled = model;
    RandomEngine noise_rng(13);
    auto& tp = const_cast<nn::ParamSet&>(scrambled.target_encoder().params());
    for (auto& w : tp.weights)
      w = testutil::random_matrix(static_cast<int>(w.rows()),
                                  static_cast<int>(w.cols()), noise_rng);
    const double loss_after =
        scrambled.prediction_loss_parts(enc, a, next_obs).loss;
    CHECK(loss_before == loss_after);
  }
}

TEST_CASE("gradient oracles: representation losses match finite differences") {
  CHECK(gradsuite::fd_infonce(15, 201) < 1e-4);
  CHECK(gradsuite::fd_kl(15, 202) < 1e-4);
  CHECK(gradsuite::fd_l2(15, 203) < 1e-4);
}

TEST_CASE("joint encoder gradient is the sum of the value and srl parts") {
  RandomEngine rng(14);
  for (SrlVariant variant : {SrlVariant::Det, SrlVariant::Sto,
                             SrlVariant::L2OnlineTarget}) {
    AmelPred model(small_config(variant), 5, 2, rng.raw());
    const MatrixXd obs = testutil::random_matrix(5, 4, rng);
    const MatrixXd next_obs = testutil::random_matrix(5, 4, rng);
    const MatrixXd a = testutil::random_matrix(2, 4, rng);
    const MatrixXd critic_grad = testutil::random_matrix(4, 4, rng);
    const double lambda = 0.7;

    const auto enc = model.encode_train(obs);
    const auto parts = model.prediction_loss_parts(enc, a, next_obs);

    nn::ParamSet joint = nn::ParamSet::zeros(model.encoder().spec());
    model.encoder_backward(enc, critic_grad + lambda * parts.d_z, &joint);

    nn::ParamSet from_value = nn::ParamSet::zeros(model.encoder().spec());
    model.encoder_backward(enc, critic_grad, &from_value);
    nn::ParamSet from_srl = nn::ParamSet::zeros(model.encoder().spec());
    model.encoder_backward(enc, parts.d_z, &from_srl);

    from_value.add_scaled(from_srl, lambda);
    CHECK((joint.flatten() - from_value.flatten()).lpNorm<Eigen::Infinity>() <
          1e-10);
  }
}

TEST_CASE("zero loss weight leaves the prediction models untouched") {
  SrlConfig cfg = small_config(SrlVariant::Det);
  cfg.weight = 0.0;
  AmelPred model(cfg, 5, 2, 15);
  RandomEngine rng(16);
  const VectorXd trans_before = model.transition().params().flatten();
  const VectorXd proj_before = model.projection().params().flatten();
  for (int i = 0; i < 5; ++i) {
    const auto enc = model.encode_train(testutil::random_matrix(5, 4, rng));
    model.update(enc, testutil::random_matrix(2, 4, rng),
                 testutil::random_matrix(5, 4, rng),
                 testutil::random_matrix(4, 4, rng));
  }
  CHECK((model.transition().params().flatten() - trans_before).norm() == 0.0);
  CHECK((model.projection().params().flatten() - proj_before).norm() == 0.0);
}

TEST_CASE("target encoder follows the EMA rule exactly") {
  SrlConfig cfg = small_config(SrlVariant::Det);
  cfg.momentum = 0.999;
  AmelPred model(cfg, 5, 2, 17);
  RandomEngine rng(18);

  const VectorXd target_old = model.target_encoder().params().flatten();
  const auto enc = model.encode_train(testutil::random_matrix(5, 4, rng));
  model.update(enc, testutil::random_matrix(2, 4, rng),
               testutil::random_matrix(5, 4, rng), MatrixXd::Zero(4, 4));
  const VectorXd online_new = model.encoder().params().flatten();
  const VectorXd expected = 0.999 * target_old + 0.001 * online_new;
  CHECK((model.target_encoder().params().flatten() - expected)
            .lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("polyak endpoints: hard copy and frozen target") {
  const auto spec = nn::MlpSpec::dense({3, 4}, nn::Activation::None,
                                       nn::Activation::None);
  RandomEngine rng(19);
  nn::Mlp online(spec, rng), target(spec, rng);

  SUBCASE("momentum 0 copies the online net") {
    nn::ParamSet t = target.params();
    nn::polyak_update(t, online.params(), 1.0);  // mix = 1 - momentum
    CHECK((t.flatten() - online.params().flatten()).norm() == 0.0);
  }
  SUBCASE("momentum 1 freezes the target") {
    nn::ParamSet t = target.params();
    const VectorXd before = t.flatten();
    nn::polyak_update(t, online.params(), 0.0);
    CHECK((t.flatten() - before).norm() == 0.0);
  }
}

TEST_CASE("infonce at initialization stays within [0, 2 ln N]") {
  AmelPred model(SrlConfig{.variant = SrlVariant::Det, .latent_dim = 32,
                           .hidden = 128},
                 18, 4, 20);
  RandomEngine rng(21);
  const int n = 256;
  const auto enc = model.encode_train(testutil::random_matrix(18, n, rng));
  const auto parts = model.prediction_loss_parts(
      enc, testutil::random_matrix(4, n, rng), testutil::random_matrix(18, n, rng));
  CHECK(parts.loss >= 0.0);
  CHECK(parts.loss <= 2.0 * std::log(static_cast<double>(n)));
}

TEST_CASE("one stack update encodes exactly twice (shared latent code)") {
  harness::ExperimentConfig cfg = harness::make_config("desk", "td3", "sto");
  cfg.srl.latent_dim = 8;
  cfg.srl.hidden = 16;
  cfg.agent.hidden = {16, 16};
  cfg.agent.batch_size = 8;
  harness::AgentStack stack(cfg, 3);

  RandomEngine rng(22);
  rl::Batch batch;
  batch.obs = testutil::random_matrix(18, 8, rng);
  batch.action = testutil::random_matrix(4, 8, rng);
  batch.reward = testutil::random_matrix(8, 1, rng);
  batch.next_obs = testutil::random_matrix(18, 8, rng);
  batch.done = VectorXd::Zero(8);

  const auto before = stack.srl()->encode_train_calls();
  stack.update(batch);
  CHECK(stack.srl()->encode_train_calls() - before == 2);
}

TEST_CASE("with a frozen encoder the critic still learns") {
  harness::ExperimentConfig cfg = harness::make_config("desk", "td3", "det");
  cfg.srl.latent_dim = 8;
  cfg.srl.hidden = 16;
  cfg.srl.lr = 0.0;      // freeze representation models
  cfg.srl.weight = 0.0;  // and give them no loss signal
  cfg.agent.hidden = {16, 16};
  cfg.agent.batch_size = 8;
  harness::AgentStack stack(cfg, 4);

  RandomEngine rng(23);
  rl::Batch batch;
  batch.obs = testutil::random_matrix(18, 8, rng);
  batch.action = testutil::random_matrix(4, 8, rng);
  batch.reward = testutil::random_matrix(8, 1, rng);
  batch.next_obs = batch.obs;
  batch.done = VectorXd::Ones(8);  // fixed regression target y = r

  const VectorXd enc_before = stack.srl()->encoder().params().flatten();
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 60; ++i) {
    stack.set_global_step(i + 1);
    const auto stats = stack.update(batch);
    if (i == 0) first = stats.agent.critic_loss;
    last = stats.agent.critic_loss;
  }
  CHECK((stack.srl()->encoder().params().flatten() - enc_before).norm() == 0.0);
  CHECK(last < 0.5 * first);
}

TEST_CASE("amelpred serialization round-trips exactly") {
  AmelPred model(small_config(SrlVariant::Sto), 5, 2, 24);
  RandomEngine rng(25);
  for (int i = 0; i < 3; ++i) {
    const auto enc = model.encode_train(testutil::random_matrix(5, 4, rng));
    model.update(enc, testutil::random_matrix(2, 4, rng),
                 testutil::random_matrix(5, 4, rng),
                 testutil::random_matrix(4, 4, rng));
  }
  std::stringstream ss;
  model.save(ss);
  AmelPred restored(small_config(SrlVariant::Sto), 5, 2, 0);
  restored.load(ss);
  std::stringstream sa, sb;
  model.save(sa);
  restored.save(sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("one-hot action encoding") {
  MatrixXd idx(1, 3);
  idx << 0, 2, 1;
  const MatrixXd oh = one_hot_actions(idx, 3);
  CHECK(oh(0, 0) == 1.0);
  CHECK(oh(2, 1) == 1.0);
  CHECK(oh(1, 2) == 1.0);
  CHECK(oh.sum() == 3.0);
  MatrixXd bad(1, 1);
  bad << 5;
  CHECK_THROWS(one_hot_actions(bad, 3));
}
