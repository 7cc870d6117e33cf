#include "amelnav/srl/amelpred.hpp"

#include <cmath>
#include <stdexcept>

#include "amelnav/io.hpp"
#include "amelnav/nn/gaussian.hpp"

namespace amelnav::srl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(SrlVariant v) {
  switch (v) {
    case SrlVariant::None: return "none";
    case SrlVariant::Det: return "det";
    case SrlVariant::Sto: return "sto";
    case SrlVariant::L2OnlineTarget: return "l2-online";
  }
  return "none";
}

SrlVariant srl_variant_from_string(const std::string& s) {
  if (s == "none") return SrlVariant::None;
  if (s == "det") return SrlVariant::Det;
  if (s == "sto") return SrlVariant::Sto;
  if (s == "l2-online") return SrlVariant::L2OnlineTarget;
  throw std::invalid_argument("unknown srl variant: " + s);
}

void SrlConfig::validate() const {
  if (latent_dim < 1) throw std::invalid_argument("SrlConfig: latent_dim >= 1");
  if (hidden < 1) throw std::invalid_argument("SrlConfig: hidden >= 1");
  if (!(temperature > 0)) throw std::invalid_argument("SrlConfig: temperature > 0");
  if (momentum < 0 || momentum > 1)
    throw std::invalid_argument("SrlConfig: momentum in [0, 1]");
}

double infonce_loss(const MatrixXd& predicted, const MatrixXd& targets,
                    double temperature, MatrixXd* d_predicted) {
  const int n = static_cast<int>(predicted.cols());
  if (n < 2) throw std::invalid_argument("infonce_loss: need a batch of >= 2");
  if (targets.cols() != n || targets.rows() != predicted.rows())
    throw std::invalid_argument("infonce_loss: shape mismatch");
  if (!(temperature > 0)) throw std::invalid_argument("infonce_loss: temperature > 0");

  constexpr double kNormFloor = 1e-12;
  VectorXd p_norm = predicted.colwise().norm().cwiseMax(kNormFloor);
  VectorXd t_norm = targets.colwise().norm().cwiseMax(kNormFloor);
  MatrixXd p_hat = predicted.array().rowwise() / p_norm.transpose().array();
  MatrixXd t_hat = targets.array().rowwise() / t_norm.transpose().array();

  // scores(j, i) = <t_hat_j, p_hat_i> / T; softmax runs over j per column.
  MatrixXd scores = (t_hat.transpose() * p_hat) / temperature;

  double loss = 0.0;
  MatrixXd soft(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = scores.col(i).maxCoeff();
    VectorXd e = (scores.col(i).array() - m).exp();
    const double denom = e.sum();
    soft.col(i) = e / denom;
    loss -= scores(i, i) - (m + std::log(denom));
  }
  loss /= n;

  if (d_predicted) {
    MatrixXd d_scores = soft;
    d_scores.diagonal().array() -= 1.0;
    d_scores /= static_cast<double>(n);
    // d/d p_hat, then back through the normalization.
    MatrixXd d_p_hat = (t_hat * d_scores) / temperature;
    d_predicted->resize(predicted.rows(), n);
    for (int i = 0; i < n; ++i) {
      const double dot = p_hat.col(i).dot(d_p_hat.col(i));
      d_predicted->col(i) = (d_p_hat.col(i) - dot * p_hat.col(i)) / p_norm[i];
    }
  }
  return loss;
}

double kl_loss(const MatrixXd& mu_p, const MatrixXd& logstd_p,
               const MatrixXd& mu_q, const MatrixXd& logstd_q,
               MatrixXd* d_mu_q, MatrixXd* d_logstd_q) {
  if (mu_p.rows() != mu_q.rows() || mu_p.cols() != mu_q.cols() ||
      logstd_p.rows() != mu_p.rows() || logstd_q.rows() != mu_q.rows() ||
      logstd_p.cols() != mu_p.cols() || logstd_q.cols() != mu_q.cols())
    throw std::invalid_argument("kl_loss: dimension mismatch");
  const double n = static_cast<double>(mu_p.cols());

  const Eigen::ArrayXXd var_p = (2.0 * logstd_p.array()).exp();
  const Eigen::ArrayXXd var_q = (2.0 * logstd_q.array()).exp();
  const Eigen::ArrayXXd diff = mu_p.array() - mu_q.array();

  const Eigen::ArrayXXd terms =
      logstd_q.array() - logstd_p.array() + (var_p + diff.square()) / (2.0 * var_q) - 0.5;
  const double loss = terms.sum() / n;

  if (d_mu_q) *d_mu_q = ((mu_q.array() - mu_p.array()) / var_q / n).matrix();
  if (d_logstd_q)
    *d_logstd_q = ((1.0 - (var_p + diff.square()) / var_q) / n).matrix();
  return loss;
}

double l2_loss(const MatrixXd& predicted, const MatrixXd& target,
               MatrixXd* d_predicted) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    throw std::invalid_argument("l2_loss: dimension mismatch");
  const double scale =
      static_cast<double>(predicted.rows()) * static_cast<double>(predicted.cols());
  const MatrixXd diff = predicted - target;
  if (d_predicted) *d_predicted = (2.0 / scale) * diff;
  return diff.squaredNorm() / scale;
}

namespace {

nn::MlpSpec encoder_spec(SrlVariant variant, int obs_dim, const SrlConfig& cfg) {
  const bool sto = variant == SrlVariant::Sto;
  const int out = sto ? 2 * cfg.latent_dim : cfg.latent_dim;
  // Three-layer encoder; the deterministic head ends in LayerNorm + Tanh,
  // the stochastic head is a linear mean/logstd pair.
  return nn::MlpSpec::dense({obs_dim, cfg.hidden, cfg.hidden, out},
                            nn::Activation::LeakyReLU,
                            sto ? nn::Activation::None : nn::Activation::Tanh,
                            /*final_ln=*/!sto,
                            sto ? nn::OutputHead::MeanAndLogStd
                                : nn::OutputHead::Single);
}

nn::MlpSpec transition_spec(int action_input_dim, const SrlConfig& cfg) {
  return nn::MlpSpec::dense({cfg.latent_dim + action_input_dim, cfg.hidden,
                             cfg.latent_dim},
                            nn::Activation::LeakyReLU, nn::Activation::Tanh,
                            /*final_ln=*/true);
}

nn::MlpSpec projection_spec(SrlVariant variant, const SrlConfig& cfg) {
  const bool sto = variant == SrlVariant::Sto;
  const int out = sto ? 2 * cfg.latent_dim : cfg.latent_dim;
  return nn::MlpSpec::dense({cfg.latent_dim, cfg.hidden, out},
                            nn::Activation::LeakyReLU,
                            sto ? nn::Activation::None : nn::Activation::Tanh,
                            /*final_ln=*/false,
                            sto ? nn::OutputHead::MeanAndLogStd
                                : nn::OutputHead::Single);
}

}  // namespace

AmelPred::AmelPred(SrlConfig cfg, int obs_dim, int action_input_dim,
                   std::uint64_t seed)
    : cfg_(cfg), obs_dim_(obs_dim), action_input_dim_(action_input_dim),
      rng_(seed) {
  cfg_.validate();
  if (cfg_.variant == SrlVariant::None)
    throw std::invalid_argument("AmelPred: variant must not be none");
  encoder_ = nn::Mlp(encoder_spec(cfg_.variant, obs_dim, cfg_), rng_);
  transition_ = nn::Mlp(transition_spec(action_input_dim, cfg_), rng_);
  projection_ = nn::Mlp(projection_spec(cfg_.variant, cfg_), rng_);
  target_encoder_ = encoder_;
  opt_encoder_ = nn::AdamState(encoder_.spec(), {.lr = cfg_.lr});
  opt_transition_ = nn::AdamState(transition_.spec(), {.lr = cfg_.lr});
  opt_projection_ = nn::AdamState(projection_.spec(), {.lr = cfg_.lr});
}

VectorXd AmelPred::encode(const VectorXd& obs, bool exploit) {
  if (cfg_.variant != SrlVariant::Sto) return encoder_.forward(obs);
  const VectorXd out = encoder_.forward(obs);
  const int latent = cfg_.latent_dim;
  const VectorXd mu = out.head(latent);
  if (exploit) return mu.array().tanh().matrix();
  Eigen::ArrayXd logstd = out.tail(latent)
                              .array()
                              .min(nn::kLogStdMax)
                              .max(nn::kLogStdMin);
  VectorXd u(latent);
  for (int i = 0; i < latent; ++i)
    u[i] = mu[i] + std::exp(logstd[i]) * rng_.normal();
  return u.array().tanh().matrix();
}

EncodeResult AmelPred::encode_with_noise(const MatrixXd& obs,
                                         const MatrixXd& noise) const {
  EncodeResult r;
  const MatrixXd out = encoder_.forward(obs, &r.cache);
  if (cfg_.variant != SrlVariant::Sto) {
    r.z = out;
    return r;
  }
  const int latent = cfg_.latent_dim;
  if (noise.rows() != latent || noise.cols() != obs.cols())
    throw std::invalid_argument("encode_with_noise: noise shape mismatch");
  r.mu = out.topRows(latent);
  const MatrixXd raw_logstd = out.bottomRows(latent);
  r.clamp_mask = ((raw_logstd.array() > nn::kLogStdMin) &&
                  (raw_logstd.array() < nn::kLogStdMax))
                     .cast<double>()
                     .matrix();
  r.logstd = raw_logstd.array().min(nn::kLogStdMax).max(nn::kLogStdMin).matrix();
  r.sigma = r.logstd.array().exp().matrix();
  r.noise = noise;
  r.z = (r.mu.array() + r.sigma.array() * r.noise.array()).tanh().matrix();
  return r;
}

EncodeResult AmelPred::encode_train(const MatrixXd& obs) {
  ++encode_train_calls_;
  MatrixXd noise;
  if (cfg_.variant == SrlVariant::Sto)
    noise = nn::normal_matrix(cfg_.latent_dim, static_cast<int>(obs.cols()), rng_);
  return encode_with_noise(obs, noise);
}

MatrixXd AmelPred::predict_next(const MatrixXd& z,
                                const MatrixXd& action_input) const {
  MatrixXd joint(z.rows() + action_input.rows(), z.cols());
  joint.topRows(z.rows()) = z;
  joint.bottomRows(action_input.rows()) = action_input;
  return projection_.forward(transition_.forward(joint));
}

AmelPred::PredictionLossParts AmelPred::prediction_loss_parts(
    const EncodeResult& enc, const MatrixXd& action_input,
    const MatrixXd& next_obs) const {
  const int latent = cfg_.latent_dim;
  const int batch = static_cast<int>(enc.z.cols());

  // Forward prediction path from the shared latent code.
  MatrixXd joint(latent + action_input.rows(), batch);
  joint.topRows(latent) = enc.z;
  joint.bottomRows(action_input.rows()) = action_input;
  nn::MlpCache trans_cache, proj_cache;
  const MatrixXd hidden = transition_.forward(joint, &trans_cache);
  const MatrixXd predicted = projection_.forward(hidden, &proj_cache);

  PredictionLossParts parts;
  MatrixXd d_predicted;
  switch (cfg_.variant) {
    case SrlVariant::Det: {
      const MatrixXd z_target = target_encoder_.forward(next_obs);
      parts.loss = infonce_loss(predicted, z_target, cfg_.temperature,
                                &d_predicted);
      break;
    }
    case SrlVariant::Sto: {
      const MatrixXd target_out = target_encoder_.forward(next_obs);
      const MatrixXd mu_p = target_out.topRows(latent);
      const MatrixXd logstd_p = target_out.bottomRows(latent)
                                    .array()
                                    .min(nn::kLogStdMax)
                                    .max(nn::kLogStdMin)
                                    .matrix();
      const MatrixXd mu_q = predicted.topRows(latent);
      const MatrixXd raw_logstd_q = predicted.bottomRows(latent);
      const MatrixXd mask_q = ((raw_logstd_q.array() > nn::kLogStdMin) &&
                               (raw_logstd_q.array() < nn::kLogStdMax))
                                  .cast<double>()
                                  .matrix();
      const MatrixXd logstd_q =
          raw_logstd_q.array().min(nn::kLogStdMax).max(nn::kLogStdMin).matrix();
      MatrixXd d_mu_q, d_logstd_q;
      parts.loss = kl_loss(mu_p, logstd_p, mu_q, logstd_q, &d_mu_q, &d_logstd_q);
      d_predicted.resize(2 * latent, batch);
      d_predicted.topRows(latent) = d_mu_q;
      d_predicted.bottomRows(latent) =
          (d_logstd_q.array() * mask_q.array()).matrix();
      break;
    }
    case SrlVariant::L2OnlineTarget: {
      // Online-encoder target with the gradient stopped.
      const MatrixXd z_target = encoder_.forward(next_obs);
      parts.loss = l2_loss(predicted, z_target, &d_predicted);
      break;
    }
    case SrlVariant::None:
      throw std::logic_error("AmelPred: representation loss with variant none");
  }

  parts.projection_grads = nn::ParamSet::zeros(projection_.spec());
  parts.transition_grads = nn::ParamSet::zeros(transition_.spec());
  const MatrixXd d_hidden =
      projection_.backward(proj_cache, d_predicted, &parts.projection_grads);
  const MatrixXd d_joint =
      transition_.backward(trans_cache, d_hidden, &parts.transition_grads);
  parts.d_z = d_joint.topRows(latent);
  return parts;
}

void AmelPred::encoder_backward(const EncodeResult& enc, const MatrixXd& d_z,
                                nn::ParamSet* enc_grads) const {
  if (cfg_.variant == SrlVariant::Sto) {
    const int latent = cfg_.latent_dim;
    const Eigen::ArrayXXd one_minus_z2 = 1.0 - enc.z.array().square();
    const Eigen::ArrayXXd du = d_z.array() * one_minus_z2;
    MatrixXd d_out(2 * latent, d_z.cols());
    d_out.topRows(latent) = du.matrix();
    d_out.bottomRows(latent) =
        (du * enc.sigma.array() * enc.noise.array() * enc.clamp_mask.array())
            .matrix();
    encoder_.backward(enc.cache, d_out, enc_grads);
  } else {
    encoder_.backward(enc.cache, d_z, enc_grads);
  }
}

SrlStats AmelPred::update(const EncodeResult& enc, const MatrixXd& action_input,
                          const MatrixXd& next_obs,
                          const MatrixXd& critic_grad_z) {
  PredictionLossParts parts = prediction_loss_parts(enc, action_input, next_obs);
  SrlStats stats;
  stats.srl_loss = parts.loss;

  // Total encoder gradient: value loss plus lambda-weighted representation
  // loss; transition/projection see the lambda-weighted loss only.
  const MatrixXd d_z_total = critic_grad_z + cfg_.weight * parts.d_z;
  nn::ParamSet enc_grads = nn::ParamSet::zeros(encoder_.spec());
  encoder_backward(enc, d_z_total, &enc_grads);

  nn::ParamSet trans_grads = nn::ParamSet::zeros(transition_.spec());
  trans_grads.add_scaled(parts.transition_grads, cfg_.weight);
  nn::ParamSet proj_grads = nn::ParamSet::zeros(projection_.spec());
  proj_grads.add_scaled(parts.projection_grads, cfg_.weight);

  opt_encoder_.step(encoder_.params(), enc_grads);
  opt_transition_.step(transition_.params(), trans_grads);
  opt_projection_.step(projection_.params(), proj_grads);

  // EMA target encoder; retains `momentum` of itself.
  nn::polyak_update(target_encoder_.params(), encoder_.params(),
                    1.0 - cfg_.momentum);
  return stats;
}

std::vector<const nn::Mlp*> AmelPred::cost_models(bool learning) const {
  if (!learning) return {&encoder_};
  return {&encoder_, &target_encoder_, &transition_, &projection_};
}

void AmelPred::save(std::ostream& os) const {
  encoder_.save(os);
  transition_.save(os);
  projection_.save(os);
  target_encoder_.save(os);
  opt_encoder_.save(os);
  opt_transition_.save(os);
  opt_projection_.save(os);
  io::write_i64(os, encode_train_calls_);
  io::write_string(os, rng_.state());
}

void AmelPred::load(std::istream& is) {
  encoder_ = nn::Mlp::load(is);
  transition_ = nn::Mlp::load(is);
  projection_ = nn::Mlp::load(is);
  target_encoder_ = nn::Mlp::load(is);
  opt_encoder_ = nn::AdamState::load(is);
  opt_transition_ = nn::AdamState::load(is);
  opt_projection_ = nn::AdamState::load(is);
  encode_train_calls_ = io::read_i64(is);
  rng_.set_state(io::read_string(is));
}

MatrixXd one_hot_actions(const MatrixXd& indices, int num_actions) {
  const int batch = static_cast<int>(indices.cols());
  MatrixXd out = MatrixXd::Zero(num_actions, batch);
  for (int i = 0; i < batch; ++i) {
    const int a = static_cast<int>(indices(0, i));
    if (a < 0 || a >= num_actions)
      throw std::out_of_range("one_hot_actions: index out of range");
    out(a, i) = 1.0;
  }
  return out;
}

}  // namespace amelnav::srl
