#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "amelnav/nn/adam.hpp"
#include "amelnav/nn/mlp.hpp"
#include "amelnav/rng.hpp"

namespace amelnav::srl {

enum class SrlVariant : std::uint8_t { None = 0, Det = 1, Sto = 2, L2OnlineTarget = 3 };

std::string to_string(SrlVariant v);
SrlVariant srl_variant_from_string(const std::string& s);

struct SrlConfig {
  SrlVariant variant = SrlVariant::None;
  int latent_dim = 32;
  int hidden = 128;
  double temperature = 0.1;  // InfoNCE
  double weight = 1.0;       // lambda on the representation loss
  double momentum = 0.999;   // target-encoder EMA retention
  double lr = 1e-3;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Loss kernels. Targets never receive gradients; prediction-side gradients
// are written to the d_* outputs so the caller can push them through the
// projection/transition/encoder stack.

/// InfoNCE over cosine similarities: for each predicted column i the
/// positive is target column i and the negatives are the other targets.
double infonce_loss(const Eigen::MatrixXd& predicted,
                    const Eigen::MatrixXd& targets, double temperature,
                    Eigen::MatrixXd* d_predicted = nullptr);

/// Diagonal-Gaussian KL(P || Q) summed over dimensions, averaged over the
/// batch. P is the target distribution; gradients go to Q only.
double kl_loss(const Eigen::MatrixXd& mu_p, const Eigen::MatrixXd& logstd_p,
               const Eigen::MatrixXd& mu_q, const Eigen::MatrixXd& logstd_q,
               Eigen::MatrixXd* d_mu_q = nullptr,
               Eigen::MatrixXd* d_logstd_q = nullptr);

/// Per-sample mean squared distance, averaged over the batch.
double l2_loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target,
               Eigen::MatrixXd* d_predicted = nullptr);

// ---------------------------------------------------------------------------

/// Batch encode with everything needed for the reverse pass.
struct EncodeResult {
  Eigen::MatrixXd z;       // latent fed to the agent, in (-1, 1)
  nn::MlpCache cache;      // encoder cache
  // Stochastic variant only:
  Eigen::MatrixXd mu, logstd;  // clamped logstd
  Eigen::MatrixXd sigma, noise, clamp_mask;
};

struct SrlStats {
  double srl_loss = 0.0;
};

/// Self-predictive representation stack: encoder, transition and projection
/// models plus an EMA target encoder, jointly optimized with the agent's
/// value loss through the shared latent code.
class AmelPred {
 public:
  AmelPred(SrlConfig cfg, int obs_dim, int action_input_dim, std::uint64_t seed);

  const SrlConfig& config() const { return cfg_; }
  int latent_dim() const { return cfg_.latent_dim; }
  int action_input_dim() const { return action_input_dim_; }

  /// Encode one observation for action selection. Exploitation uses the
  /// deterministic code (tanh(mu) for the stochastic variant).
  Eigen::VectorXd encode(const Eigen::VectorXd& obs, bool exploit);

  /// Training-mode batch encode (samples the stochastic latent).
  EncodeResult encode_train(const Eigen::MatrixXd& obs);

  /// Pure encode with caller-provided noise (ignored by the deterministic
  /// variants); no generator side effects.
  EncodeResult encode_with_noise(const Eigen::MatrixXd& obs,
                                 const Eigen::MatrixXd& noise) const;

  /// Representation loss and raw (un-weighted) gradients of the prediction
  /// branch, from an encoding. d_z is dLoss/d(latent code).
  struct PredictionLossParts {
    double loss = 0.0;
    Eigen::MatrixXd d_z;
    nn::ParamSet transition_grads, projection_grads;
  };
  PredictionLossParts prediction_loss_parts(const EncodeResult& enc,
                                            const Eigen::MatrixXd& action_input,
                                            const Eigen::MatrixXd& next_obs) const;

  /// Push a latent-code gradient through the (possibly sampled) encoding
  /// into encoder parameter gradients.
  void encoder_backward(const EncodeResult& enc, const Eigen::MatrixXd& d_z,
                        nn::ParamSet* enc_grads) const;

  /// Apply one joint step: the encoder receives critic_grad_z plus
  /// lambda-scaled representation gradients, the transition/projection
  /// models receive lambda-scaled representation gradients, then the target
  /// encoder moves by EMA.
  SrlStats update(const EncodeResult& enc, const Eigen::MatrixXd& action_input,
                  const Eigen::MatrixXd& next_obs,
                  const Eigen::MatrixXd& critic_grad_z);

  /// Deterministic prediction path (transition then projection); exposed for
  /// the gradient oracles.
  Eigen::MatrixXd predict_next(const Eigen::MatrixXd& z,
                               const Eigen::MatrixXd& action_input) const;

  const nn::Mlp& encoder() const { return encoder_; }
  const nn::Mlp& transition() const { return transition_; }
  const nn::Mlp& projection() const { return projection_; }
  const nn::Mlp& target_encoder() const { return target_encoder_; }
  nn::Mlp& mutable_encoder() { return encoder_; }
  nn::Mlp& mutable_transition() { return transition_; }
  nn::Mlp& mutable_projection() { return projection_; }

  std::vector<const nn::Mlp*> cost_models(bool learning) const;

  std::int64_t encode_train_calls() const { return encode_train_calls_; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

  RandomEngine& rng() { return rng_; }

 private:
  SrlConfig cfg_;
  int obs_dim_;
  int action_input_dim_;
  nn::Mlp encoder_, transition_, projection_, target_encoder_;
  nn::AdamState opt_encoder_, opt_transition_, opt_projection_;
  RandomEngine rng_;
  std::int64_t encode_train_calls_ = 0;
};

/// One-hot encoding of discrete action indices (row 0 of `indices`).
Eigen::MatrixXd one_hot_actions(const Eigen::MatrixXd& indices, int num_actions);

}  // namespace amelnav::srl
