#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "amelnav/rng.hpp"

namespace amelnav::nn {

inline constexpr double kLeakyReluSlope = 0.01;
inline constexpr double kLayerNormEps = 1e-5;

enum class Activation : std::uint8_t { None = 0, LeakyReLU = 1, Tanh = 2 };
enum class OutputHead : std::uint8_t { Single = 0, MeanAndLogStd = 1 };

/// Static description of a dense network: layer widths (input first), one
/// activation per layer, and whether the last linear output is passed
/// through LayerNorm before its activation.
struct MlpSpec {
  std::vector<int> widths;
  std::vector<Activation> activations;
  bool final_layer_norm = false;
  OutputHead head = OutputHead::Single;

  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  void validate() const;
  bool operator==(const MlpSpec&) const = default;

  /// Hidden layers share `hidden_act`; the last layer gets `final_act`.
  static MlpSpec dense(std::vector<int> widths, Activation hidden_act,
                       Activation final_act, bool final_ln = false,
                       OutputHead head = OutputHead::Single);
};

/// All trainable scalars of one network. Weight matrices are (out x in).
struct ParamSet {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd ln_gain;   // empty unless the spec uses LayerNorm
  Eigen::VectorXd ln_shift;

  static ParamSet zeros(const MlpSpec& spec);
  std::int64_t size() const;
  void set_zero();
  bool same_shape(const ParamSet& other) const;
  bool all_finite() const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  /// this += scale * other (shapes must match).
  void add_scaled(const ParamSet& other, double scale);
};

/// target <- (1 - mix) * target + mix * online. `mix` is the online
/// fraction, so mix = 1 is a hard copy.
void polyak_update(ParamSet& target, const ParamSet& online, double mix);

/// Intermediates kept by forward() for the exact reverse pass. Reusable
/// across calls; matrices are resized in place.
struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // inputs[i] feeds layer i
  std::vector<Eigen::MatrixXd> pre;     // post-LayerNorm pre-activation
  Eigen::MatrixXd ln_xhat;
  Eigen::RowVectorXd ln_inv_std;
  Eigen::MatrixXd out;
};

class Mlp {
 public:
  Mlp() = default;
  /// Fan-in uniform init (+-1/sqrt(fan_in)), zero biases, unit LN gain.
  Mlp(MlpSpec spec, RandomEngine& rng);

  const MlpSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// X is (input_dim x batch); returns (output_dim x batch).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, MlpCache* cache = nullptr) const;

  /// Exact reverse-mode pass. `d_out` is dLoss/d(output). Parameter
  /// gradients are accumulated into *grads when non-null. Returns dLoss/dX.
  Eigen::MatrixXd backward(const MlpCache& cache, const Eigen::MatrixXd& d_out,
                           ParamSet* grads) const;

  void save(std::ostream& os) const;
  static Mlp load(std::istream& is);

 private:
  MlpSpec spec_;
  ParamSet params_;
};

void save_spec(std::ostream& os, const MlpSpec& spec);
MlpSpec load_spec(std::istream& is);
void save_params(std::ostream& os, const ParamSet& p);
ParamSet load_params(std::istream& is);

}  // namespace amelnav::nn
