#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>

#include "amelnav/nn/mlp.hpp"

namespace amelnav::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a ParamSet. Non-finite gradients are reported
/// by returning false and the update is skipped.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const MlpSpec& spec, AdamConfig cfg)
      : cfg_(cfg), m_(ParamSet::zeros(spec)), v_(ParamSet::zeros(spec)) {}

  bool step(ParamSet& params, const ParamSet& grads);

  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  void save(std::ostream& os) const;
  static AdamState load(std::istream& is);

 private:
  AdamConfig cfg_;
  ParamSet m_, v_;
  std::int64_t t_ = 0;
};

/// Adam for a single scalar (SAC's log-alpha).
struct ScalarAdam {
  AdamConfig cfg;
  double m = 0.0, v = 0.0;
  std::int64_t t = 0;

  double step(double param, double grad) {
    if (!std::isfinite(grad)) return param;
    ++t;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    const double mhat = m / (1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
    return param - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
};

}  // namespace amelnav::nn
