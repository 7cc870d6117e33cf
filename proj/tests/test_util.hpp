#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Core>

#include "amelnav/nn/mlp.hpp"
#include "amelnav/rng.hpp"

namespace testutil {

using LossFn = std::function<double(const Eigen::VectorXd&)>;

inline double central_diff(const LossFn& f, Eigen::VectorXd theta,
                           Eigen::Index k, double h = 1e-5) {
  const double orig = theta[k];
  theta[k] = orig + h;
  const double up = f(theta);
  theta[k] = orig - h;
  const double down = f(theta);
  return (up - down) / (2.0 * h);
}

inline double rel_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < 1e-6) return std::abs(a - b) < 1e-8 ? 0.0 : 1.0;
  return std::abs(a - b) / scale;
}

/// Check `coords` random coordinates of an analytic gradient against central
/// finite differences. Returns the worst relative error seen.
inline double check_gradient(const LossFn& f, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& analytic,
                             amelnav::RandomEngine& rng, int coords = 12,
                             double h = 1e-5) {
  double worst = 0.0;
  const int n = static_cast<int>(theta.size());
  for (int c = 0; c < coords; ++c) {
    const Eigen::Index k = rng.uniform_int(n);
    const double numeric = central_diff(f, theta, k, h);
    worst = std::max(worst, rel_error(analytic[k], numeric));
  }
  return worst;
}

/// Smallest |pre-activation| across LeakyReLU layers: finite differences are
/// only trusted away from the activation kink.
inline double kink_margin(const amelnav::nn::Mlp& mlp, const Eigen::MatrixXd& x) {
  amelnav::nn::MlpCache cache;
  mlp.forward(x, &cache);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mlp.spec().num_layers(); ++i) {
    if (mlp.spec().activations[static_cast<std::size_t>(i)] ==
        amelnav::nn::Activation::LeakyReLU) {
      margin = std::min(margin, cache.pre[static_cast<std::size_t>(i)]
                                    .array()
                                    .abs()
                                    .minCoeff());
    }
  }
  return margin;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols,
                                     amelnav::RandomEngine& rng,
                                     double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

}  // namespace testutil
