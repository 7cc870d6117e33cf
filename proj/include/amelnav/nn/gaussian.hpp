#pragma once

#include <Eigen/Core>

#include "amelnav/math_util.hpp"
#include "amelnav/rng.hpp"

namespace amelnav::nn {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

inline double clamp_logstd(double v) { return clamp(v, kLogStdMin, kLogStdMax); }

struct GaussianSample {
  Eigen::VectorXd value;       // mu + sigma.*noise (pre-squash)
  double log_density = 0.0;
};

/// Reparameterized diagonal-Gaussian sample. `logstd` is clamped to
/// [kLogStdMin, kLogStdMax] before exponentiation.
GaussianSample gaussian_sample(const Eigen::VectorXd& mean,
                               const Eigen::VectorXd& logstd,
                               const Eigen::VectorXd& noise);

/// Tanh-squashed variant: value = tanh(u) and the log-density carries the
/// change-of-variables correction, computed with the numerically stable
/// identity log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u)).
GaussianSample gaussian_sample_squashed(const Eigen::VectorXd& mean,
                                        const Eigen::VectorXd& logstd,
                                        const Eigen::VectorXd& noise);

/// Batched squashed sampling for actor updates. Columns are samples.
/// Outputs: action = tanh(u), u = mu + sigma.*noise, per-column log-density.
struct SquashedBatch {
  Eigen::MatrixXd u;
  Eigen::MatrixXd action;
  Eigen::VectorXd log_density;
  Eigen::MatrixXd sigma;          // after the logstd clamp
  Eigen::MatrixXd clamp_mask;     // 1 where logstd was inside the clamp range
};

SquashedBatch squashed_batch(const Eigen::MatrixXd& mean,
                             const Eigen::MatrixXd& logstd,
                             const Eigen::MatrixXd& noise);

Eigen::MatrixXd normal_matrix(int rows, int cols, RandomEngine& rng);

}  // namespace amelnav::nn
