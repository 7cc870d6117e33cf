#include "amelnav/nn/gaussian.hpp"

#include <stdexcept>

namespace amelnav::nn {

GaussianSample gaussian_sample(const Eigen::VectorXd& mean,
                               const Eigen::VectorXd& logstd,
                               const Eigen::VectorXd& noise) {
  if (mean.size() != logstd.size() || mean.size() != noise.size())
    throw std::invalid_argument("gaussian_sample: size mismatch");
  GaussianSample s;
  Eigen::ArrayXd ls = logstd.array().min(kLogStdMax).max(kLogStdMin);
  Eigen::ArrayXd sigma = ls.exp();
  s.value = (mean.array() + sigma * noise.array()).matrix();
  s.log_density =
      (-0.5 * noise.array().square() - ls - kLogSqrt2Pi).sum();
  return s;
}

GaussianSample gaussian_sample_squashed(const Eigen::VectorXd& mean,
                                        const Eigen::VectorXd& logstd,
                                        const Eigen::VectorXd& noise) {
  GaussianSample s = gaussian_sample(mean, logstd, noise);
  Eigen::ArrayXd u = s.value.array();
  Eigen::ArrayXd log_one_minus_t2 =
      2.0 * (std::log(2.0) - u - (-2.0 * u).unaryExpr([](double x) {
        return softplus(x);
      }));
  s.log_density -= log_one_minus_t2.sum();
  s.value = u.tanh().matrix();
  return s;
}

SquashedBatch squashed_batch(const Eigen::MatrixXd& mean,
                             const Eigen::MatrixXd& logstd,
                             const Eigen::MatrixXd& noise) {
  if (mean.rows() != logstd.rows() || mean.cols() != logstd.cols() ||
      mean.rows() != noise.rows() || mean.cols() != noise.cols())
    throw std::invalid_argument("squashed_batch: shape mismatch");
  SquashedBatch out;
  Eigen::ArrayXXd ls = logstd.array();
  out.clamp_mask = ((ls > kLogStdMin) && (ls < kLogStdMax))
                       .cast<double>()
                       .matrix();
  ls = ls.min(kLogStdMax).max(kLogStdMin);
  out.sigma = ls.exp().matrix();
  out.u = mean + (out.sigma.array() * noise.array()).matrix();
  out.action = out.u.array().tanh().matrix();

  Eigen::ArrayXXd base =
      -0.5 * noise.array().square() - ls - kLogSqrt2Pi;
  Eigen::ArrayXXd corr = 2.0 * (std::log(2.0) - out.u.array() -
                                (-2.0 * out.u.array()).unaryExpr([](double x) {
                                  return softplus(x);
                                }));
  out.log_density = (base - corr).colwise().sum().transpose();
  return out;
}

Eigen::MatrixXd normal_matrix(int rows, int cols, RandomEngine& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

}  // namespace amelnav::nn
