#include "amelnav/nn/adam.hpp"

#include <istream>
#include <ostream>

#include "amelnav/io.hpp"

namespace amelnav::nn {

namespace {

template <typename Mat>
void adam_apply(Mat& p, const Mat& g, Mat& m, Mat& v, const AdamConfig& c,
                double bc1, double bc2) {
  m.array() = c.beta1 * m.array() + (1.0 - c.beta1) * g.array();
  v.array() = c.beta2 * v.array() + (1.0 - c.beta2) * g.array().square();
  p.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
}

}  // namespace

bool AdamState::step(ParamSet& params, const ParamSet& grads) {
  if (!params.same_shape(grads)) throw std::invalid_argument("AdamState::step: shape mismatch");
  if (!grads.all_finite()) return false;
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    adam_apply(params.weights[i], grads.weights[i], m_.weights[i], v_.weights[i],
               cfg_, bc1, bc2);
    adam_apply(params.biases[i], grads.biases[i], m_.biases[i], v_.biases[i],
               cfg_, bc1, bc2);
  }
  if (params.ln_gain.size()) {
    adam_apply(params.ln_gain, grads.ln_gain, m_.ln_gain, v_.ln_gain, cfg_, bc1, bc2);
    adam_apply(params.ln_shift, grads.ln_shift, m_.ln_shift, v_.ln_shift, cfg_, bc1, bc2);
  }
  return true;
}

void AdamState::save(std::ostream& os) const {
  io::write_f64(os, cfg_.lr);
  io::write_f64(os, cfg_.beta1);
  io::write_f64(os, cfg_.beta2);
  io::write_f64(os, cfg_.eps);
  io::write_i64(os, t_);
  save_params(os, m_);
  save_params(os, v_);
}

AdamState AdamState::load(std::istream& is) {
  AdamState s;
  s.cfg_.lr = io::read_f64(is);
  s.cfg_.beta1 = io::read_f64(is);
  s.cfg_.beta2 = io::read_f64(is);
  s.cfg_.eps = io::read_f64(is);
  s.t_ = io::read_i64(is);
  s.m_ = load_params(is);
  s.v_ = load_params(is);
  return s;
}

}  // namespace amelnav::nn
