#include "amelnav/nn/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "amelnav/io.hpp"

namespace amelnav::nn {

void MlpSpec::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("MlpSpec: need >= 2 widths");
  for (int w : widths)
    if (w <= 0) throw std::invalid_argument("MlpSpec: widths must be positive");
  if (activations.size() != widths.size() - 1)
    throw std::invalid_argument("MlpSpec: one activation per layer required");
  if (head == OutputHead::MeanAndLogStd && widths.back() % 2 != 0)
    throw std::invalid_argument("MlpSpec: mean/logstd head needs even output width");
}

MlpSpec MlpSpec::dense(std::vector<int> widths, Activation hidden_act,
                       Activation final_act, bool final_ln, OutputHead head) {
  MlpSpec spec;
  spec.widths = std::move(widths);
  spec.activations.assign(spec.widths.size() - 1, hidden_act);
  spec.activations.back() = final_act;
  spec.final_layer_norm = final_ln;
  spec.head = head;
  spec.validate();
  return spec;
}

ParamSet ParamSet::zeros(const MlpSpec& spec) {
  spec.validate();
  ParamSet p;
  const int layers = spec.num_layers();
  p.weights.reserve(layers);
  p.biases.reserve(layers);
  for (int i = 0; i < layers; ++i) {
    p.weights.emplace_back(Eigen::MatrixXd::Zero(spec.widths[i + 1], spec.widths[i]));
    p.biases.emplace_back(Eigen::VectorXd::Zero(spec.widths[i + 1]));
  }
  if (spec.final_layer_norm) {
    p.ln_gain = Eigen::VectorXd::Zero(spec.output_dim());
    p.ln_shift = Eigen::VectorXd::Zero(spec.output_dim());
  }
  return p;
}

std::int64_t ParamSet::size() const {
  std::int64_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  n += ln_gain.size() + ln_shift.size();
  return n;
}

void ParamSet::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
  ln_gain.setZero();
  ln_shift.setZero();
}

bool ParamSet::same_shape(const ParamSet& other) const {
  if (weights.size() != other.weights.size()) return false;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() != other.weights[i].rows() ||
        weights[i].cols() != other.weights[i].cols() ||
        biases[i].size() != other.biases[i].size())
      return false;
  }
  return ln_gain.size() == other.ln_gain.size() &&
         ln_shift.size() == other.ln_shift.size();
}

bool ParamSet::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return ln_gain.allFinite() && ln_shift.allFinite();
}

Eigen::VectorXd ParamSet::flatten() const {
  Eigen::VectorXd flat(size());
  std::int64_t at = 0;
  auto put = [&](const double* data, std::int64_t n) {
    flat.segment(at, n) = Eigen::Map<const Eigen::VectorXd>(data, n);
    at += n;
  };
  for (const auto& w : weights) put(w.data(), w.size());
  for (const auto& b : biases) put(b.data(), b.size());
  if (ln_gain.size()) put(ln_gain.data(), ln_gain.size());
  if (ln_shift.size()) put(ln_shift.data(), ln_shift.size());
  return flat;
}

void ParamSet::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw std::invalid_argument("unflatten: size mismatch");
  std::int64_t at = 0;
  auto take = [&](double* data, std::int64_t n) {
    Eigen::Map<Eigen::VectorXd>(data, n) = flat.segment(at, n);
    at += n;
  };
  for (auto& w : weights) take(w.data(), w.size());
  for (auto& b : biases) take(b.data(), b.size());
  if (ln_gain.size()) take(ln_gain.data(), ln_gain.size());
  if (ln_shift.size()) take(ln_shift.data(), ln_shift.size());
}

void ParamSet::add_scaled(const ParamSet& other, double scale) {
  if (!same_shape(other)) throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i].noalias() += scale * other.weights[i];
    biases[i].noalias() += scale * other.biases[i];
  }
  if (ln_gain.size()) {
    ln_gain.noalias() += scale * other.ln_gain;
    ln_shift.noalias() += scale * other.ln_shift;
  }
}

void polyak_update(ParamSet& target, const ParamSet& online, double mix) {
  if (!target.same_shape(online))
    throw std::invalid_argument("polyak_update: shape mismatch");
  const double keep = 1.0 - mix;
  for (std::size_t i = 0; i < target.weights.size(); ++i) {
    target.weights[i] = keep * target.weights[i] + mix * online.weights[i];
    target.biases[i] = keep * target.biases[i] + mix * online.biases[i];
  }
  if (target.ln_gain.size()) {
    target.ln_gain = keep * target.ln_gain + mix * online.ln_gain;
    target.ln_shift = keep * target.ln_shift + mix * online.ln_shift;
  }
}

Mlp::Mlp(MlpSpec spec, RandomEngine& rng) : spec_(std::move(spec)) {
  spec_.validate();
  params_ = ParamSet::zeros(spec_);
  for (int i = 0; i < spec_.num_layers(); ++i) {
    auto& w = params_.weights[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = rng.uniform(-bound, bound);
  }
  if (spec_.final_layer_norm) params_.ln_gain.setOnes();
}

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& m) {
  switch (act) {
    case Activation::None:
      break;
    case Activation::LeakyReLU:
      m = m.unaryExpr([](double v) { return v > 0.0 ? v : kLeakyReluSlope * v; });
      break;
    case Activation::Tanh:
      m = m.array().tanh().matrix();
      break;
  }
}

}  // namespace

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, MlpCache* cache) const {
  if (x.rows() != spec_.input_dim())
    throw std::invalid_argument("Mlp::forward: input width mismatch");
  const int layers = spec_.num_layers();
  if (cache) {
    cache->inputs.resize(layers);
    cache->pre.resize(layers);
  }

  Eigen::MatrixXd a = x;
  for (int i = 0; i < layers; ++i) {
    if (cache) cache->inputs[i] = a;
    Eigen::MatrixXd z = (params_.weights[i] * a).colwise() + params_.biases[i];

    if (i == layers - 1 && spec_.final_layer_norm) {
      // LayerNorm over the feature axis, then affine.
      const auto f = static_cast<double>(z.rows());
      Eigen::RowVectorXd mean = z.colwise().mean();
      Eigen::MatrixXd centered = z.rowwise() - mean;
      Eigen::RowVectorXd var = centered.array().square().colwise().sum() / f;
      Eigen::RowVectorXd inv_std =
          (var.array() + kLayerNormEps).sqrt().inverse();
      Eigen::MatrixXd xhat = centered.array().rowwise() * inv_std.array();
      z = (xhat.array().colwise() * params_.ln_gain.array()).matrix();
      z.colwise() += params_.ln_shift;
      if (cache) {
        cache->ln_xhat = std::move(xhat);
        cache->ln_inv_std = std::move(inv_std);
      }
    }

    if (cache) cache->pre[i] = z;
    apply_activation(spec_.activations[i], z);
    a = std::move(z);
  }
  if (cache) cache->out = a;
  return a;
}

Eigen::MatrixXd Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& d_out,
                              ParamSet* grads) const {
  const int layers = spec_.num_layers();
  if (static_cast<int>(cache.inputs.size()) != layers)
    throw std::invalid_argument("Mlp::backward: cache does not match spec");
  if (grads && !grads->same_shape(params_))
    throw std::invalid_argument("Mlp::backward: gradient shape mismatch");

  Eigen::MatrixXd delta = d_out;
  for (int i = layers - 1; i >= 0; --i) {
    // Through the activation.
    switch (spec_.activations[i]) {
      case Activation::None:
        break;
      case Activation::LeakyReLU:
        delta.array() *= cache.pre[i].unaryExpr([](double v) {
          return v > 0.0 ? 1.0 : kLeakyReluSlope;
        }).array();
        break;
      case Activation::Tanh: {
        const Eigen::MatrixXd& activated =
            (i == layers - 1) ? cache.out : cache.inputs[i + 1];
        delta.array() *= (1.0 - activated.array().square());
        break;
      }
    }

    // Through the LayerNorm affine + normalization.
    if (i == layers - 1 && spec_.final_layer_norm) {
      if (grads) {
        grads->ln_gain.noalias() +=
            (delta.array() * cache.ln_xhat.array()).rowwise().sum().matrix();
        grads->ln_shift.noalias() += delta.rowwise().sum();
      }
      Eigen::MatrixXd dxhat =
          (delta.array().colwise() * params_.ln_gain.array()).matrix();
      Eigen::RowVectorXd m1 = dxhat.colwise().mean();
      Eigen::RowVectorXd m2 =
          (dxhat.array() * cache.ln_xhat.array()).colwise().mean();
      delta = ((dxhat.rowwise() - m1).array() -
               (cache.ln_xhat.array().rowwise() * m2.array()))
                  .rowwise() *
              cache.ln_inv_std.array();
    }

    if (grads) {
      grads->weights[i].noalias() += delta * cache.inputs[i].transpose();
      grads->biases[i].noalias() += delta.rowwise().sum();
    }
    delta = params_.weights[i].transpose() * delta;
  }
  return delta;
}

void save_spec(std::ostream& os, const MlpSpec& spec) {
  io::write_u32(os, static_cast<std::uint32_t>(spec.widths.size()));
  for (int w : spec.widths) io::write_u32(os, static_cast<std::uint32_t>(w));
  for (Activation a : spec.activations)
    io::write_u32(os, static_cast<std::uint32_t>(a));
  io::write_u32(os, spec.final_layer_norm ? 1 : 0);
  io::write_u32(os, static_cast<std::uint32_t>(spec.head));
}

MlpSpec load_spec(std::istream& is) {
  MlpSpec spec;
  const auto n = io::read_u32(is);
  spec.widths.resize(n);
  for (auto& w : spec.widths) w = static_cast<int>(io::read_u32(is));
  spec.activations.resize(n - 1);
  for (auto& a : spec.activations) a = static_cast<Activation>(io::read_u32(is));
  spec.final_layer_norm = io::read_u32(is) != 0;
  spec.head = static_cast<OutputHead>(io::read_u32(is));
  spec.validate();
  return spec;
}

void save_params(std::ostream& os, const ParamSet& p) {
  io::write_u32(os, static_cast<std::uint32_t>(p.weights.size()));
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    io::write_matrix(os, p.weights[i]);
    io::write_vector(os, p.biases[i]);
  }
  io::write_vector(os, p.ln_gain);
  io::write_vector(os, p.ln_shift);
}

ParamSet load_params(std::istream& is) {
  ParamSet p;
  const auto layers = io::read_u32(is);
  p.weights.resize(layers);
  p.biases.resize(layers);
  for (std::uint32_t i = 0; i < layers; ++i) {
    p.weights[i] = io::read_matrix(is);
    p.biases[i] = io::read_vector(is);
  }
  p.ln_gain = io::read_vector(is);
  p.ln_shift = io::read_vector(is);
  return p;
}

void Mlp::save(std::ostream& os) const {
  save_spec(os, spec_);
  save_params(os, params_);
}

Mlp Mlp::load(std::istream& is) {
  Mlp m;
  m.spec_ = load_spec(is);
  m.params_ = load_params(is);
  if (!m.params_.same_shape(ParamSet::zeros(m.spec_)))
    throw std::runtime_error("Mlp::load: parameter shapes do not match spec");
  return m;
}

}  // namespace amelnav::nn
