#pragma once

#include <cstdint>
#include <vector>

#include "amelnav/nn/mlp.hpp"

namespace amelnav::nn {

/// Flop convention: one multiply-accumulate of a linear layer counts as one
/// flop, per single-sample forward pass. Biases, activations and norms are
/// excluded. Params count every trainable scalar including biases and the
/// LayerNorm affine.
struct CostReport {
  std::int64_t flops = 0;
  std::int64_t params = 0;

  CostReport& operator+=(const CostReport& o) {
    flops += o.flops;
    params += o.params;
    return *this;
  }
  bool operator==(const CostReport&) const = default;
};

inline CostReport count_cost(const MlpSpec& spec) {
  CostReport r;
  for (int i = 0; i < spec.num_layers(); ++i) {
    const std::int64_t in = spec.widths[i];
    const std::int64_t out = spec.widths[i + 1];
    r.flops += in * out;
    r.params += in * out + out;
  }
  if (spec.final_layer_norm) r.params += 2 * spec.output_dim();
  return r;
}

inline CostReport count_cost(const std::vector<const Mlp*>& models) {
  CostReport r;
  for (const Mlp* m : models) r += count_cost(m->spec());
  return r;
}

}  // namespace amelnav::nn
