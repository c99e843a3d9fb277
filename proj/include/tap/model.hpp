#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tap/attention.hpp"
#include "tap/patch.hpp"
#include "tap/tensor.hpp"
#include "tap/tensorize.hpp"

namespace tap {

enum class Activation { kTanh, kSigmoid, kIdentity };

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::kTanh: return std::tanh(x);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    default: return x;
  }
}

// Derivative expressed through the activation value y = act(x).
inline double activate_grad_from_value(Activation a, double y) {
  switch (a) {
    case Activation::kTanh: return 1.0 - y * y;
    case Activation::kSigmoid: return y * (1.0 - y);
    default: return 1.0;
  }
}

inline std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    default: return "identity";
  }
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

struct ModelConfig {
  PatchGrid grid;
  int embed_dim = 64;              // M
  Dims3 heads_shape{1, 1, 1};      // (h1,h2,h3); (1,1,1) is single-head
  Activation activation = Activation::kTanh;
  std::uint64_t seed = 0;

  int head_count() const {
    return heads_shape[0] * heads_shape[1] * heads_shape[2];
  }
  bool multi_head() const { return head_count() > 1; }
};

inline void validate(const ModelConfig& c) {
  detail::require(c.embed_dim >= 1, "ModelConfig: embed dim must be >= 1");
  detail::require(c.heads_shape[0] >= 1 && c.heads_shape[1] >= 1 &&
                      c.heads_shape[2] >= 1,
                  "ModelConfig: heads shape entries must be >= 1");
}

// Everything the optimizer updates: per-head embeddings plus the three
// value matrices V_l (I_l x R_l).
struct ModelParams {
  std::vector<AttentionHead> heads;
  Dims3 heads_shape{1, 1, 1};
  Matrix v1, v2, v3;
  Activation activation = Activation::kTanh;

  const Matrix& v(int mode) const { return mode == 1 ? v1 : mode == 2 ? v2 : v3; }
  Matrix& v(int mode) { return mode == 1 ? v1 : mode == 2 ? v2 : v3; }
};

// 2*h*(K1K2K3*M) + sum_l I_l*R_l
inline long long parameter_count(const ModelConfig& c) {
  validate(c);
  const Dims3 rd = core_dims(c.grid, c.heads_shape);
  long long n = 2LL * c.head_count() * c.grid.cube_len() * c.embed_dim;
  for (int l = 0; l < 3; ++l) n += 1LL * c.grid.field_dims[l] * rd[l];
  return n;
}

// Intermediates of one forward pass, retained so the backward pass is exact
// (in particular the realized sparsemax support sets). The value matrices
// are copied in, so a cache never goes stale when params are updated; it is
// consumed by backward() and cannot be reused.
struct ForwardCache {
  AttentionStage attn;
  Tensor3 core;
  Tensor3 preactivation;  // G = core x1 V1 x2 V2 x3 V3
  Tensor3 output;         // X = act(G)
  Matrix v1, v2, v3;
  Activation activation = Activation::kTanh;
  Dims3 heads_shape{1, 1, 1};
  PatchGrid grid;

  const Matrix& v(int mode) const { return mode == 1 ? v1 : mode == 2 ? v2 : v3; }
};

// P -> attention map -> core -> Tucker decode -> activation.
inline std::pair<Tensor3, ForwardCache> forward(const ModelParams& params,
                                                const PatchMatrix& patches) {
  ForwardCache cache;
  cache.activation = params.activation;
  cache.heads_shape = params.heads_shape;
  cache.grid = patches.grid;
  cache.v1 = params.v1;
  cache.v2 = params.v2;
  cache.v3 = params.v3;
  cache.attn = attention_stage(patches.p, params.heads);
  cache.core = tensorize_mhtap(cache.attn.map.scores, patches.grid,
                               params.heads_shape);
  Tensor3 g = mode_product(cache.core, params.v1, 1);
  g = mode_product(g, params.v2, 2);
  g = mode_product(g, params.v3, 3);
  Tensor3 x(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i)
    x.data()[i] = activate(params.activation, g.data()[i]);
  cache.preactivation = std::move(g);
  cache.output = x;
  return {std::move(x), std::move(cache)};
}

}  // namespace tap
