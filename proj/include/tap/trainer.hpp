#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tap/grad.hpp"
#include "tap/model.hpp"
#include "tap/observation.hpp"
#include "tap/patch.hpp"
#include "tap/rng.hpp"

namespace tap {

struct TrainConfig {
  double learning_rate = 4e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_epochs = 2000;
  double rel_tol = 1e-6;   // on loss improvement over stop_window epochs
  int stop_window = 50;
  double tv_weight = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& c) {
  detail::require(c.learning_rate > 0.0, "TrainConfig: learning rate must be > 0");
  detail::require(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0 &&
                      c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0,
                  "TrainConfig: betas must lie in [0, 1)");
  detail::require(c.max_epochs >= 1, "TrainConfig: max epochs must be >= 1");
  detail::require(c.tv_weight >= 0.0, "TrainConfig: tv weight must be >= 0");
}

struct TrainTrace {
  std::vector<double> loss;
  std::vector<double> core_nonzero_fraction;
  std::vector<double> seconds;  // elapsed wall time at the end of each epoch
};

// Kaiming-style uniform init: every entry ~ U(-b, b) with b = sqrt(1/fan_in),
// fan_in the input dimension of the matrix (K1K2K3 for the embeddings, R_l
// for the value matrices). Draw order is fixed: per head W_Q then W_K, heads
// in order, then V1, V2, V3, each matrix row-major.
inline ModelParams init_params(const ModelConfig& config) {
  validate(config);
  Rng rng(config.seed);
  auto fill = [&rng](Matrix& m, int fan_in) {
    const double b = std::sqrt(1.0 / fan_in);
    for (double& v : m.data()) v = rng.uniform(-b, b);
  };
  ModelParams params;
  params.activation = config.activation;
  params.heads_shape = config.heads_shape;
  const int d = config.grid.cube_len();
  params.heads.resize(config.head_count());
  for (auto& head : params.heads) {
    head.w_query = Matrix(d, config.embed_dim);
    head.w_key = Matrix(d, config.embed_dim);
    fill(head.w_query, d);
    fill(head.w_key, d);
  }
  const Dims3 rd = core_dims(config.grid, config.heads_shape);
  for (int l = 1; l <= 3; ++l) {
    params.v(l) = Matrix(config.grid.field_dims[l - 1], rd[l - 1]);
    fill(params.v(l), rd[l - 1]);
  }
  return params;
}

struct AdamState {
  std::vector<AttentionHead> m_heads, v_heads;
  Matrix m_v1, m_v2, m_v3, v_v1, v_v2, v_v3;

  static AdamState like(const ModelParams& p) {
    AdamState s;
    s.m_heads.resize(p.heads.size());
    s.v_heads.resize(p.heads.size());
    for (std::size_t i = 0; i < p.heads.size(); ++i) {
      s.m_heads[i].w_query = Matrix(p.heads[i].w_query.rows(), p.heads[i].w_query.cols());
      s.m_heads[i].w_key = Matrix(p.heads[i].w_key.rows(), p.heads[i].w_key.cols());
      s.v_heads[i] = s.m_heads[i];
    }
    s.m_v1 = Matrix(p.v1.rows(), p.v1.cols());
    s.m_v2 = Matrix(p.v2.rows(), p.v2.cols());
    s.m_v3 = Matrix(p.v3.rows(), p.v3.cols());
    s.v_v1 = s.m_v1;
    s.v_v2 = s.m_v2;
    s.v_v3 = s.m_v3;
    return s;
  }
};

namespace detail {
inline void adam_update(std::vector<double>& theta, const std::vector<double>& g,
                        std::vector<double>& m, std::vector<double>& v, int t,
                        const TrainConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  }
}
}  // namespace detail

// One bias-corrected Adam step (t counts from 1).
inline void adam_step(ModelParams& params, const Gradients& grads,
                      AdamState& state, int t, const TrainConfig& cfg) {
  detail::require(t >= 1, "adam_step: step index starts at 1");
  for (std::size_t i = 0; i < params.heads.size(); ++i) {
    detail::adam_update(params.heads[i].w_query.data(),
                        grads.heads[i].w_query.data(),
                        state.m_heads[i].w_query.data(),
                        state.v_heads[i].w_query.data(), t, cfg);
    detail::adam_update(params.heads[i].w_key.data(), grads.heads[i].w_key.data(),
                        state.m_heads[i].w_key.data(),
                        state.v_heads[i].w_key.data(), t, cfg);
  }
  detail::adam_update(params.v1.data(), grads.v1.data(), state.m_v1.data(),
                      state.v_v1.data(), t, cfg);
  detail::adam_update(params.v2.data(), grads.v2.data(), state.m_v2.data(),
                      state.v_v2.data(), t, cfg);
  detail::adam_update(params.v3.data(), grads.v3.data(), state.m_v3.data(),
                      state.v_v3.data(), t, cfg);
}

struct FitResult {
  ModelParams params;
  TrainTrace trace;
  Tensor3 reconstruction;  // denormalized
  double norm_lo = 0.0;
  double norm_hi = 1.0;
};

// Observed entries are min-max normalized before training and the
// reconstruction is mapped back afterwards. The target interval sits
// strictly inside the activation's range: [-0.95, 0.95] for tanh (which
// saturates at +-1) and identity, [0.05, 0.95] for sigmoid.
inline constexpr double kNormTarget = 0.95;

inline std::pair<double, double> norm_target_range(Activation act) {
  return act == Activation::kSigmoid
             ? std::pair{1.0 - kNormTarget, kNormTarget}
             : std::pair{-kNormTarget, kNormTarget};
}

inline Tensor3 normalize_observations(const ObservationSet& obs,
                                      Activation act = Activation::kTanh) {
  const auto [t_lo, t_hi] = norm_target_range(act);
  Tensor3 yn(obs.y.dims());
  const double span = obs.norm_hi - obs.norm_lo;
  for (std::size_t i = 0; i < yn.size(); ++i) {
    if (obs.o.data()[i] != 0.0) {
      yn.data()[i] =
          t_lo + (t_hi - t_lo) * (obs.y.data()[i] - obs.norm_lo) / span;
    }
  }
  return yn;
}

inline void denormalize(Tensor3& x, double lo, double hi,
                        Activation act = Activation::kTanh) {
  const auto [t_lo, t_hi] = norm_target_range(act);
  const double span = hi - lo;
  for (double& v : x.data()) v = lo + (v - t_lo) * span / (t_hi - t_lo);
}

// Adam loop on the masked reconstruction loss: extract cubes once, then
// iterate forward / loss_and_grad / adam_step until max_epochs or the
// windowed relative improvement falls below rel_tol.
inline FitResult fit(const ObservationSet& obs, const ModelConfig& model_cfg,
                     const TrainConfig& train_cfg) {
  validate(model_cfg);
  validate(train_cfg);
  detail::require(obs.y.dims() == model_cfg.grid.field_dims,
                  "fit: observation dims do not match model grid");
  detail::require(obs.observed_count() >= 1, "fit: empty observation mask");

  const auto t0 = std::chrono::steady_clock::now();
  const auto [t_lo, t_hi] = norm_target_range(model_cfg.activation);
  Tensor3 yn = normalize_observations(obs, model_cfg.activation);
  ObservationSet norm_obs{std::move(yn), obs.o, t_lo, t_hi, {}};
  const PatchMatrix patches = extract(norm_obs.y, model_cfg.grid);

  ModelParams params = init_params(model_cfg);
  AdamState state = AdamState::like(params);
  TrainTrace trace;
  const double map_entries =
      static_cast<double>(model_cfg.head_count()) * patches.grid.cube_count() *
      patches.grid.cube_count();

  for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    ForwardCache cache;
    auto [loss, grads] =
        loss_and_grad(params, patches, norm_obs, train_cfg.tv_weight, &cache);
    if (!std::isfinite(loss)) {
      throw std::runtime_error(
          "fit: non-finite loss at epoch " + std::to_string(epoch) +
          " (lr=" + std::to_string(train_cfg.learning_rate) + ")");
    }
    adam_step(params, grads, state, epoch, train_cfg);

    long long nnz = 0;
    for (int c : cache.attn.map.support_count) nnz += c;
    trace.loss.push_back(loss);
    trace.core_nonzero_fraction.push_back(static_cast<double>(nnz) / map_entries);
    trace.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());

    const int w = train_cfg.stop_window;
    if (w > 0 && epoch > w) {
      const double before = trace.loss[epoch - 1 - w];
      const double rel = (before - loss) / std::max(std::fabs(before), 1e-300);
      if (rel < train_cfg.rel_tol) break;
    }
  }

  Tensor3 x = forward(params, patches).first;
  denormalize(x, obs.norm_lo, obs.norm_hi, model_cfg.activation);
  return {std::move(params), std::move(trace), std::move(x), obs.norm_lo,
          obs.norm_hi};
}

}  // namespace tap
