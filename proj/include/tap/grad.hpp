#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "tap/model.hpp"
#include "tap/observation.hpp"
#include "tap/tensorize.hpp"

namespace tap {

// Smoothing inside the TV square root so the gradient exists at
// zero-curvature points.
inline constexpr double kTvEps = 1e-12;

struct Gradients {
  std::vector<AttentionHead> heads;  // dW_Q, dW_K per head
  Matrix v1, v2, v3;

  Matrix& v(int mode) { return mode == 1 ? v1 : mode == 2 ? v2 : v3; }
  const Matrix& v(int mode) const { return mode == 1 ? v1 : mode == 2 ? v2 : v3; }
};

// Second-order total variation over the two spatial modes, summed per
// mode-3 slice and evaluated at interior indices only:
//   sum_k sum_{i,j} sqrt(Dxx^2 + Dyy^2 + 2 Dxy^2 + eps)
// with Dxx, Dyy the axial second differences and Dxy half the 4-point cross
// difference. Accumulates the gradient into dx when given.
inline double tv_value(const Tensor3& x, Tensor3* dx = nullptr) {
  const auto [i1, i2, i3] = x.dims();
  double total = 0.0;
  for (int k = 0; k < i3; ++k) {
    for (int i = 1; i + 1 < i1; ++i) {
      for (int j = 1; j + 1 < i2; ++j) {
        const double dxx = x(i + 1, j, k) - 2.0 * x(i, j, k) + x(i - 1, j, k);
        const double dyy = x(i, j + 1, k) - 2.0 * x(i, j, k) + x(i, j - 1, k);
        const double dxy = 0.5 * (x(i + 1, j + 1, k) - x(i + 1, j - 1, k) -
                                  x(i - 1, j + 1, k) + x(i - 1, j - 1, k));
        const double s =
            std::sqrt(dxx * dxx + dyy * dyy + 2.0 * dxy * dxy + kTvEps);
        total += s;
        if (dx) {
          const double gxx = dxx / s, gyy = dyy / s, gxy = 2.0 * dxy / s;
          (*dx)(i + 1, j, k) += gxx;
          (*dx)(i - 1, j, k) += gxx;
          (*dx)(i, j, k) -= 2.0 * gxx;
          (*dx)(i, j + 1, k) += gyy;
          (*dx)(i, j - 1, k) += gyy;
          (*dx)(i, j, k) -= 2.0 * gyy;
          (*dx)(i + 1, j + 1, k) += 0.5 * gxy;
          (*dx)(i - 1, j - 1, k) += 0.5 * gxy;
          (*dx)(i + 1, j - 1, k) -= 0.5 * gxy;
          (*dx)(i - 1, j + 1, k) -= 0.5 * gxy;
        }
      }
    }
  }
  return total;
}

// Exact reverse pass through activation -> Tucker decode -> tensorize ->
// sparsemax -> norm-scaled scores -> linear embeddings. Consumes the cache.
inline Gradients backward(ForwardCache&& cache, const PatchMatrix& patches,
                          const Tensor3& dx) {
  detail::require(dx.dims() == cache.output.dims(),
                  "backward: dX dims do not match forward output");
  const int n_cubes = cache.grid.cube_count();
  const int h = static_cast<int>(cache.attn.q.size());

  // (a) activation: dG = dX .* act'(G)
  Tensor3 dg(dx.dims());
  for (std::size_t i = 0; i < dx.size(); ++i)
    dg.data()[i] = dx.data()[i] * activate_grad_from_value(
                                      cache.activation, cache.output.data()[i]);

  // (b) Tucker decode.
  Gradients grads;
  for (int l = 1; l <= 3; ++l) {
    // B_l = core x_{k!=l} V_k, then dV_l = unfold_l(dG) unfold_l(B_l)^T.
    Tensor3 b = cache.core;
    for (int k = 1; k <= 3; ++k)
      if (k != l) b = mode_product(b, cache.v(k), k);
    grads.v(l) = matmul_nt(unfold(dg, l), unfold(b, l));
  }
  Tensor3 dcore = mode_product(dg, cache.v1.transposed(), 1);
  dcore = mode_product(dcore, cache.v2.transposed(), 2);
  dcore = mode_product(dcore, cache.v3.transposed(), 3);

  // (c) tensorization is an index remap; its adjoint is the inverse remap.
  Matrix ds = untensorize_mhtap(dcore, cache.grid, cache.heads_shape);

  // (d) sparsemax rows: on the realized support A, J = I - 11^T/|A|;
  //     dz = dp - mean(dp over A) on A, zero off support.
  Matrix dz_all(ds.rows(), ds.cols());
  for (int r = 0; r < ds.rows(); ++r) {
    const auto& sup = cache.attn.support[r];
    if (sup.empty()) continue;
    double mean = 0.0;
    for (int c : sup) mean += ds(r, c);
    mean /= static_cast<double>(sup.size());
    for (int c : sup) dz_all(r, c) = ds(r, c) - mean;
  }

  // (e)+(f) per head: Z = (Q K^T) ./ M with M = max(qn kn^T, floor).
  grads.heads.resize(h);
  for (int i = 0; i < h; ++i) {
    const Matrix& q = cache.attn.q[i];
    const Matrix& k = cache.attn.k[i];
    const auto& qn = cache.attn.q_norm[i];
    const auto& kn = cache.attn.k_norm[i];
    Matrix de(n_cubes, n_cubes);
    std::vector<double> dqn(n_cubes, 0.0), dkn(n_cubes, 0.0);
    for (int r = 0; r < n_cubes; ++r) {
      for (int c = 0; c < n_cubes; ++c) {
        const double dz = dz_all(i * n_cubes + r, c);
        const double prod = qn[r] * kn[c];
        const double m = std::max(prod, kNormFloor);
        de(r, c) = dz / m;
        if (prod > kNormFloor) {
          // dM = -dZ .* Z / M; below the floor M is constant.
          const double dm = -dz * cache.attn.z(i * n_cubes + r, c) / m;
          dqn[r] += dm * kn[c];
          dkn[c] += dm * qn[r];
        }
      }
    }
    Matrix dq = matmul(de, k);        // from E = Q K^T
    Matrix dk = matmul_tn(de, q);
    for (int r = 0; r < n_cubes; ++r) {
      if (qn[r] > 0.0 && dqn[r] != 0.0) {
        const double s = dqn[r] / qn[r];  // d||q||/dq = q/||q||
        for (int c = 0; c < dq.cols(); ++c) dq(r, c) += s * q(r, c);
      }
      if (kn[r] > 0.0 && dkn[r] != 0.0) {
        const double s = dkn[r] / kn[r];
        for (int c = 0; c < dk.cols(); ++c) dk(r, c) += s * k(r, c);
      }
    }
    grads.heads[i].w_query = matmul_tn(patches.p, dq);
    grads.heads[i].w_key = matmul_tn(patches.p, dk);
  }
  return grads;
}

// loss = ||Y - O .* X||_F^2 + tv_weight * TV(X), with the exact gradient
// with respect to every parameter.
inline std::pair<double, Gradients> loss_and_grad(const ModelParams& params,
                                                  const PatchMatrix& patches,
                                                  const ObservationSet& obs,
                                                  double tv_weight,
                                                  ForwardCache* cache_out = nullptr) {
  detail::require(tv_weight >= 0.0, "loss_and_grad: tv weight must be >= 0");
  auto [x, cache] = forward(params, patches);
  detail::require(x.dims() == obs.y.dims(),
                  "loss_and_grad: model output dims do not match observations");
  double loss = 0.0;
  Tensor3 dx(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = obs.y.data()[i] - obs.o.data()[i] * x.data()[i];
    loss += r * r;
    dx.data()[i] = -2.0 * obs.o.data()[i] * r;
  }
  if (tv_weight > 0.0) {
    Tensor3 dtv(x.dims());
    loss += tv_weight * tv_value(x, &dtv);
    axpy(tv_weight, dtv, dx);
  }
  if (cache_out) *cache_out = cache;
  return {loss, backward(std::move(cache), patches, dx)};
}

}  // namespace tap
