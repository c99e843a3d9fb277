#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "tap/observation.hpp"
#include "tap/tensor.hpp"

namespace tap {

struct TuckerFit {
  Tensor3 core;
  Matrix u1, u2, u3;
  std::vector<double> fit_history;  // observed-entry residual per sweep

  Matrix& u(int mode) { return mode == 1 ? u1 : mode == 2 ? u2 : u3; }
  const Matrix& u(int mode) const { return mode == 1 ? u1 : mode == 2 ? u2 : u3; }
};

namespace detail {

// Leading r left singular vectors of m, via the eigendecomposition of the
// small Gram matrix m m^T. Column signs are fixed so the entry of largest
// magnitude is positive, keeping the factors deterministic.
inline Matrix leading_left_singular(const Matrix& m, int r) {
  const Eigen::MatrixXd a = m.map();
  Eigen::MatrixXd gram = a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  require(es.info() == Eigen::Success, "eigendecomposition failed");
  Matrix u(m.rows(), r);
  for (int c = 0; c < r; ++c) {
    Eigen::VectorXd col = es.eigenvectors().col(m.rows() - 1 - c);  // descending
    int arg = 0;
    for (int i = 1; i < col.size(); ++i)
      if (std::fabs(col(i)) > std::fabs(col(arg))) arg = i;
    if (col(arg) < 0.0) col = -col;
    for (int i = 0; i < m.rows(); ++i) u(i, c) = col(i);
  }
  return u;
}

}  // namespace detail

// One HOOI pass per call site: factors from truncated SVDs of the partially
// projected unfoldings, core by full projection.
inline TuckerFit hooi_decompose(const Tensor3& x, Dims3 ranks, int sweeps) {
  for (int l = 0; l < 3; ++l)
    detail::require(ranks[l] >= 1 && ranks[l] <= x.dims()[l],
                    "hooi: rank exceeds dimension");
  TuckerFit fit;
  for (int l = 1; l <= 3; ++l)
    fit.u(l) = detail::leading_left_singular(unfold(x, l), ranks[l - 1]);
  for (int s = 0; s < sweeps; ++s) {
    for (int l = 1; l <= 3; ++l) {
      Tensor3 b = x;
      for (int k = 1; k <= 3; ++k)
        if (k != l) b = mode_product(b, fit.u(k).transposed(), k);
      fit.u(l) = detail::leading_left_singular(unfold(b, l), ranks[l - 1]);
    }
  }
  fit.core = mode_product(
      mode_product(mode_product(x, fit.u1.transposed(), 1), fit.u2.transposed(), 2),
      fit.u3.transposed(), 3);
  return fit;
}

inline Tensor3 tucker_reconstruct(const TuckerFit& fit) {
  return mode_product(mode_product(mode_product(fit.core, fit.u1, 1), fit.u2, 2),
                      fit.u3, 3);
}

// Masked Tucker completion: impute missing entries with the observed mean,
// then alternate {one HOOI sweep, re-impute missing entries from the
// reconstruction} until the relative change drops below tol.
inline Tensor3 tucker_als_complete(const ObservationSet& obs, Dims3 ranks,
                                   int iters = 100, double tol = 1e-7,
                                   TuckerFit* fit_out = nullptr) {
  for (int l = 0; l < 3; ++l)
    detail::require(ranks[l] >= 1 && ranks[l] <= obs.y.dims()[l],
                    "tucker_als_complete: rank exceeds dimension");
  double mean = 0.0;
  std::size_t observed = 0;
  for (std::size_t i = 0; i < obs.y.size(); ++i) {
    if (obs.o.data()[i] != 0.0) {
      mean += obs.y.data()[i];
      ++observed;
    }
  }
  detail::require(observed >= 1, "tucker_als_complete: empty mask");
  mean /= static_cast<double>(observed);

  Tensor3 x = obs.y;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (obs.o.data()[i] == 0.0) x.data()[i] = mean;

  TuckerFit fit = hooi_decompose(x, ranks, 0);  // HOSVD init of the factors
  Tensor3 recon = tucker_reconstruct(fit);
  Tensor3 prev_recon = recon;
  for (int it = 0; it < iters; ++it) {
    for (int l = 1; l <= 3; ++l) {
      Tensor3 b = x;
      for (int k = 1; k <= 3; ++k)
        if (k != l) b = mode_product(b, fit.u(k).transposed(), k);
      fit.u(l) = detail::leading_left_singular(unfold(b, l), ranks[l - 1]);
    }
    fit.core = mode_product(
        mode_product(mode_product(x, fit.u1.transposed(), 1), fit.u2.transposed(), 2),
        fit.u3.transposed(), 3);
    recon = tucker_reconstruct(fit);

    double obs_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (obs.o.data()[i] != 0.0) {
        const double r = obs.y.data()[i] - recon.data()[i];
        obs_res += r * r;
      }
    }
    fit.fit_history.push_back(std::sqrt(obs_res));

    for (std::size_t i = 0; i < x.size(); ++i)
      if (obs.o.data()[i] == 0.0) x.data()[i] = recon.data()[i];

    const double change =
        fro_norm(sub(recon, prev_recon)) / std::max(fro_norm(prev_recon), 1e-300);
    prev_recon = recon;
    if (change < tol) break;
  }
  if (fit_out) *fit_out = fit;
  return recon;
}

}  // namespace tap
