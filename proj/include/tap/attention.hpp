#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "tap/tensor.hpp"

namespace tap {

// Floor for the norm-scaling matrix; keeps scores finite when a cube window
// contains no observed entries (all-zero embedding row).
inline constexpr double kNormFloor = 1e-12;

// Query/key embedding of one attention head; both matrices are
// (K1K2K3 x M).
struct AttentionHead {
  Matrix w_query;
  Matrix w_key;
};

struct SparsemaxResult {
  std::vector<double> p;
  int support = 0;   // count of strictly positive outputs
  double tau = 0.0;  // threshold subtracted from the support entries
};

namespace detail {

// Core of the simplex projection: writes p, returns (support, tau). `order`
// is scratch reused across calls.
inline std::pair<int, double> sparsemax_into(const double* z, int n, double* p,
                                             std::vector<int>& order) {
  order.resize(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return z[a] > z[b]; });
  double cum = 0.0;
  int k = 0;
  double cum_k = 0.0;
  for (int i = 0; i < n; ++i) {
    const double zi = z[order[i]];
    cum += zi;
    if (1.0 + (i + 1) * zi > cum) {
      k = i + 1;
      cum_k = cum;
    }
  }
  // for any finite z the n=1 inequality 1 + z_(1) > z_(1) holds, so k = 0
  // can only mean NaN scores
  if (k == 0) throw std::runtime_error("sparsemax: non-finite scores");
  const double tau = (cum_k - 1.0) / k;
  int support = 0;
  for (int i = 0; i < n; ++i) {
    const double v = z[i] - tau;
    if (v > 0.0) {
      p[i] = v;
      ++support;
    } else {
      p[i] = 0.0;
    }
  }
  return {support, tau};
}

}  // namespace detail

// Projection of z onto the probability simplex:
//   sort z descending, n(z) = max{ n : 1 + n z_(n) > sum_{j<=n} z_(j) },
//   tau = (sum_{j<=n(z)} z_(j) - 1)/n(z), p_i = max(z_i - tau, 0).
// Sorting is stable on the original index so tie reporting is deterministic.
inline SparsemaxResult sparsemax(std::span<const double> z) {
  const int n = static_cast<int>(z.size());
  detail::require(n >= 1, "sparsemax: empty input");
  SparsemaxResult r;
  r.p.resize(n);
  std::vector<int> order;
  auto [support, tau] = detail::sparsemax_into(z.data(), n, r.p.data(), order);
  r.support = support;
  r.tau = tau;
  return r;
}

// M(n1,n2) = max(||q_{n1}|| * ||k_{n2}||, kNormFloor).
inline Matrix scaling_matrix(const Matrix& q, const Matrix& k) {
  detail::require(q.cols() == k.cols(),
                  "scaling_matrix: embedding dims differ");
  std::vector<double> qn(q.rows()), kn(k.rows());
  for (int i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < q.cols(); ++j) s += q(i, j) * q(i, j);
    qn[i] = std::sqrt(s);
  }
  for (int i = 0; i < k.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < k.cols(); ++j) s += k(i, j) * k(i, j);
    kn[i] = std::sqrt(s);
  }
  Matrix m(q.rows(), k.rows());
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < k.rows(); ++j)
      m(i, j) = std::max(qn[i] * kn[j], kNormFloor);
  return m;
}

// Row-normalized sparse attention map. For h heads the per-head score
// matrices are stacked vertically (h*N x N); every row is sparsemaxed
// independently over its N entries.
struct AttentionMap {
  Matrix scores;
  std::vector<int> support_count;
};

// Intermediates of the attention stage, kept for the backward pass.
struct AttentionStage {
  std::vector<Matrix> q, k;              // per head, N x M
  std::vector<std::vector<double>> q_norm, k_norm;
  Matrix z;                              // stacked scaled scores, rows x N
  AttentionMap map;
  std::vector<std::vector<int>> support; // per row, indices with p > 0
  std::vector<double> tau;
};

inline AttentionStage attention_stage(const Matrix& p,
                                      std::span<const AttentionHead> heads) {
  detail::require(!heads.empty(), "attention_stage: need at least one head");
  const int n = p.rows();
  const int h = static_cast<int>(heads.size());
  AttentionStage st;
  st.z = Matrix(h * n, n);
  for (int i = 0; i < h; ++i) {
    detail::require(heads[i].w_query.rows() == p.cols() &&
                        heads[i].w_key.rows() == p.cols(),
                    "attention_stage: embedding rows must match cube length");
    Matrix q = matmul(p, heads[i].w_query);
    Matrix k = matmul(p, heads[i].w_key);
    std::vector<double> qn(n), kn(n);
    for (int r = 0; r < n; ++r) {
      double sq = 0.0, sk = 0.0;
      for (int c = 0; c < q.cols(); ++c) {
        sq += q(r, c) * q(r, c);
        sk += k(r, c) * k(r, c);
      }
      qn[r] = std::sqrt(sq);
      kn[r] = std::sqrt(sk);
    }
    Matrix e = matmul_nt(q, k);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        st.z(i * n + r, c) = e(r, c) / std::max(qn[r] * kn[c], kNormFloor);
    st.q.push_back(std::move(q));
    st.k.push_back(std::move(k));
    st.q_norm.push_back(std::move(qn));
    st.k_norm.push_back(std::move(kn));
  }
  const int rows = h * n;
  st.map.scores = Matrix(rows, n);
  st.map.support_count.resize(rows);
  st.support.resize(rows);
  st.tau.resize(rows);
  std::vector<int> order;
  for (int r = 0; r < rows; ++r) {
    const double* zrow = st.z.data().data() + static_cast<std::size_t>(r) * n;
    double* prow = st.map.scores.data().data() + static_cast<std::size_t>(r) * n;
    auto [support, tau] = detail::sparsemax_into(zrow, n, prow, order);
    st.map.support_count[r] = support;
    st.tau[r] = tau;
    st.support[r].reserve(support);
    for (int c = 0; c < n; ++c)
      if (prow[c] > 0.0) st.support[r].push_back(c);
  }
  return st;
}

inline AttentionMap attention_map(const Matrix& p,
                                  std::span<const AttentionHead> heads) {
  return attention_stage(p, heads).map;
}

}  // namespace tap
