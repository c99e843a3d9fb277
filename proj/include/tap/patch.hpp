#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "tap/tensor.hpp"

namespace tap {

// Sliding-window geometry over a field: window (K1,K2,K3), stride
// (S1,S2,S3), per-mode cube counts J_l = (I_l - K_l)/S_l + 1 and the total
// cube count N = J1*J2*J3. The strides must tile the field exactly.
struct PatchGrid {
  Dims3 window{};
  Dims3 stride{};
  Dims3 field_dims{};
  Dims3 counts{};

  int cube_count() const { return counts[0] * counts[1] * counts[2]; }
  int cube_len() const { return window[0] * window[1] * window[2]; }
};

inline PatchGrid make_grid(Dims3 field_dims, Dims3 window, Dims3 stride) {
  PatchGrid g{window, stride, field_dims, {}};
  for (int l = 0; l < 3; ++l) {
    const int i = field_dims[l], k = window[l], s = stride[l];
    detail::require(i > 0, "make_grid: field dims must be positive");
    detail::require(k >= 1 && k <= i,
                    "make_grid: window must satisfy 1 <= K <= I in mode " +
                        std::to_string(l + 1));
    detail::require(s >= 1, "make_grid: stride must be >= 1 in mode " +
                                std::to_string(l + 1));
    if ((i - k) % s != 0) {
      throw std::invalid_argument(
          "make_grid: window/stride do not tile mode " + std::to_string(l + 1) +
          " exactly ((I-K) % S != 0 with I=" + std::to_string(i) +
          ", K=" + std::to_string(k) + ", S=" + std::to_string(s) + ")");
    }
    g.counts[l] = (i - k) / s + 1;
  }
  return g;
}

// Block coordinates (m1,m2,m3) of cube n, everything 0-based:
//   m1 = n / (J2*J3), m2 = (n % (J2*J3)) / J3, m3 = n % J3.
inline Dims3 cube_index_to_block(const PatchGrid& g, int n) {
  detail::require(n >= 0 && n < g.cube_count(),
                  "cube_index_to_block: cube index out of range");
  const int j2j3 = g.counts[1] * g.counts[2];
  return {n / j2j3, (n % j2j3) / g.counts[2], n % g.counts[2]};
}

// Cube matrix P (N x K1K2K3): row n is cube n vectorized mode-3-fastest,
// matching the Tensor3 layout.
struct PatchMatrix {
  PatchGrid grid;
  Matrix p;
};

inline PatchMatrix extract(const Tensor3& obs, const PatchGrid& g) {
  detail::require(obs.dims() == g.field_dims,
                  "extract: observation dims do not match grid");
  Matrix p(g.cube_count(), g.cube_len());
  for (int n = 0; n < g.cube_count(); ++n) {
    const Dims3 m = cube_index_to_block(g, n);
    int col = 0;
    for (int a = 0; a < g.window[0]; ++a)
      for (int b = 0; b < g.window[1]; ++b)
        for (int c = 0; c < g.window[2]; ++c)
          p(n, col++) = obs(m[0] * g.stride[0] + a, m[1] * g.stride[1] + b,
                            m[2] * g.stride[2] + c);
  }
  return {g, std::move(p)};
}

}  // namespace tap
