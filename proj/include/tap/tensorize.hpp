#pragma once

#include <array>

#include "tap/attention.hpp"
#include "tap/patch.hpp"
#include "tap/tensor.hpp"

namespace tap {

// Core tensor dims (R1,R2,R3) = (h1*J1^2, h2*J2^2, h3*J3^2).
inline Dims3 core_dims(const PatchGrid& g, Dims3 heads) {
  return {heads[0] * g.counts[0] * g.counts[0],
          heads[1] * g.counts[1] * g.counts[1],
          heads[2] * g.counts[2] * g.counts[2]};
}

namespace detail {

inline void check_mhtap_shape(const Matrix& map, const PatchGrid& grid,
                              Dims3 heads) {
  const int h = heads[0] * heads[1] * heads[2];
  require(heads[0] >= 1 && heads[1] >= 1 && heads[2] >= 1,
          "tensorize: heads shape entries must be >= 1");
  require(map.cols() == grid.cube_count(),
          "tensorize: map columns must equal the cube count");
  require(map.rows() == h * grid.cube_count(),
          "tensorize: map rows must equal h1*h2*h3 * cube count");
}

// Base offset into the core for map row `row` (= head * N + cube): the
// contribution of the head index g_l and the block coords m_l to core axis
// g_l*J_l^2 + m_l*J_l + j_l, leaving the offset digits (j1,j2,j3) to the
// caller's loop. This closed form coincides with viewing the map as
// (h1,h2,h3,J1,J2,J3,J1,J2,J3) and permuting heads and block indices in
// front of the offset indices before reshaping.
inline std::size_t core_row_base(const PatchGrid& grid, Dims3 heads, Dims3 rd,
                                 int row) {
  const int n = grid.cube_count();
  const Dims3 j = grid.counts;
  const int head = row / n;
  const Dims3 m = cube_index_to_block(grid, row % n);
  const Dims3 g{head / (heads[1] * heads[2]), (head / heads[2]) % heads[1],
                head % heads[2]};
  return static_cast<std::size_t>(g[0] * j[0] + m[0]) * j[0] * rd[1] * rd[2] +
         static_cast<std::size_t>(g[1] * j[1] + m[1]) * j[1] * rd[2] +
         static_cast<std::size_t>(g[2] * j[2] + m[2]) * j[2];
}

}  // namespace detail

inline Tensor3 tensorize_mhtap(const Matrix& map, const PatchGrid& grid,
                               Dims3 heads) {
  detail::check_mhtap_shape(map, grid, heads);
  const Dims3 rd = core_dims(grid, heads);
  const Dims3 j = grid.counts;
  const std::size_t r23 = static_cast<std::size_t>(rd[1]) * rd[2];
  Tensor3 core(rd);
  for (int row = 0; row < map.rows(); ++row) {
    const std::size_t base = detail::core_row_base(grid, heads, rd, row);
    const double* src =
        map.data().data() + static_cast<std::size_t>(row) * map.cols();
    for (int a = 0; a < j[0]; ++a) {
      for (int b = 0; b < j[1]; ++b) {
        double* dst = core.data().data() + base +
                      static_cast<std::size_t>(a) * r23 +
                      static_cast<std::size_t>(b) * rd[2];
        for (int c = 0; c < j[2]; ++c) dst[c] = *src++;
      }
    }
  }
  return core;
}

inline Tensor3 tensorize_tap(const AttentionMap& map, const PatchGrid& grid) {
  return tensorize_mhtap(map.scores, grid, {1, 1, 1});
}

inline Tensor3 tensorize_tap(const Matrix& map, const PatchGrid& grid) {
  return tensorize_mhtap(map, grid, {1, 1, 1});
}

// Exact inverse of tensorize_mhtap (the tensorization is a bijection on
// entries).
inline Matrix untensorize_mhtap(const Tensor3& core, const PatchGrid& grid,
                                Dims3 heads) {
  const Dims3 rd = core_dims(grid, heads);
  detail::require(core.dims() == rd,
                  "untensorize: core dims do not match grid/heads");
  const Dims3 j = grid.counts;
  const std::size_t r23 = static_cast<std::size_t>(rd[1]) * rd[2];
  const int h = heads[0] * heads[1] * heads[2];
  Matrix map(h * grid.cube_count(), grid.cube_count());
  for (int row = 0; row < map.rows(); ++row) {
    const std::size_t base = detail::core_row_base(grid, heads, rd, row);
    double* dst = map.data().data() + static_cast<std::size_t>(row) * map.cols();
    for (int a = 0; a < j[0]; ++a) {
      for (int b = 0; b < j[1]; ++b) {
        const double* src = core.data().data() + base +
                            static_cast<std::size_t>(a) * r23 +
                            static_cast<std::size_t>(b) * rd[2];
        for (int c = 0; c < j[2]; ++c) *dst++ = src[c];
      }
    }
  }
  return map;
}

inline Matrix untensorize_tap(const Tensor3& core, const PatchGrid& grid) {
  return untensorize_mhtap(core, grid, {1, 1, 1});
}

}  // namespace tap
