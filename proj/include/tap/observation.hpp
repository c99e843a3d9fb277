#pragma once

#include <cmath>
#include <string>

#include "tap/tensor.hpp"

namespace tap {

// Masked observations: Y holds the observed values (zero elsewhere), O is
// the binary indicator. norm_lo/norm_hi are the observed-entry min/max used
// by the trainer's min-max normalization.
struct ObservationSet {
  Tensor3 y;
  Tensor3 o;
  double norm_lo = 0.0;
  double norm_hi = 1.0;
  std::string provenance;  // generator specs and seeds, free-form

  std::size_t observed_count() const {
    std::size_t n = 0;
    for (double v : o.data()) n += (v != 0.0);
    return n;
  }
};

inline ObservationSet make_observation_set(Tensor3 y, Tensor3 o,
                                           std::string provenance = {}) {
  detail::require(y.dims() == o.dims(), "ObservationSet: Y/O dims differ");
  std::size_t observed = 0;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double m = o.data()[i];
    detail::require(m == 0.0 || m == 1.0, "ObservationSet: mask must be binary");
    if (m == 0.0) {
      detail::require(y.data()[i] == 0.0,
                      "ObservationSet: Y must be zero where unobserved");
      continue;
    }
    ++observed;
    const double v = y.data()[i];
    if (first || v < lo) lo = v;
    if (first || v > hi) hi = v;
    first = false;
  }
  detail::require(observed >= 1, "ObservationSet: mask has no observed entries");
  ObservationSet s{std::move(y), std::move(o), lo, hi, std::move(provenance)};
  if (s.norm_hi <= s.norm_lo) s.norm_hi = s.norm_lo + 1.0;  // single-value edge
  return s;
}

}  // namespace tap
