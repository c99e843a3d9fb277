#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tap/tensor.hpp"

namespace tap {

// sqrt(||x - x_true||_F^2 / (I1 I2 I3))
inline double rmse(const Tensor3& x, const Tensor3& x_true) {
  detail::require_same_dims(x, x_true, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data()[i] - x_true.data()[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline constexpr double kLogFloor = 1e-12;

// Scaled log-domain normalized reconstruction error
//   100 * ||log x - log x_true||_F^2 / ||log x_true||_F^2,
// with both tensors floored at kLogFloor before the log. Invariant under a
// change of log base. Records a warning if the ground truth needed
// flooring.
inline double slnre(const Tensor3& x, const Tensor3& x_true,
                    std::vector<std::string>* warnings = nullptr) {
  detail::require_same_dims(x, x_true, "slnre");
  double num = 0.0, den = 0.0;
  std::size_t floored_truth = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = x_true.data()[i];
    if (t < kLogFloor) {
      t = kLogFloor;
      ++floored_truth;
    }
    const double lx = std::log(std::max(x.data()[i], kLogFloor));
    const double lt = std::log(t);
    num += (lx - lt) * (lx - lt);
    den += lt * lt;
  }
  if (floored_truth > 0 && warnings) {
    warnings->push_back("slnre: " + std::to_string(floored_truth) +
                        " non-positive ground-truth entries floored at 1e-12");
  }
  return 100.0 * num / den;
}

struct EvalResult {
  double value = 0.0;             // rmse or slnre, per `metric`
  std::string metric;
  std::vector<double> per_slice;  // same metric per mode-3 slice
  double runtime_seconds = 0.0;
  std::string config_echo;
  std::vector<std::string> warnings;
};

inline EvalResult evaluate(const Tensor3& x, const Tensor3& x_true,
                           const std::string& metric) {
  detail::require(metric == "rmse" || metric == "slnre",
                  "evaluate: metric must be rmse or slnre");
  EvalResult r;
  r.metric = metric;
  const auto [i1, i2, i3] = x.dims();
  for (int k = 0; k < i3; ++k) {
    Tensor3 xs(i1, i2, 1), ts(i1, i2, 1);
    for (int a = 0; a < i1; ++a)
      for (int b = 0; b < i2; ++b) {
        xs(a, b, 0) = x(a, b, k);
        ts(a, b, 0) = x_true(a, b, k);
      }
    r.per_slice.push_back(metric == "rmse" ? rmse(xs, ts)
                                           : slnre(xs, ts, &r.warnings));
  }
  r.value = metric == "rmse" ? rmse(x, x_true) : slnre(x, x_true, &r.warnings);
  return r;
}

}  // namespace tap
