#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "tap/attention.hpp"
#include "tap/rng.hpp"
#include "tap/tensor.hpp"

namespace tap {

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Distribution of the sparsemax support size n(z) for a length-N score row
// with i.i.d. standard normal entries.
struct SupportDistribution {
  int n = 0;
  std::vector<double> p;  // p[i] = P(n(z) = i+1)
  double expectation = 0.0;

  double expected_core_nonzeros() const {
    return static_cast<double>(n) * expectation;
  }
};

// Three-case closed form. With the stop probability at support size k being
// 2 - 2*Phi(1/sqrt(2k)) and the continuation factor at step i being
// 2*Phi(1/sqrt(2i-2)) - 1, the cases telescope and the masses sum to one:
//   P(n=1) = 2 - 2 Phi(1/sqrt(2))
//   P(n=k) = (2 - 2 Phi(1/sqrt(2k))) * prod_{i=2..k} (2 Phi(1/sqrt(2i-2)) - 1)
//   P(n=N) = prod_{i=2..N} (2 Phi(1/sqrt(2i-2)) - 1)
inline SupportDistribution support_distribution(int n) {
  detail::require(n >= 2, "support_distribution: N must be >= 2");
  SupportDistribution d;
  d.n = n;
  d.p.resize(n);
  double prod = 1.0;  // prod_{i=2..k} continuation factors
  for (int k = 1; k <= n; ++k) {
    if (k > 1) prod *= 2.0 * normal_cdf(1.0 / std::sqrt(2.0 * k - 2.0)) - 1.0;
    d.p[k - 1] = k < n ? (2.0 - 2.0 * normal_cdf(1.0 / std::sqrt(2.0 * k))) * prod
                       : prod;
    d.expectation += k * d.p[k - 1];
  }
  return d;
}

// Variant with the continuation factor evaluated at 1/(2i-2) instead of
// 1/sqrt(2i-2). It does not telescope, so its masses sum below one for
// N >= 3; kept only for the consistency report.
inline SupportDistribution support_distribution_unsquared_variant(int n) {
  detail::require(n >= 2, "support_distribution: N must be >= 2");
  SupportDistribution d;
  d.n = n;
  d.p.resize(n);
  double prod = 1.0;
  double prod_sqrt = 1.0;
  for (int k = 1; k <= n; ++k) {
    if (k > 1) {
      prod *= 2.0 * normal_cdf(1.0 / (2.0 * k - 2.0)) - 1.0;
      prod_sqrt *= 2.0 * normal_cdf(1.0 / std::sqrt(2.0 * k - 2.0)) - 1.0;
    }
    d.p[k - 1] = k < n
                     ? (2.0 - 2.0 * normal_cdf(1.0 / std::sqrt(2.0 * k))) * prod
                     : prod_sqrt;
    d.expectation += k * d.p[k - 1];
  }
  return d;
}

// Empirical support distribution of sparsemax applied to standard normal
// vectors.
inline SupportDistribution monte_carlo_support(int n, int trials,
                                               std::uint64_t seed) {
  detail::require(n >= 2, "monte_carlo_support: N must be >= 2");
  detail::require(trials >= 10000, "monte_carlo_support: need >= 1e4 trials");
  Rng rng(seed);
  std::vector<double> z(n);
  std::vector<std::int64_t> counts(n, 0);
  for (int t = 0; t < trials; ++t) {
    for (double& v : z) v = rng.normal();
    counts[sparsemax(z).support - 1]++;
  }
  SupportDistribution d;
  d.n = n;
  d.p.resize(n);
  for (int k = 1; k <= n; ++k) {
    d.p[k - 1] = static_cast<double>(counts[k - 1]) / trials;
    d.expectation += k * d.p[k - 1];
  }
  return d;
}

inline double total_variation_distance(const SupportDistribution& a,
                                       const SupportDistribution& b) {
  detail::require(a.n == b.n, "total_variation_distance: lengths differ");
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += std::fabs(a.p[i] - b.p[i]);
  return 0.5 * s;
}

// Inputs of the covering-number and generalization-gap bounds.
struct BoundInputs {
  double alpha = 1.0;    // Frobenius radius of the core
  double beta = 1.0;     // Frobenius radius of each factor
  double lipschitz = 1.0;  // T of the activation
  double epsilon = 0.01;   // net radius
  double delta = 0.05;     // failure probability
  double observed = 0.0;   // |Omega|
  Dims3 dims{};            // (I1,I2,I3)
  Dims3 core_dims{};       // (N1,N2,N3)
  double field_max = 1.0;  // nu = max |ground truth|
  double noise_max = 0.0;  // v = max |noise|
  double core_nonzeros = 0.0;  // ||S||_0 (may be the Lemma-1 expectation)
};

inline void validate(const BoundInputs& b) {
  detail::require(b.alpha > 0.0 && b.beta > 0.0 && b.lipschitz > 0.0,
                  "bounds: alpha, beta, T must be positive");
  detail::require(b.epsilon > 0.0, "bounds: epsilon must be positive");
  detail::require(b.delta > 0.0 && b.delta < 1.0, "bounds: delta must lie in (0,1)");
  const double total = static_cast<double>(b.dims[0]) * b.dims[1] * b.dims[2];
  detail::require(b.observed >= 1.0 && b.observed <= total,
                  "bounds: |Omega| must lie in [1, I1*I2*I3]");
  detail::require(b.core_nonzeros >= 0.0, "bounds: core nonzeros must be >= 0");
}

// Natural log of the covering-number bound:
//   (s0 + sum_l N_l I_l) log(3T(beta^3 + 3 alpha beta^2)/eps)
//     + s0 log alpha + (sum_l N_l I_l) log beta.
// The first log factor may be negative for large eps; that is permitted.
inline double covering_log_bound(const BoundInputs& b) {
  validate(b);
  double factor_dof = 0.0;
  for (int l = 0; l < 3; ++l)
    factor_dof += static_cast<double>(b.core_dims[l]) * b.dims[l];
  const double lead = std::log(3.0 * b.lipschitz *
                               (std::pow(b.beta, 3) + 3.0 * b.alpha * b.beta * b.beta) /
                               b.epsilon);
  return (b.core_nonzeros + factor_dof) * lead +
         b.core_nonzeros * std::log(b.alpha) + factor_dof * std::log(b.beta);
}

inline double xi_value(const BoundInputs& b) {
  const double s = b.field_max + b.noise_max + b.alpha * std::pow(b.beta, 3);
  return s * s;
}

inline double omega_value(const BoundInputs& b) {
  const double total = static_cast<double>(b.dims[0]) * b.dims[1] * b.dims[2];
  return 1.0 / b.observed + 1.0 / (b.observed * total) - 1.0 / total;
}

// Generalization-gap bound:
//   2 eps / sqrt(|Omega|) + (xi^2 omega / 2 * (log 2 + logN - log delta))^(1/4),
// with logN the covering log bound floored at 0 (a nonempty net has at least
// one element).
inline double gap_bound(const BoundInputs& b) {
  validate(b);
  const double omega = omega_value(b);
  detail::require(omega > 0.0, "gap_bound: omega must be positive");
  const double log_n = std::max(covering_log_bound(b), 0.0);
  const double bracket =
      xi_value(b) * xi_value(b) * omega / 2.0 *
      (std::log(2.0) + log_n - std::log(b.delta));
  return 2.0 * b.epsilon / std::sqrt(b.observed) + std::pow(bracket, 0.25);
}

// Quantities measured on a concrete run, used to assemble the full error
// bound: recovery error per entry <= gap bound + noise terms + scaled
// representation error.
struct MeasuredQuantities {
  double noise_fro = 0.0;          // ||N||_F
  double masked_noise_fro = 0.0;   // ||O .* N||_F
  double representation_error = 0.0;  // ||X_best - truth||_F proxy
  std::optional<double> gap_measured;  // signed sqrt(loss1) - sqrt(loss2)
};

struct TheoryReport {
  BoundInputs inputs;
  double xi = 0.0;
  double omega = 0.0;
  double lemma1_expectation = 0.0;       // E[n(z)] at N = cube count
  double lemma1_expected_nonzeros = 0.0; // N * E[n(z)]
  double covering_log = 0.0;
  double gap = 0.0;
  double noise_term = 0.0;
  double representation_term = 0.0;
  double recovery_bound = 0.0;  // right side of the per-entry error bound
  std::optional<double> gap_measured;
  bool gap_within_bound = true;
};

inline TheoryReport recoverability_report(const BoundInputs& b,
                                          const MeasuredQuantities& measured,
                                          int attention_rows) {
  validate(b);
  TheoryReport r;
  r.inputs = b;
  r.xi = xi_value(b);
  r.omega = omega_value(b);
  const SupportDistribution lemma1 = support_distribution(attention_rows);
  r.lemma1_expectation = lemma1.expectation;
  r.lemma1_expected_nonzeros = lemma1.expected_core_nonzeros();
  r.covering_log = covering_log_bound(b);
  r.gap = gap_bound(b);
  const double total = static_cast<double>(b.dims[0]) * b.dims[1] * b.dims[2];
  r.noise_term = measured.noise_fro / std::sqrt(total) +
                 measured.masked_noise_fro / std::sqrt(b.observed);
  r.representation_term = measured.representation_error / std::sqrt(b.observed);
  r.recovery_bound = r.gap + r.noise_term + r.representation_term;
  r.gap_measured = measured.gap_measured;
  if (measured.gap_measured)
    r.gap_within_bound = std::fabs(*measured.gap_measured) <= r.gap;
  return r;
}

}  // namespace tap
