#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tap/observation.hpp"
#include "tap/rng.hpp"
#include "tap/tensor.hpp"

namespace tap {

// ---------------------------------------------------------------------------
// Radio maps: X = sum_r S_r o c_r with a joint path-loss / log-normal
// shadowing SLF and a multi-subband sinc^2 PSD.
// ---------------------------------------------------------------------------

struct Emitter {
  double loc_x = 0.0;       // 2D grid coordinates, 0-based pixels
  double loc_y = 0.0;
  double path_loss_exp = 2.0;  // gamma_r
  double shadow_var = 0.0;     // eta_r
};

struct RadioMapSpec {
  Dims3 dims{};
  std::vector<Emitter> emitters;
  double d_corr = 50.0;   // shadowing decorrelation distance
  int subbands = 10;      // PSD subband count M (clamped to I3)
  std::uint64_t seed = 0;
};

// Emitters drawn uniformly inside the grid with shared gamma/eta.
inline RadioMapSpec make_radio_spec(Dims3 dims, int emitter_count, double gamma,
                                    double eta, double d_corr,
                                    std::uint64_t seed) {
  detail::require(emitter_count >= 1, "radio spec: need at least one emitter");
  RadioMapSpec spec;
  spec.dims = dims;
  spec.d_corr = d_corr;
  spec.seed = seed;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (int r = 0; r < emitter_count; ++r) {
    Emitter e;
    e.loc_x = rng.uniform(0.0, dims[0] - 1.0);
    e.loc_y = rng.uniform(0.0, dims[1] - 1.0);
    e.path_loss_exp = gamma;
    e.shadow_var = eta;
    spec.emitters.push_back(e);
  }
  return spec;
}

namespace detail {

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Cholesky factor of exp(-dist/d_corr) over the I1 x I2 pixel grid, with a
// 1e-10 diagonal jitter. Scaling a unit-variance draw by sqrt(eta_r) gives
// the per-emitter covariance eta_r exp(-d/d_corr).
inline Eigen::MatrixXd shadowing_factor(int i1, int i2, double d_corr) {
  const int n = i1 * i2;
  Eigen::MatrixXd c(n, n);
  for (int a = 0; a < n; ++a) {
    const int ax = a / i2, ay = a % i2;
    for (int b = 0; b <= a; ++b) {
      const int bx = b / i2, by = b % i2;
      const double d = std::hypot(double(ax - bx), double(ay - by));
      c(a, b) = c(b, a) = std::exp(-d / d_corr);
    }
  }
  c.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "shadowing covariance is not positive definite after jitter");
  }
  return llt.matrixL();
}

}  // namespace detail

// One correlated shadowing realization v (I1 x I2): zero-mean Gaussian with
// covariance eta * exp(-||m - m'|| / d_corr), via the exact Cholesky factor.
inline Matrix sample_shadowing(int i1, int i2, double d_corr, double eta,
                               Rng& rng) {
  const Eigen::MatrixXd l = detail::shadowing_factor(i1, i2, d_corr);
  Eigen::VectorXd z(i1 * i2);
  for (int a = 0; a < i1 * i2; ++a) z(a) = rng.normal();
  const Eigen::VectorXd v = std::sqrt(eta) * (l * z);
  Matrix out(i1, i2);
  for (int a = 0; a < i1; ++a)
    for (int b = 0; b < i2; ++b) out(a, b) = v(a * i2 + b);
  return out;
}

inline Tensor3 gen_radio_map(const RadioMapSpec& spec) {
  const auto [i1, i2, i3] = spec.dims;
  detail::require(!spec.emitters.empty(), "gen_radio_map: no emitters");
  detail::require(spec.d_corr > 0.0, "gen_radio_map: d_corr must be > 0");
  for (const auto& e : spec.emitters) {
    detail::require(e.loc_x >= 0.0 && e.loc_x <= i1 - 1.0 && e.loc_y >= 0.0 &&
                        e.loc_y <= i2 - 1.0,
                    "gen_radio_map: emitter outside grid");
    detail::require(e.shadow_var >= 0.0, "gen_radio_map: eta must be >= 0");
  }
  const Eigen::MatrixXd l = detail::shadowing_factor(i1, i2, spec.d_corr);
  const int m_sub = std::min(spec.subbands, i3);
  Rng rng(spec.seed);
  Tensor3 x(spec.dims);
  Eigen::VectorXd z(i1 * i2);
  for (const auto& e : spec.emitters) {
    for (int a = 0; a < i1 * i2; ++a) z(a) = rng.normal();
    Eigen::VectorXd shadow = std::sqrt(e.shadow_var) * (l * z);
    // PSD: subband centers drawn over the frequency bins without
    // replacement, amplitudes U(0.5,2.5), widths U(2,4).
    std::vector<std::size_t> centers =
        rng.sample_without_replacement(static_cast<std::size_t>(i3), m_sub);
    std::vector<double> amp(m_sub), width(m_sub);
    for (int s = 0; s < m_sub; ++s) {
      amp[s] = rng.uniform(0.5, 2.5);
      width[s] = rng.uniform(2.0, 4.0);
    }
    std::vector<double> psd(i3, 0.0);
    for (int k = 0; k < i3; ++k) {
      for (int s = 0; s < m_sub; ++s) {
        const double u =
            detail::sinc((k - static_cast<double>(centers[s])) / width[s]);
        psd[k] += amp[s] * u * u;
      }
    }
    for (int a = 0; a < i1; ++a) {
      for (int b = 0; b < i2; ++b) {
        // distance floored at one grid unit to avoid the singularity at the
        // emitter pixel
        const double d =
            std::max(std::hypot(a - e.loc_x, b - e.loc_y), 1.0);
        const double slf = std::pow(d, -e.path_loss_exp) *
                           std::pow(10.0, shadow(a * i2 + b) / 10.0);
        for (int k = 0; k < i3; ++k) x(a, b, k) += slf * psd[k];
      }
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Smooth synthetic fields: a stratified background (constant in the two
// spatial modes, logistic ramp along mode 3) plus localized separable
// Gaussian features. `components` separable terms in total, so the
// multilinear rank is at most (components, components, components). Values
// are scaled so max |x| = 1.
// ---------------------------------------------------------------------------

inline Tensor3 gen_smooth_field(Dims3 dims, std::uint64_t seed, int components) {
  detail::require(components >= 1, "gen_smooth_field: components must be >= 1");
  Rng rng(seed);
  Tensor3 x(dims);
  auto grid_t = [](int i, int extent) {
    return extent > 1 ? static_cast<double>(i) / (extent - 1) : 0.0;
  };
  for (int c = 0; c < components; ++c) {
    std::array<std::vector<double>, 3> factor;
    double amp;
    if (c == 0) {
      const double mid = rng.uniform(0.30, 0.45);
      const double steep = rng.uniform(0.08, 0.14);
      for (int l = 0; l < 3; ++l) {
        factor[l].resize(dims[l]);
        for (int i = 0; i < dims[l]; ++i) {
          const double t = grid_t(i, dims[l]);
          factor[l][i] = l < 2 ? 1.0 : 1.0 / (1.0 + std::exp((t - mid) / steep));
        }
      }
      amp = 1.0;
    } else {
      for (int l = 0; l < 3; ++l) {
        const double mu = l < 2 ? rng.uniform(0.15, 0.85) : rng.uniform(0.10, 0.90);
        const double w = l < 2 ? rng.uniform(0.10, 0.20) : rng.uniform(0.15, 0.35);
        factor[l].resize(dims[l]);
        for (int i = 0; i < dims[l]; ++i) {
          const double t = grid_t(i, dims[l]);
          factor[l][i] = std::exp(-0.5 * (t - mu) * (t - mu) / (w * w));
        }
      }
      amp = 0.3 * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    for (int a = 0; a < dims[0]; ++a)
      for (int b = 0; b < dims[1]; ++b)
        for (int k = 0; k < dims[2]; ++k)
          x(a, b, k) += amp * factor[0][a] * factor[1][b] * factor[2][k];
  }
  const double m = max_abs(x);
  if (m > 0.0) scale(x, 1.0 / m);
  return x;
}

// ---------------------------------------------------------------------------
// Masks and noise.
// ---------------------------------------------------------------------------

enum class MaskKind { kElementRandom, kFiberWise };

struct MaskSpec {
  MaskKind kind = MaskKind::kElementRandom;
  double rate = 0.1;  // rho
  std::uint64_t seed = 0;
};

enum class NoiseKind { kNone, kGaussian, kLaplacian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double variance = 0.0;  // sigma^2
  std::uint64_t seed = 0;
};

// Y = O .* x with an exact observed count: floor(rate * total) entries for
// element-random masks, floor(rate * I1*I2) whole mode-3 fibers otherwise.
inline std::pair<Tensor3, Tensor3> apply_mask(const Tensor3& x,
                                              const MaskSpec& spec) {
  detail::require(spec.rate > 0.0 && spec.rate <= 1.0,
                  "apply_mask: rate must lie in (0, 1]");
  const auto [i1, i2, i3] = x.dims();
  Tensor3 o(x.dims());
  Rng rng(spec.seed);
  if (spec.kind == MaskKind::kElementRandom) {
    const std::size_t total = x.size();
    const std::size_t count = static_cast<std::size_t>(spec.rate * total);
    detail::require(count >= 1, "apply_mask: rate selects no entries");
    for (std::size_t idx : rng.sample_without_replacement(total, count))
      o.data()[idx] = 1.0;
  } else {
    const std::size_t fibers = static_cast<std::size_t>(i1) * i2;
    const std::size_t count = static_cast<std::size_t>(spec.rate * fibers);
    detail::require(count >= 1, "apply_mask: rate selects no fibers");
    for (std::size_t f : rng.sample_without_replacement(fibers, count)) {
      const int a = static_cast<int>(f) / i2;
      const int b = static_cast<int>(f) % i2;
      for (int k = 0; k < i3; ++k) o(a, b, k) = 1.0;
    }
  }
  Tensor3 y = hadamard(x, o);
  return {std::move(y), std::move(o)};
}

inline Tensor3 add_noise(const Tensor3& x, const NoiseSpec& spec) {
  detail::require(spec.variance >= 0.0, "add_noise: variance must be >= 0");
  Tensor3 y = x;
  if (spec.kind == NoiseKind::kNone || spec.variance == 0.0) return y;
  Rng rng(spec.seed);
  const double sigma = std::sqrt(spec.variance);
  if (spec.kind == NoiseKind::kGaussian) {
    for (double& v : y.data()) v += sigma * rng.normal();
  } else {
    const double b = sigma / std::sqrt(2.0);  // variance of Laplace(b) is 2b^2
    for (double& v : y.data()) v += rng.laplace(b);
  }
  return y;
}

}  // namespace tap
