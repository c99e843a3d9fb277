#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tap {

using Dims3 = std::array<int, 3>;

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<EigenRowMat>;
using ConstMatMap = Eigen::Map<const EigenRowMat>;

}  // namespace detail

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {
    detail::require(rows > 0 && cols > 0, "Matrix: dimensions must be positive");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  detail::MatMap map() { return {data_.data(), rows_, cols_}; }
  detail::ConstMatMap map() const { return {data_.data(), rows_, cols_}; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    t.map() = map().transpose();
    return t;
  }

  double fro_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  c.map().noalias() = a.map() * b.map();
  return c;
}

// a * b^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  c.map().noalias() = a.map() * b.map().transpose();
  return c;
}

// a^T * b
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  detail::require(a.rows() == b.rows(), "matmul_tn: inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  c.map().noalias() = a.map().transpose() * b.map();
  return c;
}

// Dense third-order tensor, row-major with the mode-3 index fastest.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int i1, int i2, int i3, double fill = 0.0)
      : dims_{i1, i2, i3},
        data_(static_cast<std::size_t>(i1) * i2 * i3, fill) {
    detail::require(i1 > 0 && i2 > 0 && i3 > 0,
                    "Tensor3: dimensions must be positive");
  }
  explicit Tensor3(Dims3 d, double fill = 0.0) : Tensor3(d[0], d[1], d[2], fill) {}

  static Tensor3 ones(int i1, int i2, int i3) { return {i1, i2, i3, 1.0}; }

  const Dims3& dims() const { return dims_; }
  int dim(int mode) const { return dims_[mode - 1]; }  // mode in {1,2,3}
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * dims_[1] + i2) * dims_[2] + i3;
  }
  double& operator()(int i1, int i2, int i3) { return data_[index(i1, i2, i3)]; }
  double operator()(int i1, int i2, int i3) const { return data_[index(i1, i2, i3)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  Dims3 dims_{0, 0, 0};
  std::vector<double> data_;
};

namespace detail {
inline void require_same_dims(const Tensor3& a, const Tensor3& b, const char* op) {
  require(a.dims() == b.dims(), std::string(op) + ": tensor dimensions differ");
}
inline void require_mode(int mode) {
  require(mode >= 1 && mode <= 3, "mode must be 1, 2 or 3");
}
}  // namespace detail

// Mode-l unfolding X_(l) of shape (I_l, prod of the other dims). Columns are
// ordered by the remaining indices in increasing mode order; fold() inverts
// exactly this layout.
inline Matrix unfold(const Tensor3& t, int mode) {
  detail::require_mode(mode);
  const auto [i1, i2, i3] = t.dims();
  switch (mode) {
    case 1: {
      Matrix m(i1, i2 * i3);
      m.data() = t.data();  // contiguous
      return m;
    }
    case 2: {
      Matrix m(i2, i1 * i3);
      for (int a = 0; a < i1; ++a)
        for (int b = 0; b < i2; ++b)
          for (int c = 0; c < i3; ++c) m(b, a * i3 + c) = t(a, b, c);
      return m;
    }
    default: {
      Matrix m(i3, i1 * i2);
      for (int a = 0; a < i1; ++a)
        for (int b = 0; b < i2; ++b)
          for (int c = 0; c < i3; ++c) m(c, a * i2 + b) = t(a, b, c);
      return m;
    }
  }
}

inline Tensor3 fold(const Matrix& m, int mode, Dims3 dims) {
  detail::require_mode(mode);
  const auto [i1, i2, i3] = dims;
  detail::require(m.rows() == dims[mode - 1] &&
                      static_cast<std::size_t>(m.rows()) * m.cols() ==
                          static_cast<std::size_t>(i1) * i2 * i3,
                  "fold: matrix shape does not match target dims");
  Tensor3 t(dims);
  switch (mode) {
    case 1:
      t.data() = m.data();
      break;
    case 2:
      for (int a = 0; a < i1; ++a)
        for (int b = 0; b < i2; ++b)
          for (int c = 0; c < i3; ++c) t(a, b, c) = m(b, a * i3 + c);
      break;
    default:
      for (int a = 0; a < i1; ++a)
        for (int b = 0; b < i2; ++b)
          for (int c = 0; c < i3; ++c) t(a, b, c) = m(c, a * i2 + b);
      break;
  }
  return t;
}

// Mode-l product t x_l m: contracts the mode-l index of t with the columns
// of m; the result has dims[l] replaced by m.rows(). Equivalent to
// fold(m * unfold(t, l), l) but computed on direct views of the row-major
// layout (mode 1 and 3 are single GEMMs, mode 2 one GEMM per slab).
inline Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode) {
  detail::require_mode(mode);
  detail::require(m.cols() == t.dims()[mode - 1],
                  "mode_product: matrix columns must match tensor mode-" +
                      std::to_string(mode) + " extent");
  const auto [i1, i2, i3] = t.dims();
  Dims3 od = t.dims();
  od[mode - 1] = m.rows();
  Tensor3 out(od);
  switch (mode) {
    case 1: {
      detail::ConstMatMap a(t.data().data(), i1, static_cast<long>(i2) * i3);
      detail::MatMap o(out.data().data(), m.rows(), static_cast<long>(i2) * i3);
      o.noalias() = m.map() * a;
      break;
    }
    case 2: {
      for (int a = 0; a < i1; ++a) {
        detail::ConstMatMap slab(t.data().data() + static_cast<std::size_t>(a) * i2 * i3,
                                 i2, i3);
        detail::MatMap o(out.data().data() +
                             static_cast<std::size_t>(a) * m.rows() * i3,
                         m.rows(), i3);
        o.noalias() = m.map() * slab;
      }
      break;
    }
    default: {
      detail::ConstMatMap a(t.data().data(), static_cast<long>(i1) * i2, i3);
      detail::MatMap o(out.data().data(), static_cast<long>(i1) * i2, m.rows());
      o.noalias() = a * m.map().transpose();
      break;
    }
  }
  return out;
}

inline Tensor3 hadamard(const Tensor3& a, const Tensor3& b) {
  detail::require_same_dims(a, b, "hadamard");
  Tensor3 c(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  return c;
}

inline Tensor3 sub(const Tensor3& a, const Tensor3& b) {
  detail::require_same_dims(a, b, "sub");
  Tensor3 c(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

inline void scale(Tensor3& t, double s) {
  for (double& v : t.data()) v *= s;
}

// y += a * x
inline void axpy(double a, const Tensor3& x, Tensor3& y) {
  detail::require_same_dims(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] += a * x.data()[i];
}

inline double fro_norm(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Tensor3& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace tap
