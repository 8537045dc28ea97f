// Copyright 2026 The proxyform Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "proxyform/numerics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "proxyform/error.h"

namespace proxyform {
namespace {

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::kShape, std::string(op) + ": " + dims(a.rows(), a.cols()) +
                                " vs " + dims(b.rows(), b.cols()));
  }
}

template <typename T>
void require_nonempty(const Matrix<T>& x, const char* op) {
  if (x.rows() == 0 || x.cols() == 0) {
    fail(ErrorCode::kShape, std::string(op) + ": empty matrix");
  }
}

template <typename T>
T logit_scale(std::size_t d, const AttentionOptions& opts) {
  if (opts.unscaled_logits || d == 0) return T{1};
  return static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
}

}  // namespace

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    fail(ErrorCode::kShape, "matrix data length does not match " +
                                dims(rows, cols));
  }
}

template <typename T>
Matrix<T> Matrix<T>::identity(std::size_t n) {
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

template <typename T>
bool Matrix<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

template <typename T>
Matrix<T> slice_rows(const Matrix<T>& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.rows()) {
    fail(ErrorCode::kShape, "slice_rows: range out of bounds");
  }
  Matrix<T> out(end - begin, m.cols());
  std::copy(m.data().begin() + begin * m.cols(),
            m.data().begin() + end * m.cols(), out.data().begin());
  return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out = a;
  accumulate(out, b);
  return out;
}

template <typename T>
void accumulate(Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "accumulate");
  auto dst = a.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorCode::kShape, "matmul: " + dims(a.rows(), a.cols()) + " * " +
                                dims(b.rows(), b.cols()));
  }
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T{0}) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) {
    fail(ErrorCode::kShape, "matmul_nt: " + dims(a.rows(), a.cols()) +
                                " * (" + dims(b.rows(), b.cols()) + ")^T");
  }
  Matrix<T> out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto br = b.row(j);
      T acc{0};
      for (std::size_t k = 0; k < ar.size(); ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  }
  return out;
}

template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) {
    fail(ErrorCode::kShape, "matmul_tn: (" + dims(a.rows(), a.cols()) +
                                ")^T * " + dims(b.rows(), b.cols()));
  }
  Matrix<T> out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ar = a.row(k);
    auto br = b.row(k);
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const T aki = ar[i];
      if (aki == T{0}) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < br.size(); ++j) dst[j] += aki * br[j];
    }
  }
  return out;
}

template <typename T>
MatmulGrads<T> matmul_backward(const Matrix<T>& a, const Matrix<T>& b,
                               const Matrix<T>& d_out) {
  if (d_out.rows() != a.rows() || d_out.cols() != b.cols()) {
    fail(ErrorCode::kShape, "matmul_backward: gradient shape mismatch");
  }
  return {matmul_nt(d_out, b), matmul_tn(a, d_out)};
}

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    auto dst = out.row(r);
    if (src.empty()) continue;
    const T peak = *std::max_element(src.begin(), src.end());
    T total{0};
    for (std::size_t c = 0; c < src.size(); ++c) {
      dst[c] = std::exp(src[c] - peak);
      total += dst[c];
    }
    for (T& v : dst) v /= total;
  }
  return out;
}

template <typename T>
Matrix<T> softmax_rows_backward(const Matrix<T>& y, const Matrix<T>& d_out) {
  require_same_shape(y, d_out, "softmax_rows_backward");
  Matrix<T> dx(y.rows(), y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto yr = y.row(r);
    auto gr = d_out.row(r);
    T inner{0};
    for (std::size_t c = 0; c < yr.size(); ++c) inner += yr[c] * gr[c];
    auto dst = dx.row(r);
    for (std::size_t c = 0; c < yr.size(); ++c) dst[c] = yr[c] * (gr[c] - inner);
  }
  return dx;
}

template <typename T>
Matrix<T> relu(const Matrix<T>& x) {
  Matrix<T> out = x;
  for (T& v : out.data()) v = v > T{0} ? v : T{0};
  return out;
}

template <typename T>
Matrix<T> relu_backward(const Matrix<T>& x, const Matrix<T>& d_out) {
  require_same_shape(x, d_out, "relu_backward");
  Matrix<T> dx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    dx.data()[i] = x.data()[i] > T{0} ? d_out.data()[i] : T{0};
  }
  return dx;
}

template <typename T>
Matrix<T> avg_pool_rows(const Matrix<T>& x) {
  require_nonempty(x, "avg_pool_rows");
  Matrix<T> out(1, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(0, c) += x(r, c);
  }
  const T inv = T{1} / static_cast<T>(x.rows());
  for (T& v : out.data()) v *= inv;
  return out;
}

template <typename T>
Matrix<T> avg_pool_rows_backward(std::size_t rows, const Matrix<T>& d_out) {
  if (rows == 0 || d_out.rows() != 1) {
    fail(ErrorCode::kShape, "avg_pool_rows_backward: bad shape");
  }
  Matrix<T> dx(rows, d_out.cols());
  const T inv = T{1} / static_cast<T>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d_out.cols(); ++c) dx(r, c) = d_out(0, c) * inv;
  }
  return dx;
}

template <typename T>
Matrix<T> max_pool_rows(const Matrix<T>& x) {
  require_nonempty(x, "max_pool_rows");
  Matrix<T> out(1, x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    T best = x(0, c);
    for (std::size_t r = 1; r < x.rows(); ++r) best = std::max(best, x(r, c));
    out(0, c) = best;
  }
  return out;
}

template <typename T>
Matrix<T> max_pool_rows_backward(const Matrix<T>& x, const Matrix<T>& d_out) {
  require_nonempty(x, "max_pool_rows_backward");
  if (d_out.rows() != 1 || d_out.cols() != x.cols()) {
    fail(ErrorCode::kShape, "max_pool_rows_backward: bad gradient shape");
  }
  Matrix<T> dx(x.rows(), x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < x.rows(); ++r) {
      if (x(r, c) > x(arg, c)) arg = r;
    }
    dx(arg, c) = d_out(0, c);
  }
  return dx;
}

template <typename T>
LinearParams<T> zero_linear(std::size_t in, std::size_t out, bool with_bias) {
  LinearParams<T> p;
  p.weight = Matrix<T>(in, out);
  if (with_bias) p.bias = Matrix<T>(1, out);
  return p;
}

template <typename T>
Matrix<T> linear(const Matrix<T>& x, const LinearParams<T>& p) {
  if (x.cols() != p.in()) {
    fail(ErrorCode::kShape, "linear: input width " + std::to_string(x.cols()) +
                                " != " + std::to_string(p.in()));
  }
  Matrix<T> y = matmul(x, p.weight);
  if (p.has_bias()) {
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto dst = y.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += p.bias(0, c);
    }
  }
  return y;
}

template <typename T>
LinearGrads<T> linear_backward(const Matrix<T>& x, const LinearParams<T>& p,
                               const Matrix<T>& d_out) {
  auto mm = matmul_backward(x, p.weight, d_out);
  LinearGrads<T> g;
  g.dx = std::move(mm.da);
  g.dp.weight = std::move(mm.db);
  if (p.has_bias()) {
    g.dp.bias = Matrix<T>(1, p.out());
    for (std::size_t r = 0; r < d_out.rows(); ++r) {
      for (std::size_t c = 0; c < d_out.cols(); ++c) g.dp.bias(0, c) += d_out(r, c);
    }
  }
  return g;
}

template <typename T>
Matrix<T> attention_weights(const Matrix<T>& q, const Matrix<T>& k,
                            const AttentionOptions& opts) {
  Matrix<T> logits = matmul_nt(q, k);
  const T s = logit_scale<T>(q.cols(), opts);
  if (s != T{1}) {
    for (T& v : logits.data()) v *= s;
  }
  return softmax_rows(logits);
}

template <typename T>
Matrix<T> attention(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
                    const AttentionOptions& opts) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) {
    fail(ErrorCode::kShape, "attention: q " + dims(q.rows(), q.cols()) +
                                ", k " + dims(k.rows(), k.cols()) + ", v " +
                                dims(v.rows(), v.cols()));
  }
  return matmul(attention_weights(q, k, opts), v);
}

template <typename T>
AttentionGrads<T> attention_backward(const Matrix<T>& q, const Matrix<T>& k,
                                     const Matrix<T>& v, const Matrix<T>& d_out,
                                     const AttentionOptions& opts) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) {
    fail(ErrorCode::kShape, "attention_backward: incompatible operands");
  }
  const Matrix<T> w = attention_weights(q, k, opts);
  auto mm = matmul_backward(w, v, d_out);
  Matrix<T> d_logits = softmax_rows_backward(w, mm.da);
  const T s = logit_scale<T>(q.cols(), opts);
  if (s != T{1}) {
    for (T& x : d_logits.data()) x *= s;
  }
  AttentionGrads<T> g;
  g.dq = matmul(d_logits, k);
  g.dk = matmul_tn(d_logits, q);
  g.dv = std::move(mm.db);
  return g;
}

GradCheckResult grad_check(const ScalarFn& f, const GradientFn& grad,
                           std::span<const double> x0, double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidArgument, "grad_check: step must be > 0");
  std::vector<double> x(x0.begin(), x0.end());
  const long double f0 = f(x);
  if (!std::isfinite(f0)) fail(ErrorCode::kEvaluation, "grad_check: f(x0) is not finite");
  const std::vector<double> analytic = grad(x);
  if (analytic.size() != x.size()) {
    fail(ErrorCode::kShape, "grad_check: gradient length != parameter length");
  }
  GradCheckResult result;
  result.coordinates = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    const double hi = saved + step;
    const double lo = saved - step;
    x[i] = hi;
    const long double up = f(x);
    x[i] = lo;
    const long double down = f(x);
    x[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      fail(ErrorCode::kEvaluation,
           "grad_check: f is not finite near coordinate " + std::to_string(i));
    }
    const double fd = static_cast<double>((up - down) / static_cast<long double>(hi - lo));
    const double err = std::abs(fd - analytic[i]) /
                       std::max(1e-8, std::abs(fd) + std::abs(analytic[i]));
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

#define PROXYFORM_INSTANTIATE(T)                                              \
  template class Matrix<T>;                                                   \
  template Matrix<T> slice_rows(const Matrix<T>&, std::size_t, std::size_t);  \
  template Matrix<T> transpose(const Matrix<T>&);                             \
  template Matrix<T> add(const Matrix<T>&, const Matrix<T>&);                 \
  template void accumulate(Matrix<T>&, const Matrix<T>&);                     \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);              \
  template Matrix<T> matmul_nt(const Matrix<T>&, const Matrix<T>&);           \
  template Matrix<T> matmul_tn(const Matrix<T>&, const Matrix<T>&);           \
  template MatmulGrads<T> matmul_backward(const Matrix<T>&, const Matrix<T>&, \
                                          const Matrix<T>&);                  \
  template Matrix<T> softmax_rows(const Matrix<T>&);                          \
  template Matrix<T> softmax_rows_backward(const Matrix<T>&,                  \
                                           const Matrix<T>&);                 \
  template Matrix<T> relu(const Matrix<T>&);                                  \
  template Matrix<T> relu_backward(const Matrix<T>&, const Matrix<T>&);       \
  template Matrix<T> avg_pool_rows(const Matrix<T>&);                         \
  template Matrix<T> avg_pool_rows_backward(std::size_t, const Matrix<T>&);   \
  template Matrix<T> max_pool_rows(const Matrix<T>&);                         \
  template Matrix<T> max_pool_rows_backward(const Matrix<T>&,                 \
                                            const Matrix<T>&);                \
  template LinearParams<T> zero_linear(std::size_t, std::size_t, bool);       \
  template Matrix<T> linear(const Matrix<T>&, const LinearParams<T>&);        \
  template LinearGrads<T> linear_backward(                                    \
      const Matrix<T>&, const LinearParams<T>&, const Matrix<T>&);            \
  template Matrix<T> attention_weights(const Matrix<T>&, const Matrix<T>&,    \
                                       const AttentionOptions&);              \
  template Matrix<T> attention(const Matrix<T>&, const Matrix<T>&,            \
                               const Matrix<T>&, const AttentionOptions&);    \
  template AttentionGrads<T> attention_backward(                              \
      const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, \
      const AttentionOptions&);

PROXYFORM_INSTANTIATE(float)
PROXYFORM_INSTANTIATE(double)
PROXYFORM_INSTANTIATE(long double)

#undef PROXYFORM_INSTANTIATE

}  // namespace proxyform
