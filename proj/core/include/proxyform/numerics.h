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

#ifndef PROXYFORM_NUMERICS_H_
#define PROXYFORM_NUMERICS_H_

#include <cstddef>
#include <functional>
#include <type_traits>
#include <span>
#include <vector>

namespace proxyform {

// Dense row-major matrix. float is the default evaluation precision; double
// is used for gradient verification.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  template <typename U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      out.data()[i] = static_cast<U>(data_[i]);
    }
    return out;
  }

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Rows [begin, end) of m.
template <typename T>
Matrix<T> slice_rows(const Matrix<T>& m, std::size_t begin, std::size_t end);

template <typename T>
Matrix<T> transpose(const Matrix<T>& m);

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b);

// a += b
template <typename T>
void accumulate(Matrix<T>& a, const Matrix<T>& b);

// a * b, a * b^T and a^T * b respectively.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b);
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b);

template <typename T>
struct MatmulGrads {
  Matrix<T> da;
  Matrix<T> db;
};

// dA = dO * B^T, dB = A^T * dO.
template <typename T>
MatmulGrads<T> matmul_backward(const Matrix<T>& a, const Matrix<T>& b,
                               const Matrix<T>& d_out);

// Row-wise softmax with max subtraction.
template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& m);

// Pullback given the softmax output y.
template <typename T>
Matrix<T> softmax_rows_backward(const Matrix<T>& y, const Matrix<T>& d_out);

template <typename T>
Matrix<T> relu(const Matrix<T>& x);
template <typename T>
Matrix<T> relu_backward(const Matrix<T>& x, const Matrix<T>& d_out);

// Column means / maxima, 1 x cols. Empty input throws kShape.
template <typename T>
Matrix<T> avg_pool_rows(const Matrix<T>& x);
template <typename T>
Matrix<T> avg_pool_rows_backward(std::size_t rows, const Matrix<T>& d_out);
template <typename T>
Matrix<T> max_pool_rows(const Matrix<T>& x);
// Routes each column gradient to its argmax row; ties go to the lowest row.
template <typename T>
Matrix<T> max_pool_rows_backward(const Matrix<T>& x, const Matrix<T>& d_out);

// y = x * weight (+ bias). weight is in x out; bias is 1 x out or empty.
template <typename T>
struct LinearParams {
  Matrix<T> weight;
  Matrix<T> bias;

  std::size_t in() const { return weight.rows(); }
  std::size_t out() const { return weight.cols(); }
  bool has_bias() const { return !bias.empty(); }

  template <typename F>
  void for_each(F&& f) {
    f(weight);
    if (has_bias()) f(bias);
  }
  template <typename F>
  void for_each(F&& f) const {
    f(weight);
    if (has_bias()) f(bias);
  }

  template <typename U>
  LinearParams<U> cast() const {
    return {weight.template cast<U>(), bias.template cast<U>()};
  }

  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

template <typename T>
LinearParams<T> zero_linear(std::size_t in, std::size_t out, bool with_bias);

template <typename T>
Matrix<T> linear(const Matrix<T>& x, const LinearParams<T>& p);

template <typename T>
struct LinearGrads {
  Matrix<T> dx;
  LinearParams<T> dp;
};

template <typename T>
LinearGrads<T> linear_backward(const Matrix<T>& x, const LinearParams<T>& p,
                               const Matrix<T>& d_out);

struct AttentionOptions {
  // Drop the 1/sqrt(d) logit scale and evaluate softmax(Q K^T) literally.
  bool unscaled_logits = false;
};

// softmax(q k^T * scale) with scale = 1/sqrt(q.cols) unless unscaled.
template <typename T>
Matrix<T> attention_weights(const Matrix<T>& q, const Matrix<T>& k,
                            const AttentionOptions& opts = {});

template <typename T>
Matrix<T> attention(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
                    const AttentionOptions& opts = {});

template <typename T>
struct AttentionGrads {
  Matrix<T> dq;
  Matrix<T> dk;
  Matrix<T> dv;
};

template <typename T>
AttentionGrads<T> attention_backward(const Matrix<T>& q, const Matrix<T>& k,
                                     const Matrix<T>& v, const Matrix<T>& d_out,
                                     const AttentionOptions& opts = {});

// Copies every tensor visited by params.for_each into one flat vector, in
// visiting order, and back.
template <typename Params>
std::vector<double> flatten(const Params& params) {
  std::vector<double> flat;
  params.for_each([&](const auto& m) {
    for (auto v : m.data()) flat.push_back(static_cast<double>(v));
  });
  return flat;
}

template <typename Params>
void unflatten(std::span<const double> flat, Params& params) {
  std::size_t pos = 0;
  params.for_each([&](auto& m) {
    using V = typename std::decay_t<decltype(m)>::value_type;
    for (auto& v : m.data()) v = static_cast<V>(flat[pos++]);
  });
}

// Losses return long double so that probes can be evaluated in extended
// precision; a plain double result converts implicitly.
using ScalarFn = std::function<long double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

// Central finite differences against the analytic gradient. Per coordinate
// error is |g_fd - g_an| / max(1e-8, |g_fd| + |g_an|); the maximum is
// returned. The difference quotient divides by the realized step
// (x + h) - (x - h). Throws kEvaluation if f is non-finite anywhere it is
// sampled.
GradCheckResult grad_check(const ScalarFn& f, const GradientFn& grad,
                           std::span<const double> x0, double step = 1e-6);

}  // namespace proxyform

#endif  // PROXYFORM_NUMERICS_H_
