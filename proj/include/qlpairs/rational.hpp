#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlpairs {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Dense matrix with exact rational entries. Sized for Lie-algebra work
/// (n <= 8), so no attempt at sparsity or expression templates.
class RatMatrix {
public:
  RatMatrix() : rows_(0), cols_(0) {}
  RatMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  static RatMatrix unit(std::size_t n, std::size_t i, std::size_t j) {
    RatMatrix m(n, n);
    m(i, j) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RatMatrix operator+(const RatMatrix& o) const {
    check_same_shape(o);
    RatMatrix r(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = data_[k] + o.data_[k];
    return r;
  }
  RatMatrix operator-(const RatMatrix& o) const {
    check_same_shape(o);
    RatMatrix r(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = data_[k] - o.data_[k];
    return r;
  }
  RatMatrix operator*(const RatMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("RatMatrix: dimension mismatch");
    RatMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const Rational& a = (*this)(i, k);
        if (a == 0) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
      }
    return r;
  }
  RatMatrix operator*(const Rational& s) const {
    RatMatrix r(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = data_[k] * s;
    return r;
  }
  bool operator==(const RatMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  RatMatrix transpose() const {
    RatMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }
  Rational trace() const {
    Rational t = 0;
    for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
    return t;
  }
  bool is_zero() const {
    for (const auto& x : data_) if (x != 0) return false;
    return true;
  }

  /// Row-major flattening, used to treat matrices as vectors in span tests.
  const std::vector<Rational>& flat() const { return data_; }

private:
  void check_same_shape(const RatMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("RatMatrix: shape mismatch");
  }
  std::size_t rows_, cols_;
  std::vector<Rational> data_;
};

inline RatMatrix commutator(const RatMatrix& x, const RatMatrix& y) {
  return x * y - y * x;
}

/// Exact row echelon basis over the rationals. Rows of the result span the
/// same space as the input rows; zero rows are dropped.
class RatSpan {
public:
  RatSpan() : width_(0) {}
  explicit RatSpan(std::size_t width) : width_(width) {}

  std::size_t dim() const { return rows_.size(); }
  std::size_t width() const { return width_; }

  /// Returns true if the vector was independent of the current span.
  bool add(std::vector<Rational> v) {
    reduce_in_place(v);
    for (std::size_t j = 0; j < width_; ++j) {
      if (v[j] != 0) {
        Rational inv = Rational(1) / v[j];
        for (auto& x : v) x *= inv;
        rows_.push_back(std::move(v));
        pivots_.push_back(j);
        return true;
      }
    }
    return false;
  }

  bool contains(std::vector<Rational> v) const {
    reduce_in_place(v);
    for (const auto& x : v) if (x != 0) return false;
    return true;
  }

  bool add(const RatMatrix& m) { return add(m.flat()); }
  bool contains(const RatMatrix& m) const { return contains(m.flat()); }

private:
  void reduce_in_place(std::vector<Rational>& v) const {
    if (v.size() != width_) throw std::invalid_argument("RatSpan: width mismatch");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rational& c = v[pivots_[r]];
      if (c != 0) {
        Rational f = c;
        for (std::size_t j = 0; j < width_; ++j) v[j] -= f * rows_[r][j];
      }
    }
  }
  std::size_t width_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> pivots_;
};

inline std::string to_string(const Rational& r) {
  return r.str();
}

}  // namespace qlpairs
