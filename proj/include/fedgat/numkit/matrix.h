// Copyright 2026 The FedGAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDGAT_NUMKIT_MATRIX_H_
#define FEDGAT_NUMKIT_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedgat {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Problem sizes in this project stay well
// below a few hundred rows, so there is no blocking, no views and no BLAS.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Row-major nested initializer; every row must have the same length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix Identity(std::size_t n);
  static Matrix Diagonal(std::span<const double> diag);
  static Matrix ColumnVector(std::span<const double> v);
  static Matrix FromRowMajor(std::size_t rows, std::size_t cols,
                             std::span<const double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  Matrix Transposed() const;
  // (A + A^T) / 2. Requires a square matrix.
  void Symmetrize();
  bool AllFinite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

// Unchecked product for callers that already guarantee a.cols() == b.rows().
// The checked, status-returning variant is MatMul in linalg.h.
Matrix Multiply(const Matrix& a, const Matrix& b);
// y = A x, unchecked.
Vector Apply(const Matrix& a, std::span<const double> x);
// y = A^T x, unchecked.
Vector ApplyTransposed(const Matrix& a, std::span<const double> x);

double Dot(std::span<const double> a, std::span<const double> b);
double SquaredNorm(std::span<const double> v);
double Norm(std::span<const double> v);
double FrobeniusNorm(const Matrix& a);
bool AllFinite(std::span<const double> v);

}  // namespace fedgat

#endif  // FEDGAT_NUMKIT_MATRIX_H_
