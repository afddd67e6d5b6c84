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

#include "fedgat/numkit/linalg.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {

absl::StatusOr<Matrix> MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    return ShapeError(absl::StrCat("matmul ", a.rows(), "x", a.cols(), " by ",
                                   b.rows(), "x", b.cols()));
  }
  Matrix out = Multiply(a, b);
  if (!out.AllFinite()) return NumericalError("matmul produced non-finite");
  return out;
}

absl::StatusOr<Matrix> Cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    return ShapeError(absl::StrCat("cholesky of non-square ", a.rows(), "x",
                                   a.cols()));
  }
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      return NumericalError(
          absl::StrCat("matrix not SPD: cholesky pivot ", j, " = ", diag));
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

absl::StatusOr<Matrix> SolveSpd(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    return ShapeError(absl::StrCat("solve_spd lhs ", a.rows(), "x", a.cols(),
                                   " rhs ", b.rows(), "x", b.cols()));
  }
  FEDGAT_ASSIGN_OR_RETURN(Matrix l, Cholesky(a));
  const std::size_t n = a.rows();
  Matrix x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    // Forward substitution L z = b.
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    // Back substitution L^T x = z.
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, c);
      x(ii, c) = s / l(ii, ii);
    }
  }
  if (!x.AllFinite()) return NumericalError("solve_spd produced non-finite");
  return x;
}

absl::StatusOr<Vector> SymmetricEigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) return ShapeError("eigenvalues of non-square");
  if (!a.AllFinite()) return NumericalError("eigenvalues of non-finite");
  const std::size_t n = a.rows();
  Matrix w = a;
  w.Symmetrize();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += w(p, q) * w(p, q);
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (w(p, q) == 0.0) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p);
          const double wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k);
          const double wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
    }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = w(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

absl::StatusOr<Vector> SingularValues(const Matrix& a) {
  const Matrix at = a.Transposed();
  const Matrix gram = a.rows() <= a.cols() ? Multiply(a, at) : Multiply(at, a);
  FEDGAT_ASSIGN_OR_RETURN(Vector eig, SymmetricEigenvalues(gram));
  Vector sv(eig.size());
  for (std::size_t i = 0; i < eig.size(); ++i) {
    sv[i] = std::sqrt(std::max(0.0, eig[i]));
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

absl::StatusOr<double> MinSingularValue(const Matrix& a) {
  if (a.empty()) return ShapeError("singular values of empty matrix");
  FEDGAT_ASSIGN_OR_RETURN(Vector sv, SingularValues(a));
  return sv.back();
}

}  // namespace fedgat
