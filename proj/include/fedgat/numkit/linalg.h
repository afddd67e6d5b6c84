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

#ifndef FEDGAT_NUMKIT_LINALG_H_
#define FEDGAT_NUMKIT_LINALG_H_

#include "absl/status/statusor.h"
#include "fedgat/numkit/matrix.h"

namespace fedgat {

// Checked matrix product. Fails with a shape error if a.cols() != b.rows()
// and with a numerical error if the result contains non-finite entries.
absl::StatusOr<Matrix> MatMul(const Matrix& a, const Matrix& b);

// Lower-triangular Cholesky factor L with a = L L^T. A non-positive pivot
// yields a numerical error whose message carries the pivot index.
absl::StatusOr<Matrix> Cholesky(const Matrix& a);

// Solves a x = b for symmetric positive definite a via Cholesky.
absl::StatusOr<Matrix> SolveSpd(const Matrix& a, const Matrix& b);

// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
absl::StatusOr<Vector> SymmetricEigenvalues(const Matrix& a);

// Singular values of an arbitrary matrix in descending order, computed from
// the eigenvalues of the smaller Gram matrix. Length is min(rows, cols).
absl::StatusOr<Vector> SingularValues(const Matrix& a);

// Smallest of the min(rows, cols) singular values.
absl::StatusOr<double> MinSingularValue(const Matrix& a);

}  // namespace fedgat

#endif  // FEDGAT_NUMKIT_LINALG_H_
