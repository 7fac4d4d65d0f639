// Copyright 2026 The cstomo Authors
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

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cstomo {

using Complex = std::complex<double>;

/// Dense complex matrix. Density matrices and measurement operators are
/// Hermitian, but intermediate iterates may carry rounding-level asymmetry,
/// so Hermiticity is checked where it matters rather than encoded in the type.
using CMatrix = Eigen::MatrixXcd;

/// Column-stacked vector form of a D x D matrix (length D^2).
using FlatVector = Eigen::VectorXcd;

/// Row-major complex storage, used for stacks of flattened operators.
using RowMatrixXcd =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string &what)
      : std::invalid_argument(what) {}
};

/// Raised when an iterate or a linear system collapses (zero trace, no
/// usable measurements, ...).
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string &what)
      : std::runtime_error(what) {}
};

/// Flat index k maps to (row r, column c) with k = c * D + r.
FlatVector vec(const CMatrix &m);

/// Inverse of vec. Throws DimensionError unless the length is a perfect
/// square. The result is not symmetrized.
CMatrix mat(const FlatVector &v);

/// Side length D of a flattened D x D matrix, or DimensionError.
int side_length(Eigen::Index flat_len);

/// Hilbert-Schmidt inner product Tr(x^dagger y).
Complex hs_inner(const CMatrix &x, const CMatrix &y);

double frob_norm(const CMatrix &m);

/// (m + m^dagger) / 2
CMatrix symmetrize(const CMatrix &m);

bool is_hermitian(const CMatrix &m, double tol = 1e-12);

struct EigenSystem {
  Eigen::VectorXd values;  // descending
  CMatrix vectors;         // column i pairs with values(i)
};

/// Hermitian eigendecomposition of the symmetrized input.
EigenSystem eig_hermitian(const CMatrix &m);

/// sum_i values(i) |v_i><v_i|
CMatrix recompose(const EigenSystem &es);

}  // namespace cstomo
