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

#include "cstomo/hermitian.hpp"

#include <cmath>

namespace cstomo {

FlatVector vec(const CMatrix &m) {
  // Eigen's default storage is column-major, which is exactly the
  // column-stacked order.
  return Eigen::Map<const FlatVector>(m.data(), m.size());
}

int side_length(Eigen::Index flat_len) {
  if (flat_len <= 0) {
    throw DimensionError("flattened matrix must be non-empty");
  }
  auto side = static_cast<Eigen::Index>(
      std::llround(std::sqrt(static_cast<double>(flat_len))));
  if (side * side != flat_len) {
    throw DimensionError(
        "length " + std::to_string(flat_len) + " is not a perfect square");
  }
  return static_cast<int>(side);
}

CMatrix mat(const FlatVector &v) {
  const int side = side_length(v.size());
  return Eigen::Map<const CMatrix>(v.data(), side, side);
}

Complex hs_inner(const CMatrix &x, const CMatrix &y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("hs_inner: dimension mismatch");
  }
  // Eigen's dot conjugates its first argument.
  return vec(x).dot(vec(y));
}

double frob_norm(const CMatrix &m) { return m.norm(); }

CMatrix symmetrize(const CMatrix &m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("symmetrize: matrix is not square");
  }
  return (m + m.adjoint()) / 2.0;
}

bool is_hermitian(const CMatrix &m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r <= c; ++r) {
      if (std::abs(m(r, c) - std::conj(m(c, r))) > tol) return false;
    }
  }
  return true;
}

EigenSystem eig_hermitian(const CMatrix &m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver failed");
  }
  // Ascending from Eigen; flip to descending.
  return {solver.eigenvalues().reverse(),
          solver.eigenvectors().rowwise().reverse()};
}

CMatrix recompose(const EigenSystem &es) {
  return es.vectors * es.values.cast<Complex>().asDiagonal() *
         es.vectors.adjoint();
}

}  // namespace cstomo
