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

#include <cstdint>
#include <random>

#include "cstomo/hermitian.hpp"
#include "cstomo/state_sim.hpp"

namespace cstomo::testing {

inline CMatrix random_matrix(Eigen::Index D, Rng &rng) {
  std::normal_distribution<double> g;
  CMatrix m(D, D);
  for (Eigen::Index c = 0; c < D; ++c) {
    for (Eigen::Index r = 0; r < D; ++r) m(r, c) = {g(rng), g(rng)};
  }
  return m;
}

inline CMatrix random_hermitian(Eigen::Index D, Rng &rng) {
  const CMatrix m = random_matrix(D, rng);
  return (m + m.adjoint()) / 2.0;
}

inline Eigen::VectorXcd random_unit(Eigen::Index D, Rng &rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(D);
  for (Eigen::Index i = 0; i < D; ++i) v(i) = {g(rng), g(rng)};
  return v.normalized();
}

inline CMatrix random_pure(Eigen::Index D, Rng &rng) {
  const Eigen::VectorXcd v = random_unit(D, rng);
  return v * v.adjoint();
}

/// Full-rank density matrix G G^dagger / Tr.
inline CMatrix random_density(Eigen::Index D, Rng &rng) {
  const CMatrix g = random_matrix(D, rng);
  const CMatrix p = g * g.adjoint();
  return p / p.trace().real();
}

/// Measurement set with exact probabilities Tr[A_i rho], any d.
inline MeasurementSet exact_measurements(int d, int M, const CMatrix &rho,
                                         Rng &rng) {
  MeasurementSet ms;
  ms.d = d;
  for (int i = 0; i < M; ++i) {
    ms.projectors.push_back(random_projector(d, rng));
    ms.probs.push_back(ideal_probability(ms.projectors.back(), rho));
  }
  return ms;
}

}  // namespace cstomo::testing
