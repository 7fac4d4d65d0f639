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

#include "cstomo/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cstomo {

namespace {
constexpr double kNegativeEigFloor = -1e-6;
constexpr double kClampTol = 1e-9;
}  // namespace

double fidelity_pure(const CMatrix &rho, const TwoPhotonState &target,
                     bool *clamped) {
  const Eigen::Index D = Eigen::Index(target.dim()) * target.dim();
  if (rho.rows() != D || rho.cols() != D) {
    throw DimensionError("fidelity: density matrix does not match the target");
  }
  const CMatrix h = symmetrize(rho);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()(0) < kNegativeEigFloor) {
    throw std::domain_error("fidelity: matrix is not positive semidefinite");
  }
  const Eigen::VectorXcd phi = target.joint();
  double q = phi.dot(h * phi).real();
  bool hit = false;
  if (q < 0.0) {
    hit = q < -kClampTol;
    q = 0.0;
  }
  double f = std::sqrt(q);
  if (f > 1.0) {
    hit = hit || f > 1.0 + kClampTol;
    f = 1.0;
  }
  if (clamped) *clamped = hit;
  return f;
}

double purity(const CMatrix &rho) { return hs_inner(rho, rho).real(); }

int effective_rank(const CMatrix &rho, double rel_tol) {
  const EigenSystem es = eig_hermitian(rho);
  if (es.values.size() == 0 || !(es.values(0) > 0.0)) return 0;
  const double cut = rel_tol * es.values(0);
  return static_cast<int>((es.values.array() >= cut).count());
}

double residual(const MeasurementSet &ms, const CMatrix &rho) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    worst = std::max(worst,
                     std::abs(expectation(ms.projectors[i], rho) - ms.probs[i]));
  }
  return worst;
}

MetricsSummary summarize(const CMatrix &rho, const TwoPhotonState &target,
                         const MeasurementSet *ms) {
  MetricsSummary out;
  out.fidelity = fidelity_pure(rho, target, &out.fidelity_clamped);
  out.purity = std::clamp(purity(rho), 0.0, 1.0);
  out.effective_rank = effective_rank(rho);
  if (ms) out.residual_inf = residual(*ms, rho);
  return out;
}

}  // namespace cstomo
