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

#include <optional>

#include "cstomo/hermitian.hpp"
#include "cstomo/state_sim.hpp"

namespace cstomo {

struct MetricsSummary {
  double fidelity = 0.0;
  double purity = 0.0;
  int effective_rank = 0;
  std::optional<double> residual_inf;  // needs a measurement set
  bool fidelity_clamped = false;
};

/// sqrt(<Phi| rho |Phi>) for a pure target, which is what
/// Tr sqrt(sqrt(rho) |Phi><Phi| sqrt(rho)) reduces to. Throws
/// std::domain_error if rho has an eigenvalue below -1e-6.
double fidelity_pure(const CMatrix &rho, const TwoPhotonState &target,
                     bool *clamped = nullptr);

/// Tr(rho^2)
double purity(const CMatrix &rho);

/// Number of eigenvalues >= rel_tol * lambda_max.
int effective_rank(const CMatrix &rho, double rel_tol = 1e-3);

/// max_i |Tr(A_i rho) - p_i|
double residual(const MeasurementSet &ms, const CMatrix &rho);

MetricsSummary summarize(const CMatrix &rho, const TwoPhotonState &target,
                         const MeasurementSet *ms = nullptr);

}  // namespace cstomo
