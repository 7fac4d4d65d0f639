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

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cstomo/hermitian.hpp"
#include "cstomo/state_sim.hpp"

namespace cstomo {

enum class ThresholdMode {
  relative,  // thresholds scale with the largest eigenvalue / entry modulus
  absolute,
};

enum class InitKind { maximally_mixed, supplied };

struct IterationDiagnostics {
  int iteration = 0;
  double step = 0.0;
  double step_threshold = 0.0;
  /// ||A' vec(Gamma(rho)) - p'||_2, the distance the sweep had to cover.
  double residual = 0.0;
  /// Eigenvalues that survived the spectral threshold.
  int rank_kept = 0;
};

struct ReconstructionConfig {
  double tau = 0.4;
  double tau_ell = 0.04;
  double step_tol_rel = 1e-3;
  int k_max = 500;
  ThresholdMode threshold_mode = ThresholdMode::relative;
  /// Clip negative eigenvalues left behind by the element threshold, so that
  /// every Gamma output is a density matrix.
  bool enforce_psd = true;
  InitKind init = InitKind::maximally_mixed;
  CMatrix init_matrix;  // used when init == supplied
  /// Verify the per-sweep and per-Gamma invariants, throwing
  /// std::logic_error on violation. Costs one extra pass per iteration.
  bool check_invariants = false;
  std::function<void(const IterationDiagnostics &)> on_iteration;

  void validate() const;
};

/// Orthonormalized measurement system A' rho = p'. Rows are stored in the
/// "row" convention: row . vec(rho) = Tr[A rho] with a plain (unconjugated)
/// product, so the hyperplane normal of row i is conj(row i).
struct OrthoSystem {
  RowMatrixXcd rows;            // M' x N, orthonormal
  Eigen::VectorXd probs_prime;  // M'
  /// Lower-triangular L with A_kept = L * rows; p' = L^-1 p_kept.
  Eigen::MatrixXd elimination;
  std::vector<int> kept;  // source row index of each orthonormal row
  int source_rows = 0;
  int dropped = 0;

  int size() const { return static_cast<int>(rows.rows()); }
  Eigen::Index flat_dim() const { return rows.cols(); }

  /// Same rows, new right-hand side given in the original measurement order.
  OrthoSystem with_probabilities(std::span<const double> p) const;
  Eigen::VectorXd transform_probabilities(std::span<const double> p) const;
};

struct ReconstructionReport {
  CMatrix rho;            // Gamma applied to the final iterate
  CMatrix rho_pre_gamma;  // final sweep output
  int iterations = 0;
  double final_step = 0.0;
  double final_step_threshold = 0.0;
  std::vector<double> steps;
  std::vector<double> per_iteration_residuals;
  bool converged = false;
  int kept_rows = 0;
  int dropped_rows = 0;
};

/// conj(vec(A)), so that vectorize_projector(a) . vec(rho) = Tr[A rho].
FlatVector vectorize_projector(const Projector &a);

/// One vectorize_projector row per measurement.
RowMatrixXcd measurement_rows(const MeasurementSet &ms);

/// Gram-Schmidt over the rows with the probabilities carried along. Rows
/// must be vectorized Hermitian operators: elimination coefficients are the
/// (real) Hilbert-Schmidt overlaps. Rows whose residual falls below 1e-10 of
/// their original norm are dropped along with their probability. Throws
/// DegenerateError if nothing survives.
OrthoSystem orthogonalize(RowMatrixXcd a_rows, std::span<const double> p);

struct EigThreshold {
  CMatrix rho;
  int rank = 0;
  bool degenerate = false;  // no positive eigenvalue; rho is zero
};

/// Zeroes eigenvalues below tau * lambda_max (relative) or tau (absolute)
/// and recomposes. Negative eigenvalues are always removed.
EigThreshold threshold_eigs(const CMatrix &rho, double tau,
                            ThresholdMode mode = ThresholdMode::relative);

/// Zeroes entries with modulus below tau_ell * max modulus (relative) or
/// tau_ell (absolute). The mask is conjugate-symmetric.
CMatrix threshold_elements(const CMatrix &rho, double tau_ell,
                           ThresholdMode mode = ThresholdMode::relative);

/// rho / Tr(rho); DegenerateError when |Tr(rho)| <= 1e-12.
CMatrix normalize_trace(const CMatrix &rho);

/// Operations stage: spectral threshold, element threshold, optional PSD
/// clip, trace normalization.
CMatrix gamma(const CMatrix &rho, const ReconstructionConfig &cfg);

/// x + (p' - <n, x>) n for a unit normal n. std::invalid_argument if
/// ||n|| differs from 1 by more than 1e-10.
FlatVector project_hyperplane(const FlatVector &x, const FlatVector &n,
                              Complex p_prime);

/// Projects x onto each hyperplane of sys in stored order.
FlatVector sweep(FlatVector x, const OrthoSystem &sys);

/// Operation-projection iteration on a prepared system over a D x D space.
/// Non-convergence within k_max is reported, not raised.
ReconstructionReport reconstruct(const OrthoSystem &sys,
                                 const ReconstructionConfig &cfg);

ReconstructionReport reconstruct(const MeasurementSet &ms,
                                 const ReconstructionConfig &cfg);

}  // namespace cstomo
