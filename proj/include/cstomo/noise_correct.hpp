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

#include <span>
#include <string>
#include <vector>

#include "cstomo/reconstruct.hpp"

namespace cstomo {

enum class SubsetAssignment { round_robin, seeded_random };

struct NoiseCorrectionConfig {
  /// 0 picks the count automatically (see auto_subset_count).
  int n_subsets = 0;
  SubsetAssignment assignment = SubsetAssignment::round_robin;
  std::uint64_t seed = 0;
  ReconstructionConfig base;
};

/// Largest count giving every subset at least max(D, ceil(M / 8))
/// measurements; 0 when fewer than two such subsets fit.
int auto_subset_count(int measurements, int joint_dim);

/// Index lists of a disjoint cover of [0, M). Throws std::invalid_argument
/// for fewer than two subsets or fewer than D measurements per subset.
std::vector<std::vector<int>> partition_indices(
    int measurements, int joint_dim, const NoiseCorrectionConfig &cfg);

std::vector<MeasurementSet> partition(const MeasurementSet &ms,
                                      const NoiseCorrectionConfig &cfg);

struct DeltaRhoEstimate {
  FlatVector delta_rho;
  std::vector<double> subset_norms;  // per subset, 0 for omitted ones
  std::vector<int> omitted;          // subsets that failed or did not converge
  std::vector<int> subset_iterations;
};

/// Sum over subsets of (pre-Gamma solution - Gamma(pre-Gamma solution)).
/// Throws std::invalid_argument with fewer than two subsets.
DeltaRhoEstimate estimate_delta_rho(std::span<const MeasurementSet> subsets,
                                    const NoiseCorrectionConfig &cfg);

struct CorrectedProbabilities {
  MeasurementSet ms;
  Eigen::VectorXd delta_p;
  int clamped = 0;
};

/// p - A delta_rho with the original measurement rows, clamped to [0, 1].
CorrectedProbabilities correct_probabilities(const MeasurementSet &ms,
                                             const FlatVector &delta_rho);

struct CorrectionDiagnostics {
  int n_subsets = 0;
  std::vector<double> subset_delta_norms;
  std::vector<int> omitted_subsets;
  std::vector<int> subset_iterations;
  double delta_rho_norm = 0.0;
  int clamped = 0;
  bool fallback = false;
  std::string warning;
};

struct CorrectedReport {
  ReconstructionReport raw;
  ReconstructionReport corrected;  // equals raw on fallback
  CorrectionDiagnostics diagnostics;
};

/// Raw reconstruction, delta-rho estimate from subsets, corrected
/// probabilities, final reconstruction. Falls back to the raw result with a
/// warning when the subsets cannot be formed or none of them converges.
CorrectedReport reconstruct_corrected(const MeasurementSet &ms,
                                      const NoiseCorrectionConfig &cfg);

}  // namespace cstomo
