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
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cstomo/hermitian.hpp"

namespace cstomo {

using Rng = std::mt19937_64;

/// Single-photon superposition over d modes, unit norm. For odd d the modes
/// are OAM values l = -L..L stored at index l + L; the measurement
/// machinery itself accepts any d >= 1.
struct ModeVector {
  Eigen::VectorXcd amps;

  int dim() const { return static_cast<int>(amps.size()); }
};

/// sum_l c_l |-l>_S |l>_I, with c_l stored at index l + L. Unit norm.
struct TwoPhotonState {
  Eigen::VectorXcd coeffs;

  int dim() const { return static_cast<int>(coeffs.size()); }

  /// Amplitudes on the joint d^2 space; (l_S, l_I) sits at
  /// (l_S + L) * d + (l_I + L).
  Eigen::VectorXcd joint() const;
};

/// Separable rank-1 measurement |s, i><s, i|.
struct Projector {
  ModeVector signal;
  ModeVector idler;

  int dim() const { return signal.dim(); }

  /// Kronecker product signal (x) idler, length d^2.
  Eigen::VectorXcd joint() const;

  /// The D x D operator. O(D^2) memory; avoid for bulk work.
  CMatrix materialize() const;
};

/// A measurement campaign: projectors and their (normalized) outcomes.
struct MeasurementSet {
  int d = 0;
  std::vector<Projector> projectors;
  std::vector<double> probs;
  std::optional<std::vector<std::int64_t>> counts;
  std::uint64_t seed = 0;
  /// Mean coincidence count at p = 1; zero when no counts were simulated.
  double calibration = 0.0;
  /// Simulation-only ground truth.
  std::optional<TwoPhotonState> truth;

  int joint_dim() const { return d * d; }
  std::size_t size() const { return projectors.size(); }

  /// Throws std::invalid_argument when any type invariant is violated.
  void validate() const;
};

/// Rejects even or non-positive mode counts.
void check_mode_count(int d);

TwoPhotonState make_max_entangled(int d);

/// c_l proportional to exp(-l^2 / (2 w^2)).
TwoPhotonState make_downconversion_state(int d, double spiral_width);

/// |Psi><Psi| on the joint space.
CMatrix state_to_density(const TwoPhotonState &s);

/// i.i.d. standard complex Gaussian amplitudes, normalized. Any d >= 1.
ModeVector random_mode(int d, Rng &rng);

/// Independent signal and idler modes unless same_arms is set, in which
/// case one draw is used for both.
Projector random_projector(int d, Rng &rng, bool same_arms = false);

/// <s, i| rho |s, i>, real part, unclamped. O(D^2).
double expectation(const Projector &a, const CMatrix &rho);

/// Tr[A rho] in [0, 1]. Values outside [0, 1] by more than 1e-12 raise
/// std::domain_error; smaller excursions are clamped.
double ideal_probability(const Projector &a, const CMatrix &rho);

/// Poisson draw with mean p * mean_total_counts.
std::int64_t simulate_counts(double p, double mean_total_counts, Rng &rng);

/// count / mean_total_counts, clamped to [0, 1].
std::vector<double> counts_to_probs(std::span<const std::int64_t> counts,
                                    double mean_total_counts);

struct SimulationSpec {
  int d = 3;
  int measurements = 1;
  TwoPhotonState state;
  /// Poisson noise at this calibration when set; noiseless otherwise.
  std::optional<double> mean_total_counts;
  std::uint64_t seed = 0;
  bool same_arms = false;
};

/// Draws projectors and outcomes. Projectors and counts come from separate
/// streams derived from the seed, so the projector set depends on the seed
/// alone.
MeasurementSet simulate_measurements(const SimulationSpec &spec);

/// Deterministic child seed for stream `stream` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace cstomo
