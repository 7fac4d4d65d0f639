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

#include "cstomo/state_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cstomo {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kProbTol = 1e-12;

double unit_norm_error(const Eigen::VectorXcd &v) {
  return std::abs(v.squaredNorm() - 1.0);
}

}  // namespace

void check_mode_count(int d) {
  if (d < 1 || d % 2 == 0) {
    throw std::invalid_argument(
        "mode count must be odd and positive, got " + std::to_string(d));
  }
}

Eigen::VectorXcd TwoPhotonState::joint() const {
  const int d = dim();
  const int L = d / 2;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d * d);
  for (int l = -L; l <= L; ++l) {
    psi((-l + L) * d + (l + L)) = coeffs(l + L);
  }
  return psi;
}

Eigen::VectorXcd Projector::joint() const {
  const int d = dim();
  Eigen::VectorXcd psi(d * d);
  for (int s = 0; s < d; ++s) {
    psi.segment(s * d, d) = signal.amps(s) * idler.amps;
  }
  return psi;
}

CMatrix Projector::materialize() const {
  const Eigen::VectorXcd psi = joint();
  return psi * psi.adjoint();
}

void MeasurementSet::validate() const {
  if (d < 1) throw std::invalid_argument("mode count must be positive");
  if (projectors.empty()) {
    throw std::invalid_argument("measurement set has no projectors");
  }
  if (probs.size() != projectors.size()) {
    throw std::invalid_argument(
        "probs length " + std::to_string(probs.size()) +
        " does not match projector count " +
        std::to_string(projectors.size()));
  }
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const auto &a = projectors[i];
    if (a.signal.dim() != d || a.idler.dim() != d) {
      throw std::invalid_argument("projector " + std::to_string(i) +
                                  " has the wrong mode count");
    }
    if (unit_norm_error(a.signal.amps) > 1e-9 ||
        unit_norm_error(a.idler.amps) > 1e-9) {
      throw std::invalid_argument("projector " + std::to_string(i) +
                                  " has a non-normalized arm");
    }
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw std::invalid_argument("probability " + std::to_string(i) +
                                  " outside [0, 1]");
    }
  }
  if (counts) {
    if (counts->size() != projectors.size()) {
      throw std::invalid_argument("counts length does not match projectors");
    }
    if (std::any_of(counts->begin(), counts->end(),
                    [](std::int64_t c) { return c < 0; })) {
      throw std::invalid_argument("negative coincidence count");
    }
    if (!(calibration > 0.0)) {
      throw std::invalid_argument("counts require a positive calibration");
    }
  }
  if (truth) {
    if (truth->dim() != d || d % 2 == 0) {
      throw std::invalid_argument("truth state has the wrong mode count");
    }
    if (unit_norm_error(truth->coeffs) > 1e-9) {
      throw std::invalid_argument("truth state is not normalized");
    }
  }
}

TwoPhotonState make_max_entangled(int d) {
  check_mode_count(d);
  return {Eigen::VectorXcd::Constant(d, 1.0 / std::sqrt(double(d)))};
}

TwoPhotonState make_downconversion_state(int d, double spiral_width) {
  check_mode_count(d);
  if (!(spiral_width > 0.0) || !std::isfinite(spiral_width)) {
    throw std::invalid_argument("spiral width must be positive and finite");
  }
  const int L = d / 2;
  Eigen::VectorXcd c(d);
  for (int l = -L; l <= L; ++l) {
    c(l + L) = std::exp(-double(l) * l / (2.0 * spiral_width * spiral_width));
  }
  c.normalize();
  return {c};
}

CMatrix state_to_density(const TwoPhotonState &s) {
  const Eigen::VectorXcd psi = s.joint();
  return psi * psi.adjoint();
}

ModeVector random_mode(int d, Rng &rng) {
  if (d < 1) throw std::invalid_argument("mode count must be positive");
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ModeVector m{Eigen::VectorXcd(d)};
  do {
    for (int i = 0; i < d; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      m.amps(i) = {re, im};
    }
  } while (m.amps.squaredNorm() == 0.0);
  m.amps.normalize();
  return m;
}

Projector random_projector(int d, Rng &rng, bool same_arms) {
  ModeVector signal = random_mode(d, rng);
  if (same_arms) return {signal, signal};
  ModeVector idler = random_mode(d, rng);
  return {std::move(signal), std::move(idler)};
}

double expectation(const Projector &a, const CMatrix &rho) {
  const int D = a.dim() * a.dim();
  if (rho.rows() != D || rho.cols() != D) {
    throw DimensionError("projector and density matrix dimensions differ");
  }
  const Eigen::VectorXcd psi = a.joint();
  return psi.dot(rho * psi).real();
}

double ideal_probability(const Projector &a, const CMatrix &rho) {
  const double p = expectation(a, rho);
  if (p < -kProbTol || p > 1.0 + kProbTol) {
    throw std::domain_error("probability " + std::to_string(p) +
                            " outside [0, 1]; is rho a density matrix?");
  }
  return std::clamp(p, 0.0, 1.0);
}

std::int64_t simulate_counts(double p, double mean_total_counts, Rng &rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("probability outside [0, 1]");
  }
  if (!(mean_total_counts > 0.0)) {
    throw std::invalid_argument("mean total counts must be positive");
  }
  const double mean = p * mean_total_counts;
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::int64_t> poisson(mean);
  return poisson(rng);
}

std::vector<double> counts_to_probs(std::span<const std::int64_t> counts,
                                    double mean_total_counts) {
  if (!(mean_total_counts > 0.0)) {
    throw std::invalid_argument("calibration constant must be positive");
  }
  std::vector<double> p;
  p.reserve(counts.size());
  for (auto c : counts) {
    p.push_back(std::clamp(double(c) / mean_total_counts, 0.0, 1.0));
  }
  return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MeasurementSet simulate_measurements(const SimulationSpec &spec) {
  check_mode_count(spec.d);
  if (spec.measurements < 1) {
    throw std::invalid_argument("at least one measurement is required");
  }
  if (spec.state.dim() != spec.d ||
      unit_norm_error(spec.state.coeffs) > kNormTol * 100) {
    throw std::invalid_argument("state does not match the mode count");
  }
  if (spec.mean_total_counts && !(*spec.mean_total_counts > 0.0)) {
    throw std::invalid_argument("mean total counts must be positive");
  }

  MeasurementSet ms;
  ms.d = spec.d;
  ms.seed = spec.seed;
  ms.truth = spec.state;

  Rng projector_rng(derive_seed(spec.seed, 0));
  ms.projectors.reserve(spec.measurements);
  for (int i = 0; i < spec.measurements; ++i) {
    ms.projectors.push_back(random_projector(spec.d, projector_rng,
                                             spec.same_arms));
  }

  // Pure truth: Tr[A rho] = |<s,i|Psi>|^2 without forming rho.
  const Eigen::VectorXcd psi = spec.state.joint();
  std::vector<double> ideal;
  ideal.reserve(spec.measurements);
  for (const auto &a : ms.projectors) {
    ideal.push_back(std::clamp(std::norm(a.joint().dot(psi)), 0.0, 1.0));
  }

  if (spec.mean_total_counts) {
    Rng noise_rng(derive_seed(spec.seed, 1));
    std::vector<std::int64_t> counts;
    counts.reserve(ideal.size());
    for (double p : ideal) {
      counts.push_back(simulate_counts(p, *spec.mean_total_counts, noise_rng));
    }
    ms.calibration = *spec.mean_total_counts;
    ms.probs = counts_to_probs(counts, ms.calibration);
    ms.counts = std::move(counts);
  } else {
    ms.probs = std::move(ideal);
  }
  return ms;
}

}  // namespace cstomo
