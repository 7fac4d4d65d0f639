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

#include "cstomo/noise_correct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cstomo {

int auto_subset_count(int measurements, int joint_dim) {
  const int floor_size = std::max(joint_dim, (measurements + 7) / 8);
  const int n = measurements / std::max(floor_size, 1);
  return n >= 2 ? n : 0;
}

std::vector<std::vector<int>> partition_indices(
    int measurements, int joint_dim, const NoiseCorrectionConfig &cfg) {
  const int n = cfg.n_subsets == 0
                    ? auto_subset_count(measurements, joint_dim)
                    : cfg.n_subsets;
  if (n < 2) {
    throw std::invalid_argument(
        "noise correction needs at least two subsets of " +
        std::to_string(joint_dim) + " measurements; have " +
        std::to_string(measurements) + " measurements");
  }
  if (measurements / n < joint_dim) {
    throw std::invalid_argument(
        std::to_string(measurements) + " measurements cannot fill " +
        std::to_string(n) + " subsets of at least " +
        std::to_string(joint_dim));
  }

  std::vector<int> order(measurements);
  std::iota(order.begin(), order.end(), 0);
  if (cfg.assignment == SubsetAssignment::seeded_random) {
    Rng rng(derive_seed(cfg.seed, 2));
    // Fisher-Yates with explicit draws; std::shuffle's use of the engine is
    // unspecified across standard libraries.
    for (int i = measurements - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
  }

  std::vector<std::vector<int>> subsets(n);
  for (int i = 0; i < measurements; ++i) {
    subsets[i % n].push_back(order[i]);
  }
  for (auto &s : subsets) std::sort(s.begin(), s.end());
  return subsets;
}

std::vector<MeasurementSet> partition(const MeasurementSet &ms,
                                      const NoiseCorrectionConfig &cfg) {
  const auto groups = partition_indices(static_cast<int>(ms.size()),
                                        ms.joint_dim(), cfg);
  std::vector<MeasurementSet> out;
  out.reserve(groups.size());
  for (const auto &g : groups) {
    MeasurementSet sub;
    sub.d = ms.d;
    sub.seed = ms.seed;
    sub.calibration = ms.calibration;
    sub.truth = ms.truth;
    if (ms.counts) sub.counts.emplace();
    for (int i : g) {
      sub.projectors.push_back(ms.projectors[i]);
      sub.probs.push_back(ms.probs[i]);
      if (ms.counts) sub.counts->push_back((*ms.counts)[i]);
    }
    out.push_back(std::move(sub));
  }
  return out;
}

DeltaRhoEstimate estimate_delta_rho(std::span<const MeasurementSet> subsets,
                                    const NoiseCorrectionConfig &cfg) {
  if (subsets.size() < 2) {
    throw std::invalid_argument("delta-rho estimation needs two subsets");
  }
  const Eigen::Index D = subsets.front().joint_dim();
  DeltaRhoEstimate est;
  est.delta_rho = FlatVector::Zero(D * D);
  // Fixed summation order keeps the estimate bit-reproducible.
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (subsets[i].joint_dim() != D) {
      throw DimensionError("subsets disagree on the mode count");
    }
    try {
      const ReconstructionReport r = reconstruct(subsets[i], cfg.base);
      est.subset_iterations.push_back(r.iterations);
      if (!r.converged) {
        est.omitted.push_back(static_cast<int>(i));
        est.subset_norms.push_back(0.0);
        continue;
      }
      const FlatVector delta = vec(r.rho_pre_gamma) - vec(r.rho);
      est.subset_norms.push_back(delta.norm());
      est.delta_rho += delta;
    } catch (const DegenerateError &) {
      est.subset_iterations.push_back(0);
      est.omitted.push_back(static_cast<int>(i));
      est.subset_norms.push_back(0.0);
    }
  }
  return est;
}

CorrectedProbabilities correct_probabilities(const MeasurementSet &ms,
                                             const FlatVector &delta_rho) {
  const Eigen::Index D = ms.joint_dim();
  if (delta_rho.size() != D * D) {
    throw DimensionError("delta rho does not match the measurement space");
  }
  const CMatrix delta = mat(delta_rho);
  CorrectedProbabilities out{ms, Eigen::VectorXd(ms.size()), 0};
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Eigen::VectorXcd psi = ms.projectors[i].joint();
    const double dp = psi.dot(delta * psi).real();
    out.delta_p(static_cast<Eigen::Index>(i)) = dp;
    const double p = ms.probs[i] - dp;
    const double c = std::clamp(p, 0.0, 1.0);
    if (c != p) ++out.clamped;
    out.ms.probs[i] = c;
  }
  return out;
}

CorrectedReport reconstruct_corrected(const MeasurementSet &ms,
                                      const NoiseCorrectionConfig &cfg) {
  ms.validate();
  cfg.base.validate();
  const OrthoSystem sys = orthogonalize(measurement_rows(ms), ms.probs);

  CorrectedReport out;
  out.raw = reconstruct(sys, cfg.base);
  auto fallback = [&](std::string why) {
    out.corrected = out.raw;
    out.diagnostics.fallback = true;
    out.diagnostics.warning = std::move(why);
    return out;
  };

  std::vector<MeasurementSet> subsets;
  try {
    subsets = partition(ms, cfg);
  } catch (const std::invalid_argument &e) {
    return fallback(e.what());
  }
  out.diagnostics.n_subsets = static_cast<int>(subsets.size());

  DeltaRhoEstimate est = estimate_delta_rho(subsets, cfg);
  out.diagnostics.subset_delta_norms = est.subset_norms;
  out.diagnostics.omitted_subsets = est.omitted;
  out.diagnostics.subset_iterations = est.subset_iterations;
  out.diagnostics.delta_rho_norm = est.delta_rho.norm();
  if (est.omitted.size() == subsets.size()) {
    return fallback("no subset reconstruction converged");
  }

  const CorrectedProbabilities fixed =
      correct_probabilities(ms, est.delta_rho);
  out.diagnostics.clamped = fixed.clamped;
  // Same rows, new right-hand side: reuse the orthonormal basis.
  out.corrected =
      reconstruct(sys.with_probabilities(fixed.ms.probs), cfg.base);
  return out;
}

}  // namespace cstomo
