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

#include "cstomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cstomo {

namespace {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kDropTol = 1e-10;
constexpr Eigen::Index kBlock = 64;

struct SweepResult {
  FlatVector x;
  double correction_norm = 0.0;
};

SweepResult sweep_impl(FlatVector x, const OrthoSystem &sys) {
  if (x.size() != sys.flat_dim()) {
    throw DimensionError("sweep: iterate length does not match the system");
  }
  double moved = 0.0;
  for (Eigen::Index i = 0; i < sys.rows.rows(); ++i) {
    const auto row = sys.rows.row(i);
    const Complex k = sys.probs_prime(i) - (row * x)(0);
    x.noalias() += k * row.adjoint();
    moved += std::norm(k);
  }
  return {std::move(x), std::sqrt(moved)};
}

struct GammaResult {
  CMatrix rho;
  int rank = 0;
};

GammaResult gamma_impl(const CMatrix &rho, const ReconstructionConfig &cfg) {
  EigThreshold spectral = threshold_eigs(rho, cfg.tau, cfg.threshold_mode);
  if (spectral.degenerate) {
    throw DegenerateError("spectral threshold removed every eigenvalue");
  }
  CMatrix out = threshold_elements(spectral.rho, cfg.tau_ell,
                                   cfg.threshold_mode);
  if (cfg.enforce_psd) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(out);
    if (solver.eigenvalues()(0) < 0.0) {
      EigenSystem es{solver.eigenvalues().cwiseMax(0.0),
                     solver.eigenvectors()};
      out = symmetrize(recompose(es));
    }
  }
  return {normalize_trace(out), spectral.rank};
}

double min_eigenvalue(const CMatrix &m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(symmetrize(m),
                                                Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

void check_gamma_output(const CMatrix &rho) {
  if (!is_hermitian(rho, 1e-12)) {
    throw std::logic_error("Gamma output is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1.0)) > 1e-10) {
    throw std::logic_error("Gamma output does not have unit trace");
  }
  if (min_eigenvalue(rho) < -1e-10) {
    throw std::logic_error("Gamma output has a negative eigenvalue");
  }
}

void check_sweep_output(const FlatVector &x, const OrthoSystem &sys) {
  if (!is_hermitian(mat(x), 1e-9)) {
    throw std::logic_error("sweep broke Hermiticity");
  }
  const Eigen::VectorXcd r =
      sys.rows * x - sys.probs_prime.cast<Complex>();
  if (r.size() > 0 && r.cwiseAbs().maxCoeff() > 1e-9) {
    throw std::logic_error("sweep output violates a constraint");
  }
}

}  // namespace

void ReconstructionConfig::validate() const {
  if (threshold_mode == ThresholdMode::relative) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("tau must lie in (0, 1)");
    }
    if (!(tau_ell > 0.0 && tau_ell < 1.0)) {
      throw std::invalid_argument("tau_ell must lie in (0, 1)");
    }
  } else if (!(tau > 0.0) || !(tau_ell >= 0.0)) {
    throw std::invalid_argument("absolute thresholds must be positive");
  }
  if (!(step_tol_rel > 0.0)) {
    throw std::invalid_argument("step tolerance must be positive");
  }
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  if (init == InitKind::supplied && init_matrix.size() == 0) {
    throw std::invalid_argument("supplied initial matrix is empty");
  }
}

Eigen::VectorXd OrthoSystem::transform_probabilities(
    std::span<const double> p) const {
  if (static_cast<int>(p.size()) != source_rows) {
    throw DimensionError("expected " + std::to_string(source_rows) +
                         " probabilities, got " + std::to_string(p.size()));
  }
  Eigen::VectorXd pk(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) pk(i) = p[kept[i]];
  return elimination.triangularView<Eigen::Lower>().solve(pk);
}

OrthoSystem OrthoSystem::with_probabilities(std::span<const double> p) const {
  OrthoSystem out = *this;
  out.probs_prime = transform_probabilities(p);
  return out;
}

FlatVector vectorize_projector(const Projector &a) {
  const Eigen::VectorXcd psi = a.joint();
  const Eigen::Index D = psi.size();
  const Eigen::VectorXcd psi_conj = psi.conjugate();
  FlatVector out(D * D);
  for (Eigen::Index c = 0; c < D; ++c) {
    out.segment(c * D, D) = psi_conj * psi(c);
  }
  return out;
}

RowMatrixXcd measurement_rows(const MeasurementSet &ms) {
  const Eigen::Index D = ms.joint_dim();
  RowMatrixXcd rows(static_cast<Eigen::Index>(ms.size()), D * D);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) =
        vectorize_projector(ms.projectors[i]).transpose();
  }
  return rows;
}

OrthoSystem orthogonalize(RowMatrixXcd a_rows, std::span<const double> p) {
  const Eigen::Index M = a_rows.rows();
  const Eigen::Index N = a_rows.cols();
  if (static_cast<Eigen::Index>(p.size()) != M) {
    throw DimensionError("orthogonalize: probability count does not match");
  }
  if (M == 0) throw DegenerateError("orthogonalize: no measurement rows");

  // Elimination coefficients are real for Hermitian-operator rows, so the
  // work is done on the interleaved (re, im) real view: the real dot product
  // there is Re <u, v>.
  Eigen::Map<RowMatrixXd> W(reinterpret_cast<double *>(a_rows.data()), M,
                            2 * N);
  const Eigen::VectorXd original_norm = W.rowwise().norm();

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M, M);
  std::vector<int> kept;
  kept.reserve(M);
  Eigen::Index k = 0;  // finalized rows occupy W.topRows(k)

  for (Eigen::Index start = 0; start < M; start += kBlock) {
    const Eigen::Index b = std::min(kBlock, M - start);
    if (k != start) {
      for (Eigen::Index j = 0; j < b; ++j) W.row(k + j) = W.row(start + j);
    }
    auto block = W.middleRows(k, b);

    // Block Gram-Schmidt against the finalized basis, applied twice.
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(b, k);
    if (k > 0) {
      const auto basis = W.topRows(k);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd c = block * basis.transpose();
        block.noalias() -= c * basis;
        coef += c;
      }
    }

    // Modified Gram-Schmidt inside the block, compacting survivors.
    Eigen::Index kb = 0;
    for (Eigen::Index j = 0; j < b; ++j) {
      Eigen::VectorXd v = W.row(k + j).transpose();
      Eigen::VectorXd local = Eigen::VectorXd::Zero(kb);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index t = 0; t < kb; ++t) {
          const double c = W.row(k + t).dot(v.transpose());
          v -= c * W.row(k + t).transpose();
          local(t) += c;
        }
      }
      const double r = v.norm();
      // Also drops exactly zero rows, where the relative test is 0 < 0.
      if (!(r > kDropTol * original_norm(start + j))) continue;

      const Eigen::Index row = k + kb;
      W.row(row) = v.transpose() / r;
      if (k > 0) L.row(row).head(k) = coef.row(j);
      L.row(row).segment(k, kb) = local.transpose();
      L(row, row) = r;
      kept.push_back(static_cast<int>(start + j));
      ++kb;
    }
    k += kb;
  }

  if (k == 0) {
    throw DegenerateError("orthogonalize: every measurement row was dropped");
  }

  OrthoSystem sys;
  if (k == M) {
    sys.rows = std::move(a_rows);
  } else {
    sys.rows = a_rows.topRows(k);
  }
  sys.elimination = L.topLeftCorner(k, k);
  sys.kept = std::move(kept);
  sys.source_rows = static_cast<int>(M);
  sys.dropped = static_cast<int>(M - k);
  sys.probs_prime = sys.transform_probabilities(p);
  return sys;
}

EigThreshold threshold_eigs(const CMatrix &rho, double tau,
                            ThresholdMode mode) {
  const EigenSystem es = eig_hermitian(rho);
  const Eigen::Index D = es.values.size();
  const double lambda_max = D > 0 ? es.values(0) : 0.0;
  if (!(lambda_max > 0.0)) {
    return {CMatrix::Zero(rho.rows(), rho.cols()), 0, true};
  }
  const double cut = mode == ThresholdMode::relative ? tau * lambda_max : tau;

  // Descending order: survivors form a prefix.
  Eigen::Index rank = 0;
  while (rank < D && es.values(rank) >= cut && es.values(rank) > 0.0) ++rank;
  if (rank == 0) {
    return {CMatrix::Zero(rho.rows(), rho.cols()), 0, true};
  }
  const auto V = es.vectors.leftCols(rank);
  CMatrix out =
      V * es.values.head(rank).cast<Complex>().asDiagonal() * V.adjoint();
  return {symmetrize(out), static_cast<int>(rank), false};
}

CMatrix threshold_elements(const CMatrix &rho, double tau_ell,
                           ThresholdMode mode) {
  CMatrix out = symmetrize(rho);
  const double peak = out.size() > 0 ? out.cwiseAbs().maxCoeff() : 0.0;
  if (peak == 0.0) return out;
  const double cut = mode == ThresholdMode::relative ? tau_ell * peak : tau_ell;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r <= c; ++r) {
      if (std::abs(out(r, c)) < cut) {
        out(r, c) = 0.0;
        out(c, r) = 0.0;
      }
    }
  }
  return out;
}

CMatrix normalize_trace(const CMatrix &rho) {
  const Complex tr = rho.trace();
  if (std::abs(tr) <= 1e-12) {
    throw DegenerateError("iterate has vanishing trace");
  }
  if (std::abs(tr.imag()) <= 1e-12 * std::abs(tr)) {
    return rho / tr.real();
  }
  return rho / tr;
}

CMatrix gamma(const CMatrix &rho, const ReconstructionConfig &cfg) {
  return gamma_impl(rho, cfg).rho;
}

FlatVector project_hyperplane(const FlatVector &x, const FlatVector &n,
                              Complex p_prime) {
  if (x.size() != n.size()) {
    throw DimensionError("project_hyperplane: length mismatch");
  }
  if (std::abs(n.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("project_hyperplane: normal is not unit");
  }
  const Complex k = p_prime - n.dot(x);
  return x + k * n;
}

FlatVector sweep(FlatVector x, const OrthoSystem &sys) {
  return sweep_impl(std::move(x), sys).x;
}

ReconstructionReport reconstruct(const OrthoSystem &sys,
                                 const ReconstructionConfig &cfg) {
  cfg.validate();
  const int D = side_length(sys.flat_dim());

  CMatrix current;
  if (cfg.init == InitKind::supplied) {
    if (cfg.init_matrix.rows() != D || cfg.init_matrix.cols() != D) {
      throw DimensionError("initial matrix has the wrong dimension");
    }
    current = symmetrize(cfg.init_matrix);
  } else {
    current = CMatrix::Identity(D, D) / double(D);
  }

  ReconstructionReport report;
  report.kept_rows = sys.size();
  report.dropped_rows = sys.dropped;

  for (int k = 1; k <= cfg.k_max; ++k) {
    GammaResult g = gamma_impl(current, cfg);
    if (cfg.check_invariants) check_gamma_output(g.rho);

    SweepResult s = sweep_impl(vec(g.rho), sys);
    if (cfg.check_invariants) check_sweep_output(s.x, sys);
    CMatrix next = symmetrize(mat(s.x));

    const double step = frob_norm(next - current);
    const double threshold = cfg.step_tol_rel * frob_norm(next);
    report.steps.push_back(step);
    report.per_iteration_residuals.push_back(s.correction_norm);
    report.iterations = k;
    report.final_step = step;
    report.final_step_threshold = threshold;
    if (cfg.on_iteration) {
      cfg.on_iteration({k, step, threshold, s.correction_norm, g.rank});
    }
    current = std::move(next);
    if (step <= threshold) {
      report.converged = true;
      break;
    }
  }

  report.rho = gamma(current, cfg);
  report.rho_pre_gamma = std::move(current);
  return report;
}

ReconstructionReport reconstruct(const MeasurementSet &ms,
                                 const ReconstructionConfig &cfg) {
  ms.validate();
  cfg.validate();
  const OrthoSystem sys = orthogonalize(measurement_rows(ms), ms.probs);
  return reconstruct(sys, cfg);
}

}  // namespace cstomo
