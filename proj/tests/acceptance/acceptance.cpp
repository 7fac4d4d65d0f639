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

// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero when a
// gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/LU>

#include "cstomo/commands.hpp"
#include "cstomo/hermitian.hpp"
#include "cstomo/io.hpp"
#include "cstomo/metrics.hpp"
#include "cstomo/noise_correct.hpp"
#include "cstomo/reconstruct.hpp"
#include "cstomo/state_sim.hpp"

using namespace cstomo;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr double kOracleTol = 1e-6;
constexpr double kOracleSeconds = 1.0;
// Criterion 2
constexpr double kNoiselessFidelity = 0.99;
constexpr double kNoiselessSeconds = 10.0;
constexpr int kNoiselessSeeds = 10;
// Criterion 3
constexpr double kSweepCorrectedMax = 0.94;
constexpr double kSweepPeakFraction = 0.30;
constexpr double kSweepSeconds = 30.0 * 60.0;
constexpr double kSweepCounts = 5e4;  // ~sqrt(p * C) relative error of a few %
constexpr int kSweepRepeats = 5;
// Criterion 4
constexpr double kStretchLow = 0.75;
constexpr double kStretchHigh = 0.95;
constexpr double kStretchSeconds = 5.0 * 3.0 * 3600.0;
// Criterion 5
constexpr int kPropertySeeds = 100;
constexpr double kPsdFloor = -1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kHermTol = 1e-12;
constexpr double kSweepTol = 1e-9;
constexpr double kFidelityConsistency = 1e-10;
constexpr double kNoOpTol = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

CMatrix random_pure(int D, Rng &rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(D);
  for (int i = 0; i < D; ++i) v(i) = {g(rng), g(rng)};
  v.normalize();
  return v * v.adjoint();
}

CMatrix random_hermitian(int D, Rng &rng) {
  std::normal_distribution<double> g;
  CMatrix m(D, D);
  for (int c = 0; c < D; ++c) {
    for (int r = 0; r < D; ++r) m(r, c) = {g(rng), g(rng)};
  }
  return (m + m.adjoint()) / 2.0;
}

CMatrix random_density(int D, Rng &rng) {
  std::normal_distribution<double> g;
  CMatrix m(D, D);
  for (int c = 0; c < D; ++c) {
    for (int r = 0; r < D; ++r) m(r, c) = {g(rng), g(rng)};
  }
  const CMatrix p = m * m.adjoint();
  return p / p.trace().real();
}

// 1. Fully determined d = 2 system against a direct LU solve.
Outcome oracle_equivalence() {
  Rng rng(20260101);
  const int d = 2, D = 4, N = 16;
  const CMatrix truth = random_pure(D, rng);
  MeasurementSet ms;
  ms.d = d;
  for (int i = 0; i < N; ++i) {
    ms.projectors.push_back(random_projector(d, rng));
    ms.probs.push_back(ideal_probability(ms.projectors.back(), truth));
  }

  const auto t0 = Clock::now();
  const ReconstructionReport rep = reconstruct(ms, ReconstructionConfig{});
  const double secs = seconds_since(t0);

  const Eigen::MatrixXcd A = measurement_rows(ms);
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(ms.probs.data(), N);
  const CMatrix direct = mat(lu.solve(p.cast<Complex>()));
  const double err = frob_norm(rep.rho_pre_gamma - direct);
  const double err_gamma = frob_norm(rep.rho - direct);

  Outcome o;
  o.pass = lu.rank() == N && err <= kOracleTol && secs < kOracleSeconds;
  o.detail = "rank=" + std::to_string(lu.rank()) + " |rho-direct|_F=" +
             fmt("%.3e", err) + " (after final Gamma " +
             fmt("%.3e", err_gamma) + ") time=" + fmt("%.3fs", secs);
  return o;
}

// 2. Noiseless d = 3 recovery at 30% of d^4.
Outcome noiseless_recovery() {
  const int d = 3;
  const int M = static_cast<int>(std::lround(0.3 * std::pow(d, 4)));
  const TwoPhotonState phi = make_max_entangled(d);
  double worst = 1.0, sum = 0.0;
  int good = 0;
  const auto t0 = Clock::now();
  for (int seed = 1; seed <= kNoiselessSeeds; ++seed) {
    SimulationSpec spec;
    spec.d = d;
    spec.measurements = M;
    spec.state = phi;
    spec.seed = static_cast<std::uint64_t>(seed);
    const ReconstructionReport rep =
        reconstruct(simulate_measurements(spec), ReconstructionConfig{});
    const double f = fidelity_pure(rep.rho, phi);
    worst = std::min(worst, f);
    sum += f;
    if (f >= kNoiselessFidelity) ++good;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst >= kNoiselessFidelity && secs < kNoiselessSeconds;
  o.detail = "M=" + std::to_string(M) + " seeds>=0.99: " +
             std::to_string(good) + "/" + std::to_string(kNoiselessSeeds) +
             " min F=" + fmt("%.4f", worst) +
             " mean F=" + fmt("%.4f", sum / kNoiselessSeeds) +
             " time=" + fmt("%.2fs", secs);
  return o;
}

// 3. Fidelity against measurement fraction at d = 7 with Poisson noise.
Outcome fraction_sweep(const fs::path &workdir, int threads) {
  SweepSpec spec;
  spec.d = 7;
  for (int k = 1; k <= 12; ++k) spec.fractions.push_back(0.05 * k);
  spec.repeats = kSweepRepeats;
  spec.mean_total_counts = kSweepCounts;
  spec.seed = 7;
  spec.threads = threads;
  spec.out = (workdir / "sweep_d7.csv").string();

  const auto t0 = Clock::now();
  const std::vector<SweepCell> cells = run_sweep(spec);
  const double secs = seconds_since(t0);
  const std::vector<SweepSummaryRow> rows = summarize_sweep(cells);
  io::write_text_file(spec.out, sweep_csv(cells));
  io::write_text_file(spec.out + ".summary.csv", sweep_summary_csv(rows));

  int failed = 0;
  for (const auto &c : cells) failed += c.failed ? 1 : 0;

  double corrected_max = 0.0, raw_peak = -1.0, raw_peak_fraction = 0.0;
  double raw_last = 0.0;
  std::ostringstream curve;
  for (const auto &r : rows) {
    corrected_max = std::max(corrected_max, r.mean_corrected);
    if (r.mean_raw > raw_peak) {
      raw_peak = r.mean_raw;
      raw_peak_fraction = r.fraction;
    }
    raw_last = r.mean_raw;
    curve << "\n    " << fmt("%.2f", r.fraction) << " raw "
          << fmt("%.4f", r.mean_raw) << "+-" << fmt("%.4f", r.std_raw)
          << " corrected " << fmt("%.4f", r.mean_corrected) << "+-"
          << fmt("%.4f", r.std_corrected);
  }
  const bool last_is_60 =
      !rows.empty() && std::abs(rows.back().fraction - 0.60) < 1e-9;

  const bool corrected_ok = corrected_max >= kSweepCorrectedMax;
  const bool peak_ok = raw_peak_fraction <= kSweepPeakFraction + 1e-9;
  const bool decline_ok = last_is_60 && raw_last < raw_peak;
  Outcome o;
  o.pass = corrected_ok && peak_ok && decline_ok && failed == 0 &&
           secs <= kSweepSeconds;
  o.detail = std::string("corrected max=") + fmt("%.4f", corrected_max) +
             (corrected_ok ? " ok" : " LOW") +
             "; raw peak " + fmt("%.4f", raw_peak) + " at " +
             fmt("%.2f", raw_peak_fraction) + (peak_ok ? " ok" : " LATE") +
             "; raw at 0.60=" + fmt("%.4f", raw_last) +
             (decline_ok ? " ok" : " NOT LOWER") +
             "; failed cells=" + std::to_string(failed) +
             " time=" + fmt("%.1fs", secs) + curve.str();
  return o;
}

// 4. d = 17 at the 2506-measurement budget.
Outcome stretch_run(int threads) {
  (void)threads;
  SimulationSpec spec;
  spec.d = 17;
  spec.measurements = 2506;
  spec.state = make_max_entangled(17);
  spec.mean_total_counts = 1e5;
  spec.seed = 17;
  const auto t0 = Clock::now();
  const MeasurementSet ms = simulate_measurements(spec);
  NoiseCorrectionConfig cfg;
  const CorrectedReport rep = reconstruct_corrected(ms, cfg);
  const double secs = seconds_since(t0);
  const double f_raw = fidelity_pure(rep.raw.rho, spec.state);
  const double f = fidelity_pure(rep.corrected.rho, spec.state);
  Outcome o;
  o.pass = f >= kStretchLow && f <= kStretchHigh && secs <= kStretchSeconds;
  o.detail = "F corrected=" + fmt("%.4f", f) + " raw=" + fmt("%.4f", f_raw) +
             " subsets=" + std::to_string(rep.diagnostics.n_subsets) +
             " iterations=" + std::to_string(rep.raw.iterations) + "/" +
             std::to_string(rep.corrected.iterations) +
             " time=" + fmt("%.0fs", secs);
  return o;
}

// 5. Property suite over seeds.
Outcome invariant_suite() {
  std::vector<std::string> broken;
  auto expect = [&](bool ok, const std::string &what, int seed) {
    if (!ok && broken.size() < 8) {
      broken.push_back(what + "@seed" + std::to_string(seed));
    }
    return ok;
  };
  int gamma_ok = 0, sweep_ok = 0, roundtrip_ok = 0, fid_ok = 0, noop_ok = 0;
  double worst_noop = 0.0;
  const ReconstructionConfig cfg;

  for (int seed = 0; seed < kPropertySeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 5000);

    // Gamma output.
    {
      const int D = 2 + seed % 48;
      CMatrix m = random_hermitian(D, rng);
      m += CMatrix::Identity(D, D) * std::abs(m(0, 0));
      bool ok = true;
      try {
        const CMatrix g = gamma(m, cfg);
        ok = is_hermitian(g, kHermTol) &&
             std::abs(g.trace() - 1.0) <= kTraceTol &&
             eig_hermitian(g).values.minCoeff() >= kPsdFloor;
      } catch (const DegenerateError &) {
        ok = true;  // no positive spectrum: reported, not a violation
      }
      gamma_ok += expect(ok, "gamma", seed);
    }

    // Sweep constraints and Hermiticity.
    {
      const int d = 3, D = 9;
      const int M = 5 + (seed * 7) % 70;
      const CMatrix truth = random_density(D, rng);
      MeasurementSet ms;
      ms.d = d;
      for (int i = 0; i < M; ++i) {
        ms.projectors.push_back(random_projector(d, rng));
        ms.probs.push_back(ideal_probability(ms.projectors.back(), truth));
      }
      const OrthoSystem sys = orthogonalize(measurement_rows(ms), ms.probs);
      const FlatVector y = sweep(vec(random_density(D, rng)), sys);
      const double res =
          (sys.rows * y - sys.probs_prime.cast<Complex>()).cwiseAbs().maxCoeff();
      sweep_ok += expect(res <= kSweepTol && is_hermitian(mat(y), kSweepTol),
                         "sweep", seed);
    }

    // vec/mat round trip.
    {
      const int D = 1 + seed % 20;
      const CMatrix m = random_hermitian(D, rng);
      roundtrip_ok += expect(mat(vec(m)) == m, "roundtrip", seed);
    }

    // Closed-form fidelity.
    {
      const int d = 3 + 2 * (seed % 3);
      TwoPhotonState phi;
      std::normal_distribution<double> g;
      phi.coeffs.resize(d);
      for (int i = 0; i < d; ++i) phi.coeffs(i) = {g(rng), g(rng)};
      phi.coeffs.normalize();
      const CMatrix rho = random_density(d * d, rng);
      const double f = fidelity_pure(rho, phi);
      const double overlap = hs_inner(state_to_density(phi), rho).real();
      fid_ok +=
          expect(std::abs(f * f - overlap) <= kFidelityConsistency, "fidelity",
                 seed);
    }

    // Noise correction on noiseless sparse data.
    {
      SimulationSpec spec;
      spec.d = 5;
      // 48% of d^4, so each of the two subsets holds 24%: enough for every
      // subset to land on the truth rather than a mixed fixed point.
      spec.measurements = 300;
      spec.state = make_max_entangled(5);
      spec.seed = static_cast<std::uint64_t>(seed);
      NoiseCorrectionConfig nc;
      nc.n_subsets = 2;
      nc.base.step_tol_rel = 1e-10;
      nc.base.k_max = 20000;
      const CorrectedReport rep =
          reconstruct_corrected(simulate_measurements(spec), nc);
      const double change = frob_norm(rep.corrected.rho - rep.raw.rho);
      const double worst = std::max(change, rep.diagnostics.delta_rho_norm);
      worst_noop = std::max(worst_noop, worst);
      noop_ok += expect(!rep.diagnostics.fallback && worst <= kNoOpTol,
                        "noise-correction no-op", seed);
    }
  }

  const int n = kPropertySeeds;
  Outcome o;
  o.pass = gamma_ok == n && sweep_ok == n && roundtrip_ok == n &&
           fid_ok == n && noop_ok == n;
  std::ostringstream s;
  s << "gamma " << gamma_ok << "/" << n << ", sweep " << sweep_ok << "/" << n
    << ", vec/mat " << roundtrip_ok << "/" << n << ", fidelity " << fid_ok
    << "/" << n << ", correction no-op " << noop_ok << "/" << n
    << " (worst " << fmt("%.2e", worst_noop) << ")";
  for (const auto &b : broken) s << " " << b;
  o.detail = s.str();
  return o;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 6. Every command twice with the same inputs.
Outcome determinism(const fs::path &workdir) {
  std::vector<std::string> differ;
  auto same = [&](const fs::path &a, const fs::path &b, const std::string &n) {
    const std::string x = slurp(a), y = slurp(b);
    if (x.empty() || x != y) differ.push_back(n);
  };

  for (const char *tag : {"a", "b"}) {
    SimulateOptions sim;
    sim.d = 5;
    sim.measurements = 150;
    sim.mean_total_counts = 2e4;
    sim.seed = 99;
    sim.out = (workdir / (std::string("sim_") + tag + ".json")).string();
    cmd_simulate(sim);

    ReconstructOptions rec;
    rec.in = (workdir / "sim_a.json").string();
    rec.out = (workdir / (std::string("rec_") + tag + ".json")).string();
    rec.diagnostics = (workdir / (std::string("diag_") + tag + ".csv")).string();
    rec.assignment = SubsetAssignment::seeded_random;
    rec.subset_seed = 4;
    std::ostringstream log;
    cmd_reconstruct(rec, log);

    MetricsOptions met;
    met.matrix = rec.out;
    met.target = "truth";
    met.measurements = rec.in;
    std::ostringstream out;
    cmd_metrics(met, out);
    io::write_text_file(workdir / (std::string("met_") + tag + ".json"),
                        out.str());

    SweepSpec sw;
    sw.d = 3;
    sw.fractions = {0.2, 0.4};
    sw.repeats = 2;
    sw.mean_total_counts = 1e4;
    sw.seed = 3;
    sw.timing = false;
    sw.threads = tag[0] == 'a' ? 1 : 2;
    sw.out = (workdir / (std::string("sweep_") + tag + ".csv")).string();
    cmd_sweep(sw);
  }
  same(workdir / "sim_a.json", workdir / "sim_b.json", "simulate");
  same(workdir / "rec_a.json", workdir / "rec_b.json", "reconstruct");
  same(workdir / "diag_a.csv", workdir / "diag_b.csv", "diagnostics");
  same(workdir / "met_a.json", workdir / "met_b.json", "metrics");
  same(workdir / "sweep_a.csv", workdir / "sweep_b.csv", "sweep");
  same(workdir / "sweep_a.csv.summary.csv", workdir / "sweep_b.csv.summary.csv",
       "sweep summary");

  Outcome o;
  o.pass = differ.empty();
  o.detail = differ.empty() ? "simulate, reconstruct, diagnostics, metrics, "
                              "sweep and summary byte-identical"
                            : "differs:";
  for (const auto &d : differ) o.detail += " " + d;
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"cstomo acceptance run"};
  std::string workdir = "acceptance_work";
  bool stretch = false;
  int threads = 0;
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for output files");
  app.add_flag("--stretch", stretch, "Also run the d=17 reconstruction");
  app.add_option("--threads", threads, "Sweep worker threads, 0: all cores");
  app.add_option("--only", only, "Run just these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  struct Criterion {
    int id;
    const char *name;
    bool gating;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence (d=2, 16 projectors)", true, oracle_equivalence},
      {2, "noiseless recovery (d=3, 30%, 10 seeds)", true, noiseless_recovery},
      {3, "fraction sweep (d=7, Poisson noise)", true,
       [&] { return fraction_sweep(workdir, threads); }},
      {4, "d=17 stretch run (optional)", false,
       [&] { return stretch_run(threads); }},
      {5, "invariant suite (100 seeds)", true, invariant_suite},
      {6, "determinism", true, [&] { return determinism(workdir); }},
  };

  bool gate_failed = false;
  for (const auto &c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
      continue;
    }
    if (c.id == 4 && !stretch) {
      std::cout << "SKIP criterion 4: " << c.name
                << " (pass --stretch to run)" << std::endl;
      continue;
    }
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": "
              << c.name << " | " << o.detail << std::endl;
    if (!o.pass && c.gating) gate_failed = true;
  }
  return gate_failed ? 1 : 0;
}
