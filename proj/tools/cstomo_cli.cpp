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

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cstomo/commands.hpp"
#include "cstomo/io.hpp"

namespace {

void add_solver_flags(CLI::App *cmd, cstomo::ReconstructionConfig &cfg,
                      std::string &mode) {
  cmd->add_option("--tau", cfg.tau, "Spectral threshold")
      ->capture_default_str();
  cmd->add_option("--tau-ell", cfg.tau_ell, "Element (sparsity) threshold")
      ->capture_default_str();
  cmd->add_option("--step-tol", cfg.step_tol_rel,
                  "Stop when the step is below this fraction of |rho|")
      ->capture_default_str();
  cmd->add_option("--k-max", cfg.k_max, "Iteration cap")
      ->capture_default_str();
  cmd->add_option("--threshold-mode", mode, "relative or absolute")
      ->check(CLI::IsMember({"relative", "absolute"}))
      ->capture_default_str();
  cmd->add_flag("!--no-psd-clip", cfg.enforce_psd,
                "Skip the PSD clip after the element threshold");
}

cstomo::ThresholdMode to_mode(const std::string &m) {
  return m == "absolute" ? cstomo::ThresholdMode::absolute
                         : cstomo::ThresholdMode::relative;
}

std::vector<double> parse_fractions(const std::string &list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Compressive-sensing tomography of two-photon OAM states"};
  app.require_subcommand(1);

  // simulate
  cstomo::SimulateOptions sim;
  double sim_counts = 0.0;
  auto *simulate = app.add_subcommand(
      "simulate", "Simulate random separable projective measurements");
  simulate->add_option("--d", sim.d, "Modes per photon (odd)")->required();
  simulate->add_option("--measurements,-M", sim.measurements,
                       "Number of projectors")
      ->required();
  simulate->add_option("--state", sim.state, "max or gaussian:<width>")
      ->capture_default_str();
  simulate->add_option("--counts", sim_counts,
                       "Mean coincidences at p = 1 (omit for noiseless)");
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_flag("--same-arms", sim.same_arms,
                     "Use one random mode for both arms");
  simulate->add_flag("--strip-truth", sim.strip_truth,
                     "Leave the ground truth out of the file");
  simulate->add_option("--out,-o", sim.out)->required();

  // reconstruct
  cstomo::ReconstructOptions rec;
  std::string rec_mode = "relative";
  std::string rec_assign = "round-robin";
  bool no_correction = false;
  auto *reconstruct =
      app.add_subcommand("reconstruct", "Recover a density matrix");
  reconstruct->add_option("--in,-i", rec.in)->required();
  reconstruct->add_option("--out,-o", rec.out)->required();
  add_solver_flags(reconstruct, rec.config, rec_mode);
  reconstruct->add_option("--subsets", rec.subsets,
                          "Noise-correction subsets (0: automatic)")
      ->capture_default_str();
  reconstruct->add_option("--assignment", rec_assign,
                          "round-robin or seeded-random")
      ->check(CLI::IsMember({"round-robin", "seeded-random"}));
  reconstruct->add_option("--seed", rec.subset_seed,
                          "Seed for seeded-random subsets");
  reconstruct->add_flag("--no-correction", no_correction);
  reconstruct->add_option("--diagnostics", rec.diagnostics,
                          "Per-iteration CSV path");
  reconstruct->add_option("--target", rec.target,
                          "Fidelity target when the file has no truth")
      ->capture_default_str();

  // sweep
  cstomo::SweepSpec sweep;
  std::string fractions = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6";
  std::string sweep_mode = "relative";
  std::string with_correction = "both";
  bool no_timing = false;
  auto *sweep_cmd = app.add_subcommand(
      "sweep", "Fidelity versus measurement fraction, with and without "
               "noise correction");
  sweep_cmd->add_option("--d", sweep.d)->capture_default_str();
  sweep_cmd->add_option("--fractions", fractions,
                        "Comma-separated fractions of d^4")
      ->capture_default_str();
  sweep_cmd->add_option("--repeats", sweep.repeats)->capture_default_str();
  sweep_cmd->add_option("--counts", sweep.mean_total_counts,
                        "Mean coincidences at p = 1")
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed)->capture_default_str();
  sweep_cmd->add_option("--state", sweep.state)->capture_default_str();
  sweep_cmd->add_option("--with-correction", with_correction,
                        "both, raw or corrected")
      ->check(CLI::IsMember({"both", "raw", "corrected"}));
  sweep_cmd->add_option("--subsets", sweep.subsets)->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.threads, "0: all cores")
      ->capture_default_str();
  sweep_cmd->add_flag("--no-timing", no_timing,
                      "Write zero runtimes (byte-reproducible output)");
  add_solver_flags(sweep_cmd, sweep.config, sweep_mode);
  sweep_cmd->add_option("--out,-o", sweep.out)->required();
  sweep_cmd->add_option("--summary", sweep.summary,
                        "Summary CSV (default <out>.summary.csv)");

  // metrics
  cstomo::MetricsOptions met;
  auto *metrics = app.add_subcommand("metrics",
                                     "Fidelity, purity, rank and residual");
  metrics->add_option("--matrix", met.matrix, "Report or matrix JSON")
      ->required();
  metrics->add_option("--target", met.target,
                      "max, gaussian:<width> or truth")
      ->capture_default_str();
  metrics->add_option("--measurements", met.measurements,
                      "Measurement file for residual / truth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      if (simulate->count("--counts") > 0) sim.mean_total_counts = sim_counts;
      cstomo::cmd_simulate(sim);
      return cstomo::kExitOk;
    }
    if (*reconstruct) {
      rec.config.threshold_mode = to_mode(rec_mode);
      rec.correction = !no_correction;
      rec.assignment = rec_assign == "seeded-random"
                           ? cstomo::SubsetAssignment::seeded_random
                           : cstomo::SubsetAssignment::round_robin;
      return cstomo::cmd_reconstruct(rec, std::cerr);
    }
    if (*sweep_cmd) {
      sweep.fractions = parse_fractions(fractions);
      sweep.config.threshold_mode = to_mode(sweep_mode);
      sweep.timing = !no_timing;
      sweep.with_correction =
          with_correction == "raw"         ? cstomo::CorrectionMode::raw
          : with_correction == "corrected" ? cstomo::CorrectionMode::corrected
                                           : cstomo::CorrectionMode::both;
      cstomo::cmd_sweep(sweep);
      return cstomo::kExitOk;
    }
    if (*metrics) {
      cstomo::cmd_metrics(met, std::cout);
      return cstomo::kExitOk;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cstomo::kExitError;
  }
  return cstomo::kExitError;
}
