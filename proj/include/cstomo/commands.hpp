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
#include <ostream>
#include <string>
#include <vector>

#include "cstomo/noise_correct.hpp"
#include "cstomo/reconstruct.hpp"
#include "cstomo/state_sim.hpp"

namespace cstomo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitDegenerate = 3;

/// "max" for the maximally entangled state, "gaussian:<width>" for the
/// downconversion spectrum.
TwoPhotonState parse_state_spec(const std::string &spec, int d);

struct SimulateOptions {
  int d = 3;
  int measurements = 0;
  std::string state = "max";
  std::optional<double> mean_total_counts;  // noiseless when unset
  std::uint64_t seed = 0;
  bool same_arms = false;
  bool strip_truth = false;
  std::string out;
};

MeasurementSet cmd_simulate(const SimulateOptions &opts);

struct ReconstructOptions {
  std::string in;
  std::string out;
  ReconstructionConfig config;
  int subsets = 0;
  SubsetAssignment assignment = SubsetAssignment::round_robin;
  std::uint64_t subset_seed = 0;
  bool correction = true;
  std::string diagnostics;  // per-iteration CSV when non-empty
  /// Fidelity target when the file carries no ground truth.
  std::string target = "max";
};

/// Returns kExitOk, kExitNotConverged or kExitDegenerate. Input problems
/// throw before anything is written.
int cmd_reconstruct(const ReconstructOptions &opts, std::ostream &log);

enum class CorrectionMode { both, raw, corrected };

struct SweepSpec {
  int d = 7;
  std::vector<double> fractions;
  int repeats = 5;
  double mean_total_counts = 5e4;
  std::uint64_t seed = 0;
  CorrectionMode with_correction = CorrectionMode::both;
  std::string state = "max";
  int threads = 0;  // 0: hardware concurrency
  /// Off writes zero runtimes so that reruns are byte-identical.
  bool timing = true;
  ReconstructionConfig config;
  int subsets = 0;
  std::string out;
  std::string summary;  // defaults to <out>.summary.csv

  void validate() const;
};

struct SweepCell {
  double fraction = 0.0;
  int repeat = 0;
  std::uint64_t seed = 0;
  int measurements = 0;
  std::optional<double> fidelity_raw;
  std::optional<double> fidelity_corrected;
  int iterations = 0;
  double runtime_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepSummaryRow {
  double fraction = 0.0;
  int cells = 0;
  double mean_raw = 0.0;
  double std_raw = 0.0;
  double mean_corrected = 0.0;
  double std_corrected = 0.0;
};

/// Runs every (fraction, repeat) cell; output is ordered by fraction then
/// repeat regardless of thread scheduling. Failed cells are marked.
std::vector<SweepCell> run_sweep(const SweepSpec &spec);

/// Mean and sample standard deviation per fraction over successful cells.
std::vector<SweepSummaryRow> summarize_sweep(
    const std::vector<SweepCell> &cells);

std::string sweep_csv(const std::vector<SweepCell> &cells);
std::string sweep_summary_csv(const std::vector<SweepSummaryRow> &rows);

void cmd_sweep(const SweepSpec &spec);

struct MetricsOptions {
  std::string matrix;        // report JSON or bare matrix JSON
  std::string target = "max";
  std::string measurements;  // optional: residual and "truth" target
};

/// Prints the MetricsSummary as JSON.
void cmd_metrics(const MetricsOptions &opts, std::ostream &out);

}  // namespace cstomo
