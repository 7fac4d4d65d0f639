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

#include "cstomo/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cstomo/io.hpp"
#include "cstomo/metrics.hpp"

namespace cstomo {

namespace {

using io::json;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string sci_or_empty(const std::optional<double> &x) {
  return x ? sci(*x) : std::string();
}

json metrics_block(const CMatrix &rho, const TwoPhotonState &target,
                   const std::string &target_name, const MeasurementSet &ms) {
  json j = io::metrics_to_json(summarize(rho, target, &ms));
  j["target"] = target_name;
  return j;
}

int exit_code_for(const ReconstructionReport &r) {
  return r.converged ? kExitOk : kExitNotConverged;
}

int measurements_for(double fraction, int d) {
  const double full = std::pow(double(d), 4);
  return std::max(1, static_cast<int>(std::lround(fraction * full)));
}

}  // namespace

TwoPhotonState parse_state_spec(const std::string &spec, int d) {
  if (spec == "max") return make_max_entangled(d);
  const std::string prefix = "gaussian:";
  if (spec.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    const std::string width = spec.substr(prefix.size());
    double w = 0.0;
    try {
      w = std::stod(width, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != width.size()) {
      throw std::invalid_argument("bad spiral width in state spec: " + spec);
    }
    return make_downconversion_state(d, w);
  }
  throw std::invalid_argument("unknown state spec: " + spec +
                              " (expected max or gaussian:<width>)");
}

MeasurementSet cmd_simulate(const SimulateOptions &opts) {
  if (opts.measurements < 1) {
    throw std::invalid_argument("--measurements must be at least 1");
  }
  SimulationSpec spec;
  spec.d = opts.d;
  spec.measurements = opts.measurements;
  spec.state = parse_state_spec(opts.state, opts.d);
  spec.mean_total_counts = opts.mean_total_counts;
  spec.seed = opts.seed;
  spec.same_arms = opts.same_arms;

  MeasurementSet ms = simulate_measurements(spec);
  if (opts.strip_truth) ms.truth.reset();
  if (!opts.out.empty()) {
    io::write_json_file(opts.out, io::measurement_set_to_json(ms));
  }
  return ms;
}

int cmd_reconstruct(const ReconstructOptions &opts, std::ostream &log) {
  const MeasurementSet ms =
      io::measurement_set_from_json(io::read_json_file(opts.in));

  const bool have_truth = ms.truth.has_value();
  const TwoPhotonState target =
      have_truth ? *ms.truth : parse_state_spec(opts.target, ms.d);
  const std::string target_name = have_truth ? "truth" : opts.target;

  ReconstructionConfig cfg = opts.config;
  std::ostringstream diag;
  int run = -1;
  if (!opts.diagnostics.empty()) {
    diag << "run,iteration,step,step_threshold,residual,rank_kept\n";
    cfg.on_iteration = [&](const IterationDiagnostics &it) {
      if (it.iteration == 1) ++run;
      diag << run << ',' << it.iteration << ',' << sci(it.step) << ','
           << sci(it.step_threshold) << ',' << sci(it.residual) << ','
           << it.rank_kept << '\n';
    };
  }

  json report;
  int code = kExitOk;
  try {
    if (opts.correction) {
      NoiseCorrectionConfig nc;
      nc.base = cfg;
      nc.n_subsets = opts.subsets;
      nc.assignment = opts.assignment;
      nc.seed = opts.subset_seed;
      const CorrectedReport r = reconstruct_corrected(ms, nc);
      report = io::report_to_json(r.corrected);
      report["metrics"] = metrics_block(r.corrected.rho, target, target_name,
                                        ms);
      json corr = io::correction_to_json(r.diagnostics);
      json raw = io::report_to_json(r.raw);
      raw.erase("steps");
      raw.erase("residuals");
      raw["metrics"] = metrics_block(r.raw.rho, target, target_name, ms);
      corr["raw"] = std::move(raw);
      report["correction"] = std::move(corr);
      if (r.diagnostics.fallback) {
        log << "warning: noise correction skipped: " << r.diagnostics.warning
            << '\n';
      }
      code = exit_code_for(r.corrected);
    } else {
      const ReconstructionReport r = reconstruct(ms, cfg);
      report = io::report_to_json(r);
      report["metrics"] = metrics_block(r.rho, target, target_name, ms);
      code = exit_code_for(r);
    }
  } catch (const DegenerateError &e) {
    log << "error: degenerate system: " << e.what() << '\n';
    return kExitDegenerate;
  }

  report["config"] = {{"tau", cfg.tau},
                      {"tau_ell", cfg.tau_ell},
                      {"step_tol", cfg.step_tol_rel},
                      {"k_max", cfg.k_max},
                      {"threshold_mode",
                       cfg.threshold_mode == ThresholdMode::relative
                           ? "relative"
                           : "absolute"},
                      {"enforce_psd", cfg.enforce_psd},
                      {"correction", opts.correction}};
  if (!opts.out.empty()) io::write_json_file(opts.out, report);
  if (!opts.diagnostics.empty()) {
    io::write_text_file(opts.diagnostics, diag.str());
  }
  if (code == kExitNotConverged) {
    log << "warning: no convergence within " << cfg.k_max << " iterations\n";
  }
  return code;
}

void SweepSpec::validate() const {
  check_mode_count(d);
  if (fractions.empty()) throw std::invalid_argument("no sweep fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
      throw std::invalid_argument("sweep fractions must lie in (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw std::invalid_argument("sweep fractions must be ascending");
    }
  }
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (!(mean_total_counts > 0.0)) {
    throw std::invalid_argument("mean total counts must be positive");
  }
  config.validate();
}

std::vector<SweepCell> run_sweep(const SweepSpec &spec) {
  spec.validate();
  const TwoPhotonState state = parse_state_spec(spec.state, spec.d);
  const TwoPhotonState target = make_max_entangled(spec.d);

  std::vector<SweepCell> cells;
  for (std::size_t f = 0; f < spec.fractions.size(); ++f) {
    for (int r = 0; r < spec.repeats; ++r) {
      SweepCell c;
      c.fraction = spec.fractions[f];
      c.repeat = r;
      c.seed = derive_seed(derive_seed(spec.seed, f), r);
      c.measurements = measurements_for(c.fraction, spec.d);
      cells.push_back(c);
    }
  }

  auto run_cell = [&](SweepCell &c) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SimulationSpec sim;
      sim.d = spec.d;
      sim.measurements = c.measurements;
      sim.state = state;
      sim.mean_total_counts = spec.mean_total_counts;
      sim.seed = c.seed;
      const MeasurementSet ms = simulate_measurements(sim);

      if (spec.with_correction == CorrectionMode::raw) {
        const ReconstructionReport r = reconstruct(ms, spec.config);
        c.fidelity_raw = fidelity_pure(r.rho, target);
        c.iterations = r.iterations;
      } else {
        NoiseCorrectionConfig nc;
        nc.base = spec.config;
        nc.n_subsets = spec.subsets;
        nc.seed = c.seed;
        const CorrectedReport r = reconstruct_corrected(ms, nc);
        if (spec.with_correction == CorrectionMode::both) {
          c.fidelity_raw = fidelity_pure(r.raw.rho, target);
        }
        c.fidelity_corrected = fidelity_pure(r.corrected.rho, target);
        c.iterations = r.raw.iterations;
      }
    } catch (const std::exception &e) {
      c.failed = true;
      c.error = e.what();
    }
    if (spec.timing) {
      c.runtime_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
    }
  };

  unsigned threads = spec.threads > 0
                         ? static_cast<unsigned>(spec.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      run_cell(cells[i]);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  return cells;
}

std::vector<SweepSummaryRow> summarize_sweep(
    const std::vector<SweepCell> &cells) {
  std::vector<SweepSummaryRow> rows;
  auto mean_std = [](const std::vector<double> &v) {
    if (v.empty()) return std::pair{std::nan(""), std::nan("")};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    if (v.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / double(v.size() - 1))};
  };

  std::size_t i = 0;
  while (i < cells.size()) {
    const double fraction = cells[i].fraction;
    std::vector<double> raw, corrected;
    int ok = 0;
    for (; i < cells.size() && cells[i].fraction == fraction; ++i) {
      if (cells[i].failed) continue;
      ++ok;
      if (cells[i].fidelity_raw) raw.push_back(*cells[i].fidelity_raw);
      if (cells[i].fidelity_corrected) {
        corrected.push_back(*cells[i].fidelity_corrected);
      }
    }
    SweepSummaryRow row;
    row.fraction = fraction;
    row.cells = ok;
    std::tie(row.mean_raw, row.std_raw) = mean_std(raw);
    std::tie(row.mean_corrected, row.std_corrected) = mean_std(corrected);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepCell> &cells) {
  std::ostringstream out;
  out << "fraction,repeat,seed,fidelity_raw,fidelity_corrected,iterations,"
         "runtime_seconds,status\n";
  for (const auto &c : cells) {
    out << sci(c.fraction) << ',' << c.repeat << ',' << c.seed << ','
        << sci_or_empty(c.fidelity_raw) << ','
        << sci_or_empty(c.fidelity_corrected) << ',' << c.iterations << ','
        << sci(c.runtime_seconds) << ',' << (c.failed ? "failed" : "ok")
        << '\n';
  }
  return out.str();
}

std::string sweep_summary_csv(const std::vector<SweepSummaryRow> &rows) {
  std::ostringstream out;
  out << "fraction,cells,mean_fidelity_raw,std_fidelity_raw,"
         "mean_fidelity_corrected,std_fidelity_corrected\n";
  auto num = [](double x) { return std::isnan(x) ? std::string() : sci(x); };
  for (const auto &r : rows) {
    out << sci(r.fraction) << ',' << r.cells << ',' << num(r.mean_raw) << ','
        << num(r.std_raw) << ',' << num(r.mean_corrected) << ','
        << num(r.std_corrected) << '\n';
  }
  return out.str();
}

void cmd_sweep(const SweepSpec &spec) {
  if (spec.out.empty()) throw std::invalid_argument("sweep needs --out");
  const auto cells = run_sweep(spec);
  io::write_text_file(spec.out, sweep_csv(cells));
  const std::string summary =
      spec.summary.empty() ? spec.out + ".summary.csv" : spec.summary;
  io::write_text_file(summary, sweep_summary_csv(summarize_sweep(cells)));
  for (const auto &c : cells) {
    if (c.failed) {
      std::cerr << "warning: cell fraction=" << c.fraction
                << " repeat=" << c.repeat << " failed: " << c.error << '\n';
    }
  }
}

void cmd_metrics(const MetricsOptions &opts, std::ostream &out) {
  const json doc = io::read_json_file(opts.matrix);
  const json &mj = doc.is_object() && doc.contains("rho") ? doc["rho"] : doc;
  const CMatrix rho = io::matrix_from_json(mj);
  if (!is_hermitian(rho, 1e-9)) {
    throw io::SchemaError("matrix is not Hermitian");
  }
  const int d = static_cast<int>(std::lround(std::sqrt(double(rho.rows()))));
  if (d * d != rho.rows()) {
    throw io::SchemaError("matrix side is not a square of the mode count");
  }

  std::optional<MeasurementSet> ms;
  if (!opts.measurements.empty()) {
    ms = io::measurement_set_from_json(io::read_json_file(opts.measurements));
    if (ms->d != d) {
      throw io::SchemaError("measurement file does not match the matrix");
    }
  }
  TwoPhotonState target;
  if (opts.target == "truth") {
    if (!ms || !ms->truth) {
      throw std::invalid_argument(
          "target 'truth' needs a measurement file with ground truth");
    }
    target = *ms->truth;
  } else {
    target = parse_state_spec(opts.target, d);
  }

  json j = io::metrics_to_json(summarize(rho, target, ms ? &*ms : nullptr));
  j["target"] = opts.target;
  out << j.dump(2) << '\n';
}

}  // namespace cstomo
