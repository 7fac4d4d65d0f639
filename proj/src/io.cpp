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

#include "cstomo/io.hpp"

#include <fstream>
#include <sstream>

namespace cstomo::io {

namespace {

const json &require(const json &j, const char *key) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

ModeVector mode_from_json(const json &j, int d, const char *what) {
  Eigen::VectorXcd v = vector_from_json(j);
  if (v.size() != d) {
    throw SchemaError(std::string(what) + " has " + std::to_string(v.size()) +
                      " amplitudes, expected " + std::to_string(d));
  }
  return {std::move(v)};
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json &j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw SchemaError("complex number must be a [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const CMatrix &m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(complex_to_json(m(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json &j) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError("matrix must be a non-empty array of rows");
  }
  const auto D = static_cast<Eigen::Index>(j.size());
  CMatrix m(D, D);
  for (Eigen::Index r = 0; r < D; ++r) {
    const json &row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != D) {
      throw SchemaError("matrix is not square");
    }
    for (Eigen::Index c = 0; c < D; ++c) m(r, c) = complex_from_json(row[c]);
  }
  return m;
}

json vector_to_json(const Eigen::VectorXcd &v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(complex_to_json(v(i)));
  }
  return out;
}

Eigen::VectorXcd vector_from_json(const json &j) {
  if (!j.is_array()) throw SchemaError("expected an array of [re, im] pairs");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  }
  return v;
}

json measurement_set_to_json(const MeasurementSet &ms) {
  json projectors = json::array();
  for (const auto &a : ms.projectors) {
    projectors.push_back({{"signal", vector_to_json(a.signal.amps)},
                          {"idler", vector_to_json(a.idler.amps)}});
  }
  json j = {{"d", ms.d},
            {"seed", ms.seed},
            {"calibration", ms.calibration},
            {"projectors", std::move(projectors)},
            {"probs", ms.probs}};
  if (ms.counts) j["counts"] = *ms.counts;
  if (ms.truth) {
    j["truth"] = {{"coeffs", vector_to_json(ms.truth->coeffs)},
                  {"simulation_only", true}};
  }
  return j;
}

MeasurementSet measurement_set_from_json(const json &j) {
  MeasurementSet ms;
  try {
    ms.d = require(j, "d").get<int>();
    ms.seed = require(j, "seed").get<std::uint64_t>();
    ms.calibration = require(j, "calibration").get<double>();
    const json &projectors = require(j, "projectors");
    if (!projectors.is_array()) throw SchemaError("projectors must be a list");
    for (const auto &p : projectors) {
      ms.projectors.push_back({mode_from_json(require(p, "signal"), ms.d,
                                              "signal arm"),
                               mode_from_json(require(p, "idler"), ms.d,
                                              "idler arm")});
    }
    ms.probs = require(j, "probs").get<std::vector<double>>();
    if (j.contains("counts") && !j["counts"].is_null()) {
      ms.counts = j["counts"].get<std::vector<std::int64_t>>();
    }
    if (j.contains("truth") && !j["truth"].is_null()) {
      ms.truth = TwoPhotonState{vector_from_json(require(j["truth"],
                                                         "coeffs"))};
    }
  } catch (const json::exception &e) {
    throw SchemaError(std::string("malformed measurement file: ") + e.what());
  }
  try {
    ms.validate();
  } catch (const std::invalid_argument &e) {
    throw SchemaError(e.what());
  }
  return ms;
}

json metrics_to_json(const MetricsSummary &m) {
  json j = {{"fidelity", m.fidelity},
            {"purity", m.purity},
            {"effective_rank", m.effective_rank},
            {"fidelity_clamped", m.fidelity_clamped}};
  j["residual_inf"] = m.residual_inf ? json(*m.residual_inf) : json(nullptr);
  return j;
}

json report_to_json(const ReconstructionReport &r) {
  return {{"rho", matrix_to_json(r.rho)},
          {"rho_pre_gamma", matrix_to_json(r.rho_pre_gamma)},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"final_step", r.final_step},
          {"final_step_threshold", r.final_step_threshold},
          {"steps", r.steps},
          {"residuals", r.per_iteration_residuals},
          {"kept_rows", r.kept_rows},
          {"dropped_rows", r.dropped_rows}};
}

json correction_to_json(const CorrectionDiagnostics &c) {
  return {{"n_subsets", c.n_subsets},
          {"subset_delta_norms", c.subset_delta_norms},
          {"omitted_subsets", c.omitted_subsets},
          {"subset_iterations", c.subset_iterations},
          {"delta_rho_norm", c.delta_rho_norm},
          {"clamped", c.clamped},
          {"fallback", c.fallback},
          {"warning", c.warning}};
}

json read_json_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path &path,
                     const std::string &content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_file(const std::filesystem::path &path, const json &j) {
  write_text_file(path, j.dump() + "\n");
}

}  // namespace cstomo::io
