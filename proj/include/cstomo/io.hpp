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

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cstomo/metrics.hpp"
#include "cstomo/noise_correct.hpp"
#include "cstomo/reconstruct.hpp"
#include "cstomo/state_sim.hpp"

namespace cstomo::io {

using nlohmann::json;

/// Malformed or inconsistent file contents.
class SchemaError : public std::invalid_argument {
 public:
  explicit SchemaError(const std::string &what)
      : std::invalid_argument(what) {}
};

// Complex numbers are [re, im] pairs everywhere.
json complex_to_json(Complex z);
Complex complex_from_json(const json &j);

/// Row-major nesting: [[ [re, im] x D ] x D].
json matrix_to_json(const CMatrix &m);
CMatrix matrix_from_json(const json &j);

json vector_to_json(const Eigen::VectorXcd &v);
Eigen::VectorXcd vector_from_json(const json &j);

json measurement_set_to_json(const MeasurementSet &ms);
/// Parses and revalidates every invariant; SchemaError on failure.
MeasurementSet measurement_set_from_json(const json &j);

json metrics_to_json(const MetricsSummary &m);

json report_to_json(const ReconstructionReport &r);
json correction_to_json(const CorrectionDiagnostics &c);

json read_json_file(const std::filesystem::path &path);

/// Writes to a sibling temporary and renames, so readers never see a
/// partial file.
void write_text_file(const std::filesystem::path &path,
                     const std::string &content);
void write_json_file(const std::filesystem::path &path, const json &j);

}  // namespace cstomo::io
