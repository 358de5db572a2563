//
// Copyright 2026 The DropEscape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DROPESCAPE_DATA_IO_H_
#define DROPESCAPE_DATA_IO_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/dataset.h"

namespace dropescape {

enum class DataFormat { kCsv, kSvmlight };

absl::StatusOr<DataFormat> ParseDataFormat(std::string_view name);

// CSV: a header row, then one example per line with the label in the last
// column. Blank lines are skipped.
absl::StatusOr<Dataset> ParseCsv(std::string_view text);

// svmlight: "label index:value ..." with 1-based indices. Missing entries are
// zero; the dimension is the largest index seen. '#' starts a comment.
absl::StatusOr<Dataset> ParseSvmlight(std::string_view text);

// Reads and parses a file. Parse errors name the 1-based line number.
absl::StatusOr<Dataset> LoadDataset(const std::string& path, DataFormat format);

// Rows x_j ~ N(0, 1/p) and labels sign(<w, x>) for a random unit w; rows with
// |<w, x>| < margin are redrawn.
absl::StatusOr<Dataset> SyntheticSeparableLogistic(size_t n, size_t p,
                                                   uint64_t seed,
                                                   double margin = 0.0);

// Rows x_j ~ N(0, 1/p) and y = <w, x> + noise * N(0, 1) for w ~ N(0, I).
absl::StatusOr<Dataset> SyntheticLinearRegression(size_t n, size_t p,
                                                  double noise, uint64_t seed);

// A uniformly random subset of ceil((1 - rho) n) rows, kept in their
// original order.
absl::StatusOr<Dataset> RandomRemoval(const Dataset& d, double rho,
                                      uint64_t seed);

// Removes the floor(n rho) rows with the smallest |<x_i, theta_full>|; ties
// remove the lower row index first. Survivors keep their order.
absl::StatusOr<Dataset> AdversarialRemoval(const Dataset& d, double rho,
                                           std::span<const double> theta_full);

// Where an experiment's examples come from: a file when `path` is set,
// otherwise a synthetic generator ("separable_logistic" or
// "linear_regression").
struct DataSource {
  std::string path;
  DataFormat format = DataFormat::kCsv;
  std::string synthetic = "separable_logistic";
  size_t n = 400;
  size_t p = 20;
  double noise = 0.1;
  uint64_t seed = 7;
};

// Loads the source. With `logistic_labels`, labels in {0, 1} are mapped to
// {-1, +1} and any other label is a data error.
absl::StatusOr<Dataset> LoadDataSource(const DataSource& source,
                                       bool logistic_labels);

}  // namespace dropescape

#endif  // DROPESCAPE_DATA_IO_H_
